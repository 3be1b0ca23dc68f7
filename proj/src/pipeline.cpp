#include "trek/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "trek/error.hpp"
#include "trek/metrics.hpp"
#include "trek/render.hpp"
#include "trek/util.hpp"

namespace trek {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

void PipelineConfig::validate() const {
  if (interval < 1) throw Error(ErrorKind::ConfigurationError, "interval must be >= 1");
  if (keyframes < 1) throw Error(ErrorKind::ConfigurationError, "keyframes must be >= 1");
  if (!(conf_threshold >= 0.0 && conf_threshold <= 1.0)) {
    throw Error(ErrorKind::ConfigurationError, "conf threshold must lie in [0, 1]");
  }
  if (!(vo.ransac.threshold > 0.0)) throw Error(ErrorKind::ConfigurationError, "RANSAC threshold must be positive");
  if (vo.ransac.max_iters < 1) throw Error(ErrorKind::ConfigurationError, "RANSAC iterations must be >= 1");
}

// ---------------------------------------------------------------------------
// cache document

ordered_json cache_to_json(const VideoCache& cache) {
  ordered_json doc;
  doc["schema_version"] = cache.schema_version;
  doc["fingerprint"] = cache.fingerprint;
  doc["content_hash"] = cache.content_hash;
  doc["interval"] = cache.interval;
  doc["width"] = cache.width;
  doc["height"] = cache.height;
  doc["intrinsics"] = {{"fx", cache.intrinsics.fx},
                       {"fy", cache.intrinsics.fy},
                       {"cx", cache.intrinsics.cx},
                       {"cy", cache.intrinsics.cy}};
  doc["frames"] = ordered_json::array();
  for (const auto& f : cache.frames) doc["frames"].push_back({{"t", f.timestep}, {"file", f.path.string()}});
  doc["detections"] = ordered_json::array();
  for (const auto& e : cache.detections.entries()) {
    ordered_json rec;
    rec["t"] = e.timestep;
    rec["detections"] = ordered_json::array();
    for (const auto& d : e.detections) {
      rec["detections"].push_back({{"label", d.label}, {"conf", d.confidence}, {"bbox", d.bbox}});
    }
    doc["detections"].push_back(std::move(rec));
  }
  doc["poses"] = ordered_json::array();
  for (const auto& s : cache.trajectory.steps) {
    ordered_json p;
    p["t"] = s.timestep;
    std::vector<double> r;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) r.push_back(s.pose.rotation(i, j));
    }
    p["R"] = r;
    p["T"] = {s.pose.position.x(), s.pose.position.y(), s.pose.position.z()};
    p["flag"] = s.flagged;
    doc["poses"].push_back(std::move(p));
  }
  return doc;
}

namespace {

[[noreturn]] void schema_error(const std::string& what) {
  throw Error(ErrorKind::SchemaViolation, "cache: " + what);
}

const json& field(const json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key)) schema_error(std::string("missing \"") + key + "\"");
  return obj.at(key);
}

double number(const json& v, const char* what) {
  if (!v.is_number()) schema_error(std::string(what) + " must be a number");
  return v.get<double>();
}

std::int64_t integer(const json& v, const char* what) {
  if (!v.is_number_integer()) schema_error(std::string(what) + " must be an integer");
  return v.get<std::int64_t>();
}

const json& array(const json& v, const char* what, std::size_t exact = 0) {
  if (!v.is_array()) schema_error(std::string(what) + " must be an array");
  if (exact != 0 && v.size() != exact) schema_error(std::string(what) + " has the wrong length");
  return v;
}

}  // namespace

VideoCache cache_from_json(const json& doc) {
  VideoCache c;
  c.schema_version = static_cast<int>(integer(field(doc, "schema_version"), "schema_version"));
  if (c.schema_version != kCacheSchemaVersion) schema_error("unsupported schema_version");
  if (!field(doc, "fingerprint").is_string() || !field(doc, "content_hash").is_string()) {
    schema_error("hashes must be strings");
  }
  c.fingerprint = doc.at("fingerprint").get<std::string>();
  c.content_hash = doc.at("content_hash").get<std::string>();
  c.interval = static_cast<int>(integer(field(doc, "interval"), "interval"));
  c.width = static_cast<int>(integer(field(doc, "width"), "width"));
  c.height = static_cast<int>(integer(field(doc, "height"), "height"));
  const auto& k = field(doc, "intrinsics");
  c.intrinsics = {number(field(k, "fx"), "fx"), number(field(k, "fy"), "fy"), number(field(k, "cx"), "cx"),
                  number(field(k, "cy"), "cy")};

  for (const auto& f : array(field(doc, "frames"), "frames")) {
    if (!field(f, "file").is_string()) schema_error("frame file must be a string");
    c.frames.push_back({integer(field(f, "t"), "t"), f.at("file").get<std::string>()});
  }

  std::vector<TimelineEntry> entries;
  for (const auto& rec : array(field(doc, "detections"), "detections")) {
    TimelineEntry e;
    e.timestep = integer(field(rec, "t"), "t");
    for (const auto& d : array(field(rec, "detections"), "detections")) {
      Detection det;
      if (!field(d, "label").is_string()) schema_error("label must be a string");
      det.label = d.at("label").get<std::string>();
      det.confidence = number(field(d, "conf"), "conf");
      const auto& box = array(field(d, "bbox"), "bbox", 4);
      for (std::size_t i = 0; i < 4; ++i) det.bbox[i] = number(box[i], "bbox");
      e.detections.push_back(std::move(det));
    }
    entries.push_back(std::move(e));
  }
  c.detections = DetectionTimeline(std::move(entries));

  for (const auto& p : array(field(doc, "poses"), "poses")) {
    TrajectoryStep s;
    s.timestep = integer(field(p, "t"), "t");
    const auto& r = array(field(p, "R"), "R", 9);
    for (int i = 0; i < 9; ++i) s.pose.rotation(i / 3, i % 3) = number(r[static_cast<std::size_t>(i)], "R");
    const auto& t = array(field(p, "T"), "T", 3);
    for (int i = 0; i < 3; ++i) s.pose.position(i) = number(t[static_cast<std::size_t>(i)], "T");
    if (!field(p, "flag").is_boolean()) schema_error("flag must be a boolean");
    s.flagged = p.at("flag").get<bool>();
    c.trajectory.steps.push_back(s);
  }
  if (c.trajectory.size() != c.frames.size()) schema_error("one pose per frame expected");
  for (std::size_t i = 0; i < c.frames.size(); ++i) {
    if (c.frames[i].timestep != c.trajectory.steps[i].timestep) schema_error("pose and frame timesteps differ");
  }
  return c;
}

// ---------------------------------------------------------------------------
// fingerprints

fs::path resolve_cache_root(const PipelineConfig& config) {
  if (!config.cache_root.empty()) return config.cache_root;
  if (const char* env = std::getenv(kCacheEnvVar); env && *env) return env;
  return fs::current_path() / ".trek-cache";
}

namespace {

fs::path canonical_dir(const fs::path& dir) {
  std::error_code ec;
  auto p = fs::weakly_canonical(dir, ec);
  return ec ? fs::absolute(dir) : p;
}

}  // namespace

fs::path cache_path(const PipelineConfig& config) {
  const auto key = sha256_hex(canonical_dir(config.frames_dir).string()).substr(0, 16);
  return resolve_cache_root(config) / key / kCacheFile;
}

std::string config_fingerprint(const PipelineConfig& config) {
  ordered_json f;
  f["schema_version"] = kCacheSchemaVersion;
  f["interval"] = config.interval;
  if (config.detections_file) {
    f["detector"] = "sidecar:" + sha256_hex(read_file(*config.detections_file));
  } else if (config.detector_cmd) {
    f["detector"] = "cmd:" + *config.detector_cmd;
    f["conf"] = config.conf_threshold;
  } else {
    f["detector"] = nullptr;
  }
  f["intrinsics"] = config.intrinsics_file ? sha256_hex(read_file(*config.intrinsics_file)) : "default";
  const auto& o = config.vo.orb;
  f["orb"] = {o.fast_threshold, o.arc_length, o.max_keypoints, o.orientation_radius, o.ratio, o.max_hamming};
  const auto& r = config.vo.ransac;
  f["ransac"] = {r.threshold, r.max_iters, r.confidence, r.seed};
  return sha256_hex(f.dump());
}

std::string content_hash(const std::vector<FrameFile>& frames) {
  Sha256 h;
  for (const auto& f : frames) {
    const auto name = f.path.filename().string();
    h.update(std::to_string(name.size()) + ":" + name + ":");
    h.update_file(f.path);
  }
  return h.hex();
}

// ---------------------------------------------------------------------------
// precompute

fs::path extract_frames(const std::string& command, const fs::path& video, const fs::path& cache_root) {
  if (!fs::is_regular_file(video)) throw Error(ErrorKind::DecodeError, "no video file at " + video.string());
  Sha256 h;
  h.update_file(video);
  const auto dir = cache_root / "frames" / h.hex().substr(0, 16);
  const auto done = dir / ".complete";
  if (fs::exists(done)) {
    std::clog << "trek: reusing extracted frames " << dir.string() << "\n";
    return dir;
  }
  std::error_code ec;
  const auto tmp = dir.string() + ".partial";
  fs::remove_all(tmp, ec);
  fs::remove_all(dir, ec);
  fs::create_directories(tmp, ec);
  if (ec) throw Error(ErrorKind::WriteError, "cannot create " + tmp);
  const auto result =
      run_shell(command + " --video " + shell_quote(fs::absolute(video).string()) + " --out " + shell_quote(tmp));
  if (result.exit_code != 0) {
    fs::remove_all(tmp, ec);
    throw Error(ErrorKind::DecodeError,
                "frame extraction exited with status " + std::to_string(result.exit_code) + ": " + result.err);
  }
  fs::rename(tmp, dir, ec);
  if (ec) throw Error(ErrorKind::WriteError, "cannot move extracted frames to " + dir.string());
  write_file_atomic(done, "");
  return dir;
}

DetectionTimeline run_detector(const std::string& command, const fs::path& frames_dir, int interval,
                               double conf_threshold) {
  std::ostringstream conf;
  conf << conf_threshold;
  const auto full = command + " --frames " + shell_quote(frames_dir.string()) + " --interval " +
                    std::to_string(interval) + " --conf " + conf.str();
  const auto result = run_shell(full);
  if (result.exit_code != 0) {
    throw Error(ErrorKind::DetectorFailed,
                "detector exited with status " + std::to_string(result.exit_code) + ": " + result.err);
  }
  try {
    return parse_detections_text(result.out);
  } catch (const Error& e) {
    throw Error(ErrorKind::DetectorFailed, std::string("detector output rejected: ") + e.what());
  }
}

namespace {

// Keeps the records of subsampled frames and gives frames without a record an
// empty detection list, so the timeline has one entry per frame.
DetectionTimeline align_to_frames(const DetectionTimeline& source, const std::vector<FrameFile>& frames) {
  std::map<std::int64_t, const TimelineEntry*> by_t;
  for (const auto& e : source.entries()) by_t[e.timestep] = &e;
  std::vector<TimelineEntry> out;
  out.reserve(frames.size());
  for (const auto& f : frames) {
    auto it = by_t.find(f.timestep);
    out.push_back(it != by_t.end() ? *it->second : TimelineEntry{f.timestep, {}});
  }
  return DetectionTimeline(std::move(out));
}

std::optional<VideoCache> try_load_cache(const fs::path& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) return std::nullopt;
  try {
    return cache_from_json(json::parse(read_file(path)));
  } catch (const std::exception& e) {
    std::clog << "trek: ignoring unreadable cache " << path.string() << " (" << e.what() << ")\n";
    return std::nullopt;
  }
}

}  // namespace

PrecomputeResult precompute(const PipelineConfig& config) {
  config.validate();
  if (!config.detections_file && !config.detector_cmd) {
    throw Error(ErrorKind::ConfigurationError, "no detection sidecar and no detector command configured");
  }
  const auto frames_dir = canonical_dir(config.frames_dir);
  auto files = list_sequence(frames_dir, config.interval);
  for (auto& f : files) f.path = canonical_dir(f.path);

  PrecomputeResult result;
  result.path = cache_path(config);
  const auto fingerprint = config_fingerprint(config);
  const auto hash = content_hash(files);

  if (auto cached = try_load_cache(result.path)) {
    if (cached->fingerprint == fingerprint && cached->content_hash == hash) {
      std::clog << "trek: cache hit " << result.path.string() << "\n";
      result.cache = std::move(*cached);
      result.cache_hit = true;
      return result;
    }
    std::clog << "trek: cache stale, recomputing " << result.path.string() << "\n";
  }

  std::vector<FrameRecord> frames;
  frames.reserve(files.size());
  for (const auto& f : files) {
    frames.push_back(load_frame(f));
    if (frames.back().width() != frames.front().width() || frames.back().height() != frames.front().height()) {
      throw Error(ErrorKind::DimensionMismatch, f.path.string() + " differs in size from the first frame");
    }
  }
  const int width = frames.front().width();
  const int height = frames.front().height();
  const auto k = config.intrinsics_file ? parse_intrinsics(*config.intrinsics_file) : default_intrinsics(width, height);
  check_intrinsics_bound(k, width, height);

  DetectionTimeline raw;
  if (config.detections_file) {
    std::ifstream in(*config.detections_file);
    if (!in) throw Error(ErrorKind::ConfigurationError, "cannot open " + config.detections_file->string());
    raw = parse_detections(in);
  } else {
    raw = run_detector(*config.detector_cmd, frames_dir, config.interval, config.conf_threshold);
  }

  std::vector<GrayFrame> gray;
  gray.reserve(frames.size());
  for (const auto& f : frames) gray.push_back(to_grayscale(f));
  frames.clear();

  Trajectory traj;
  if (gray.size() == 1) {
    traj.steps.push_back({gray.front().timestep, WorldPose{}, false});
  } else {
    traj = run_vo(gray, k, config.vo);
  }

  VideoCache& c = result.cache;
  c.fingerprint = fingerprint;
  c.content_hash = hash;
  c.interval = config.interval;
  c.width = width;
  c.height = height;
  c.intrinsics = k;
  c.frames = files;
  c.detections = align_to_frames(raw, files);
  c.trajectory = std::move(traj);

  write_file_atomic(result.path, cache_to_json(c).dump(1) + "\n");
  return result;
}

// ---------------------------------------------------------------------------
// per-question preparation

PromptBundle answer_prep(const VideoCache& cache, const std::string& question, const PipelineConfig& config) {
  config.validate();
  // Fail before any image work when the question is unusable.
  build_prompt({}, question, config.templates);

  const auto timeline = class_timeline(cache.detections, config.conf_threshold);
  const auto interval = trim_span(timeline);
  const auto selection = select_keyframes(config.strategy, timeline, interval, config.keyframes);
  const int count = static_cast<int>(selection.timesteps.size());

  std::map<std::int64_t, const FrameFile*> files;
  for (const auto& f : cache.frames) files[f.timestep] = &f;

  std::vector<EncodedKeyframe> keyframes;
  Trajectory sub;
  std::vector<bool> flags;
  for (int rank = 0; rank < count; ++rank) {
    const auto t = selection.timesteps[static_cast<std::size_t>(rank)];
    const auto it = files.find(t);
    if (it == files.end()) throw Error(ErrorKind::InvariantViolation, "cache has no frame for timestep " + std::to_string(t));
    const auto* step = cache.trajectory.find(t);
    if (!step) throw Error(ErrorKind::MissingPose, "no pose for timestep " + std::to_string(t));
    keyframes.push_back(overlay_marker(load_frame(*it->second), rank, count));
    sub.steps.push_back(*step);
    flags.push_back(step->flagged);
  }

  const auto bev = render_bev(sub);
  const auto plot3d = render_3d(sub);
  const auto points = format_points(cache.trajectory, selection);
  const auto prompt = build_prompt(points, question, config.templates);
  const BundleMeta meta{cache.interval, config.strategy, flags};
  return write_bundle(keyframes, bev, plot3d, prompt, points, meta, config.out_dir);
}

// ---------------------------------------------------------------------------
// scoring

ScoreType parse_score_type(std::string_view name) {
  if (name == "mca") return ScoreType::Mca;
  if (name == "na") return ScoreType::Na;
  throw Error(ErrorKind::ConfigurationError, "unknown score type \"" + std::string(name) + "\" (mca|na)");
}

namespace {

std::vector<std::string> read_records(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ConfigurationError, "cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  while (!lines.empty() && lines.back().find_first_not_of(" \t") == std::string::npos) lines.pop_back();
  return lines;
}

std::optional<double> parse_number(const std::string& s) {
  std::istringstream in(s);
  double v = 0.0;
  if (!(in >> v)) return std::nullopt;
  in >> std::ws;
  if (!in.eof() || !std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace

ordered_json score_records(const std::vector<std::string>& preds, const std::vector<std::string>& truths,
                           ScoreType type) {
  if (preds.size() != truths.size()) {
    throw Error(ErrorKind::AlignmentError, std::to_string(preds.size()) + " predictions vs " +
                                               std::to_string(truths.size()) + " ground-truth records");
  }
  ordered_json report;
  report["type"] = type == ScoreType::Mca ? "mca" : "na";
  report["count"] = preds.size();
  report["items"] = ordered_json::array();
  double total = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    double s = 0.0;
    if (type == ScoreType::Mca) {
      s = mca_accuracy(preds[i], truths[i]);
    } else {
      const auto truth = parse_number(truths[i]);
      if (!truth) throw Error(ErrorKind::InvalidTruth, "record " + std::to_string(i + 1) + " is not a number");
      // An unparseable prediction scores zero rather than aborting the run.
      const auto pred = parse_number(preds[i]);
      s = pred ? mra(*pred, *truth) : 0.0;
    }
    total += s;
    report["items"].push_back(s);
  }
  report["mean"] = preds.empty() ? 0.0 : total / static_cast<double>(preds.size());
  return report;
}

ordered_json score(const fs::path& pred_file, const fs::path& truth_file, ScoreType type) {
  return score_records(read_records(pred_file), read_records(truth_file), type);
}

}  // namespace trek
