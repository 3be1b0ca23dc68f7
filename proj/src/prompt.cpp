#include "trek/prompt.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "trek/error.hpp"

namespace trek {

namespace fs = std::filesystem;

std::string format_coordinate(double v) {
  if (!std::isfinite(v)) throw Error(ErrorKind::InvalidInput, "non-finite coordinate");
  const double mag = std::abs(v);
  if (mag >= 1e15) {
    char big[64];
    std::snprintf(big, sizeof big, "%.2f", v);
    return big;
  }
  // Twelve decimals recovers the intended decimal value of inputs like 1.005.
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12f", mag);
  const std::string s(buf);
  const auto dot = s.find('.');
  long long cents = std::stoll(s.substr(0, dot)) * 100 + (s[dot + 1] - '0') * 10 + (s[dot + 2] - '0');
  if (s[dot + 3] >= '5') ++cents;
  std::string out = (v < 0.0 && cents != 0) ? "-" : "";
  char tail[8];
  std::snprintf(tail, sizeof tail, ".%02lld", cents % 100);
  return out + std::to_string(cents / 100) + tail;
}

std::string PointList::serialize() const {
  std::string out;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (i > 0) out += "; ";
    const auto& e = entries[i];
    out += "(" + e.text[0] + ", " + e.text[1] + ", " + e.text[2] + ")";
  }
  return out;
}

PointList format_points(const Trajectory& traj, const KeyframeSelection& selected) {
  PointList list;
  int rank = 0;
  for (const auto t : selected.timesteps) {
    const auto* step = traj.find(t);
    if (!step) throw Error(ErrorKind::MissingPose, "no pose for timestep " + std::to_string(t));
    PointEntry e;
    e.rank = rank++;
    e.timestep = t;
    for (int i = 0; i < 3; ++i) {
      e.text[static_cast<std::size_t>(i)] = format_coordinate(step->pose.position(i));
      e.value[static_cast<std::size_t>(i)] = std::stod(e.text[static_cast<std::size_t>(i)]);
    }
    list.entries.push_back(std::move(e));
  }
  return list;
}

std::string build_prompt(const PointList& points, std::string_view question, const PromptTemplates& templates) {
  if (std::all_of(question.begin(), question.end(), [](unsigned char c) { return std::isspace(c); })) {
    throw Error(ErrorKind::EmptyQuestion, "question is empty");
  }
  std::string out = templates.universal;
  out += templates.trajectory_views;
  out += templates.points;
  out += points.serialize();
  out += "\n";
  out += question;
  return out;
}

std::string keyframe_file(int rank) { return "keyframe_" + std::to_string(rank) + ".png"; }

nlohmann::ordered_json build_manifest(std::span<const EncodedKeyframe> keyframes, const PointList& points,
                                      const BundleMeta& meta) {
  nlohmann::ordered_json m;
  m["k"] = keyframes.size();
  m["interval"] = meta.interval;
  m["strategy"] = std::string(to_string(meta.strategy));
  m["keyframes"] = nlohmann::ordered_json::array();
  for (const auto& kf : keyframes) {
    nlohmann::ordered_json entry;
    entry["rank"] = kf.rank;
    entry["t"] = kf.source_timestep;
    entry["file"] = keyframe_file(kf.rank);
    entry["color"] = {kf.color[0], kf.color[1], kf.color[2]};
    m["keyframes"].push_back(std::move(entry));
  }
  m["bev"] = std::string(kBevFile);
  m["traj3d"] = std::string(kPlot3dFile);
  m["prompt"] = std::string(kPromptFile);
  m["points"] = nlohmann::ordered_json::array();
  for (const auto& p : points.entries) m["points"].push_back({p.value[0], p.value[1], p.value[2]});
  m["flags"] = nlohmann::ordered_json::array();
  for (const bool f : meta.flags) m["flags"].push_back(f);
  return m;
}

namespace {

struct PendingFile {
  fs::path final_path;
  fs::path temp_path;
  std::string bytes;
};

std::string as_string(const std::vector<std::uint8_t>& bytes) { return {bytes.begin(), bytes.end()}; }

}  // namespace

PromptBundle write_bundle(std::span<const EncodedKeyframe> keyframes, const RenderedImage& bev,
                          const RenderedImage& plot3d, const std::string& prompt, const PointList& points,
                          const BundleMeta& meta, const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) throw Error(ErrorKind::WriteError, "cannot create " + out_dir.string());

  PromptBundle bundle;
  bundle.directory = out_dir;
  bundle.manifest = build_manifest(keyframes, points, meta);

  std::vector<PendingFile> files;
  auto add = [&](const std::string& name, std::string bytes) {
    files.push_back({out_dir / name, out_dir / ("." + name + ".tmp"), std::move(bytes)});
    return out_dir / name;
  };
  for (const auto& kf : keyframes) {
    bundle.keyframes.push_back(add(keyframe_file(kf.rank), as_string(encode_png(kf.frame.image))));
  }
  bundle.bev = add(std::string(kBevFile), as_string(encode_png(bev.image)));
  bundle.plot3d = add(std::string(kPlot3dFile), as_string(encode_png(plot3d.image)));
  bundle.prompt = add(std::string(kPromptFile), prompt);
  bundle.manifest_path = add(std::string(kManifestFile), bundle.manifest.dump(2) + "\n");

  std::size_t renamed = 0;
  try {
    for (const auto& f : files) {
      std::ofstream out(f.temp_path, std::ios::binary | std::ios::trunc);
      out.write(f.bytes.data(), static_cast<std::streamsize>(f.bytes.size()));
      out.close();
      if (!out) throw Error(ErrorKind::WriteError, "cannot write " + f.temp_path.string());
    }
    for (; renamed < files.size(); ++renamed) {
      fs::rename(files[renamed].temp_path, files[renamed].final_path, ec);
      if (ec) throw Error(ErrorKind::WriteError, "cannot rename to " + files[renamed].final_path.string());
    }
  } catch (...) {
    for (std::size_t i = 0; i < files.size(); ++i) {
      fs::remove(files[i].temp_path, ec);
      if (i < renamed) fs::remove(files[i].final_path, ec);
    }
    throw;
  }
  return bundle;
}

}  // namespace trek
