#include "trek/cli.hpp"

#include <iostream>
#include <map>
#include <optional>

#include <CLI11.hpp>

#include "trek/pipeline.hpp"
#include "trek/util.hpp"

namespace trek {

namespace fs = std::filesystem;

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ConfigurationError:
    case ErrorKind::InvalidK:
    case ErrorKind::InvalidIntrinsics:
    case ErrorKind::EmptyQuestion:
      return kExitConfig;
    case ErrorKind::NoFrames:
    case ErrorKind::DecodeError:
    case ErrorKind::DimensionMismatch:
    case ErrorKind::ParseError:
    case ErrorKind::DuplicateTimestep:
    case ErrorKind::SchemaViolation:
    case ErrorKind::WriteError:
    case ErrorKind::ImageTooSmall:
    case ErrorKind::FrameTooSmall:
    case ErrorKind::InsufficientFrames:
    case ErrorKind::InvalidInput:
    case ErrorKind::InvalidTruth:
    case ErrorKind::AlignmentError:
      return kExitInput;
    case ErrorKind::DetectorFailed:
      return kExitDetector;
    default:
      return kExitInternal;
  }
}

namespace {

struct Options {
  PipelineConfig config;
  std::string frames;
  std::string video;
  std::string extract_cmd;
  std::string intrinsics;
  std::string detections;
  std::string detector_cmd;
  std::string strategy = "balanced_topk";
  std::string out = "bundle";
  std::string question;
  std::string pred;
  std::string truth;
  std::string type;
};

void add_ingest_flags(CLI::App* cmd, Options& o) {
  auto* frames = cmd->add_option("--frames", o.frames, "Directory of extracted frames");
  auto* video = cmd->add_option("--video", o.video, "Video file, decoded with --extract-cmd");
  frames->excludes(video);
  cmd->add_option("--extract-cmd", o.extract_cmd, "Frame extractor, run as CMD --video FILE --out DIR")
      ->needs(video);
  cmd->add_option("--interval", o.config.interval, "Keep every N-th frame")->capture_default_str();
}

void add_precompute_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--intrinsics", o.intrinsics, "JSON file with fx, fy, cx, cy");
  cmd->add_option("--detections", o.detections, "Detection sidecar (JSONL)");
  cmd->add_option("--detector-cmd", o.detector_cmd, "Detector command emitting sidecar JSONL on stdout");
  cmd->add_option("--ransac-threshold", o.config.vo.ransac.threshold, "Sampson inlier threshold (normalized units)")
      ->capture_default_str();
  cmd->add_option("--seed", o.config.vo.ransac.seed, "RANSAC sampling seed")->capture_default_str();
  cmd->add_option("--workers", o.config.vo.workers, "Worker threads (0 = all cores)")->capture_default_str();
}

void add_prep_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--keyframes", o.config.keyframes, "Number of keyframes K")->capture_default_str();
  cmd->add_option("--strategy", o.strategy, "topk | temporal_topk | balanced_topk")->capture_default_str();
  cmd->add_option("--out", o.out, "Bundle output directory")->capture_default_str();
  cmd->add_option("--question", o.question, "Question text")->required();
}

void add_conf_flag(CLI::App* cmd, Options& o) {
  cmd->add_option("--conf-threshold", o.config.conf_threshold, "Detection confidence threshold")
      ->capture_default_str();
}

void finish_config(Options& o) {
  auto& c = o.config;
  c.validate();
  c.strategy = parse_strategy(o.strategy);
  if (o.frames.empty() && o.video.empty()) throw Error(ErrorKind::ConfigurationError, "--frames or --video is required");
  if (!o.video.empty()) {
    if (o.extract_cmd.empty()) throw Error(ErrorKind::ConfigurationError, "--video needs --extract-cmd");
    o.frames = extract_frames(o.extract_cmd, o.video, resolve_cache_root(c)).string();
  }
  c.frames_dir = o.frames;
  if (!o.intrinsics.empty()) c.intrinsics_file = o.intrinsics;
  if (!o.detections.empty()) c.detections_file = o.detections;
  if (!o.detector_cmd.empty()) c.detector_cmd = o.detector_cmd;
  c.out_dir = o.out;
}

VideoCache load_cache_for_prep(const PipelineConfig& config) {
  const auto path = cache_path(config);
  if (!fs::is_regular_file(path)) {
    throw Error(ErrorKind::ConfigurationError, "no cache at " + path.string() + "; run precompute first");
  }
  auto cache = cache_from_json(nlohmann::json::parse(read_file(path)));
  if (cache.interval != config.interval) {
    throw Error(ErrorKind::ConfigurationError, "cache was built with interval " + std::to_string(cache.interval) +
                                                   "; rerun precompute with --interval " +
                                                   std::to_string(config.interval));
  }
  return cache;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spatiotemporal prompt construction for video spatial questions", "seetrek"};
  app.require_subcommand(1);
  Options o;

  auto* pre = app.add_subcommand("precompute", "Detections and visual odometry for one video (cached)");
  add_ingest_flags(pre, o);
  add_precompute_flags(pre, o);
  add_conf_flag(pre, o);

  auto* prep = app.add_subcommand("prep", "Build a prompt bundle for one question from the cache");
  add_ingest_flags(prep, o);
  add_prep_flags(prep, o);
  add_conf_flag(prep, o);

  auto* run = app.add_subcommand("run", "precompute followed by prep");
  add_ingest_flags(run, o);
  add_precompute_flags(run, o);
  add_prep_flags(run, o);
  add_conf_flag(run, o);

  auto* sc = app.add_subcommand("score", "Score predictions against ground truth");
  sc->add_option("--pred", o.pred, "One prediction per line")->required();
  sc->add_option("--truth", o.truth, "One ground-truth answer per line")->required();
  sc->add_option("--type", o.type, "mca | na")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "seetrek: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    if (sc->parsed()) {
      out << score(o.pred, o.truth, parse_score_type(o.type)).dump(2) << "\n";
      return kExitOk;
    }
    finish_config(o);
    if (pre->parsed()) {
      const auto r = precompute(o.config);
      out << r.path.string() << "\n";
    } else if (prep->parsed()) {
      const auto cache = load_cache_for_prep(o.config);
      const auto bundle = answer_prep(cache, o.question, o.config);
      out << bundle.manifest_path.string() << "\n";
    } else if (run->parsed()) {
      const auto r = precompute(o.config);
      const auto bundle = answer_prep(r.cache, o.question, o.config);
      out << bundle.manifest_path.string() << "\n";
    }
    return kExitOk;
  } catch (const Error& e) {
    err << "seetrek: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "seetrek: internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

}  // namespace trek
