#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "trek/detection.hpp"
#include "trek/frame_ingest.hpp"
#include "trek/odometry.hpp"
#include "trek/prompt.hpp"
#include "trek/sampling.hpp"

namespace trek {

inline constexpr int kDefaultInterval = 4;
inline constexpr int kDefaultKeyframes = 8;
inline constexpr int kCacheSchemaVersion = 1;
inline constexpr const char* kCacheEnvVar = "SEETREK_CACHE_DIR";
inline constexpr const char* kCacheFile = "cache.json";

struct PipelineConfig {
  std::filesystem::path frames_dir;
  int interval = kDefaultInterval;
  int keyframes = kDefaultKeyframes;
  Strategy strategy = Strategy::BalancedTopK;
  double conf_threshold = kDefaultConfThreshold;
  VoConfig vo;
  std::optional<std::filesystem::path> intrinsics_file;
  std::optional<std::filesystem::path> detections_file;
  std::optional<std::string> detector_cmd;
  std::filesystem::path out_dir = "bundle";
  /// Empty: SEETREK_CACHE_DIR, then ".trek-cache" in the working directory.
  std::filesystem::path cache_root;
  PromptTemplates templates;

  /// Throws ConfigurationError on N < 1, K < 1, or a threshold out of range.
  void validate() const;
};

struct VideoCache {
  int schema_version = kCacheSchemaVersion;
  std::string fingerprint;
  std::string content_hash;
  int interval = kDefaultInterval;
  int width = 0;
  int height = 0;
  CameraIntrinsics intrinsics;
  std::vector<FrameFile> frames;
  DetectionTimeline detections;
  Trajectory trajectory;
};

nlohmann::ordered_json cache_to_json(const VideoCache& cache);
/// Throws SchemaViolation when the document does not match the cache layout.
VideoCache cache_from_json(const nlohmann::json& doc);

std::filesystem::path resolve_cache_root(const PipelineConfig& config);
/// Per-video directory under the cache root, keyed by the frames directory.
std::filesystem::path cache_path(const PipelineConfig& config);

/// Hash of the configuration that affects the cached products.
std::string config_fingerprint(const PipelineConfig& config);
/// Hash of the subsampled frames' names and bytes.
std::string content_hash(const std::vector<FrameFile>& frames);

struct PrecomputeResult {
  VideoCache cache;
  bool cache_hit = false;
  std::filesystem::path path;
};

/// Decodes frames, obtains detections (sidecar or detector subprocess), runs
/// VO and persists the cache. Unchanged inputs load the cache instead.
PrecomputeResult precompute(const PipelineConfig& config);

/// Runs `<detector_cmd> --frames DIR --interval N --conf F` and parses its
/// standard output. Throws DetectorFailed on a nonzero exit.
DetectionTimeline run_detector(const std::string& command, const std::filesystem::path& frames_dir, int interval,
                               double conf_threshold);

/// Frames for a container video, produced by an external tool run as
/// `<command> --video FILE --out DIR`. The directory lives under the cache
/// root, keyed by the video's bytes, and is reused once complete.
/// Throws DecodeError when the tool fails.
std::filesystem::path extract_frames(const std::string& command, const std::filesystem::path& video,
                                     const std::filesystem::path& cache_root);

/// Selection, encoding and bundle writing from a cache alone.
PromptBundle answer_prep(const VideoCache& cache, const std::string& question, const PipelineConfig& config);

enum class ScoreType { Mca, Na };
ScoreType parse_score_type(std::string_view name);

/// Per-item and mean scores over line-aligned prediction and truth files.
/// Throws AlignmentError when the record counts differ.
nlohmann::ordered_json score(const std::filesystem::path& pred_file, const std::filesystem::path& truth_file,
                             ScoreType type);
nlohmann::ordered_json score_records(const std::vector<std::string>& preds, const std::vector<std::string>& truths,
                                     ScoreType type);

}  // namespace trek
