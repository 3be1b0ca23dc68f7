#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "trek/odometry.hpp"
#include "trek/render.hpp"
#include "trek/sampling.hpp"

namespace trek {

/// Instruction sentences prepended to every question. Overridable per model family.
struct PromptTemplates {
  std::string universal =
      "Each video frame has its serial number in the top-right corner. "
      "The highlight color mark of frame matches the color in the spatial map, indicating its position.";
  std::string trajectory_views =
      "Both 2D (bird's-eye) and 3D views illustrate the camera's spatial trajectory, "
      "with color encoding time progression.";
  std::string points =
      "Points represent the camera's relative positions; the number of points reflects only spatial relationships.";
};

struct PointEntry {
  int rank = 0;
  std::int64_t timestep = 0;
  std::array<std::string, 3> text;  // fixed two-decimal coordinates
  std::array<double, 3> value{};    // the same numbers as parsed back from `text`
};

struct PointList {
  std::vector<PointEntry> entries;

  /// "(x, y, z)" per point joined by "; ".
  std::string serialize() const;
};

/// Two decimals, ties rounded away from zero on the decimal expansion
/// (1.005 -> "1.01"). Never prints "-0.00".
std::string format_coordinate(double v);

/// World positions at the selected timesteps in selection order. Throws MissingPose.
PointList format_points(const Trajectory& traj, const KeyframeSelection& selected);

/// universal + trajectory views + points template + serialized points + "\n" + question.
/// Throws EmptyQuestion.
std::string build_prompt(const PointList& points, std::string_view question, const PromptTemplates& templates = {});

struct BundleMeta {
  int interval = 4;
  Strategy strategy = Strategy::BalancedTopK;
  std::vector<bool> flags;
};

struct PromptBundle {
  std::filesystem::path directory;
  std::vector<std::filesystem::path> keyframes;
  std::filesystem::path bev;
  std::filesystem::path plot3d;
  std::filesystem::path prompt;
  std::filesystem::path manifest_path;
  nlohmann::ordered_json manifest;
};

inline constexpr std::string_view kBevFile = "bev.png";
inline constexpr std::string_view kPlot3dFile = "traj3d.png";
inline constexpr std::string_view kPromptFile = "prompt.txt";
inline constexpr std::string_view kManifestFile = "manifest.json";
std::string keyframe_file(int rank);

nlohmann::ordered_json build_manifest(std::span<const EncodedKeyframe> keyframes, const PointList& points,
                                      const BundleMeta& meta);

/// Writes keyframe_<rank>.png, bev.png, traj3d.png, prompt.txt and
/// manifest.json. Every file goes through a temporary name and a rename;
/// on failure nothing from this call is left behind. Throws WriteError.
PromptBundle write_bundle(std::span<const EncodedKeyframe> keyframes, const RenderedImage& bev,
                          const RenderedImage& plot3d, const std::string& prompt, const PointList& points,
                          const BundleMeta& meta, const std::filesystem::path& out_dir);

}  // namespace trek
