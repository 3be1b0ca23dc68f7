#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "trek/epipolar.hpp"
#include "trek/frame_ingest.hpp"
#include "trek/orb.hpp"

namespace trek {

struct VoConfig {
  OrbParams orb;
  RansacParams ransac;
  unsigned workers = 0;  // 0: one per hardware thread
};

struct TrajectoryStep {
  std::int64_t timestep = 0;
  WorldPose pose;
  bool flagged = false;  // the step into this pose failed and was held
};

/// World poses of the subsampled frames; the first is the identity at the origin.
struct Trajectory {
  std::vector<TrajectoryStep> steps;

  std::size_t size() const { return steps.size(); }
  const TrajectoryStep* find(std::int64_t timestep) const;
  std::vector<bool> flags() const;
};

/// Seed for the RANSAC run of pair `pair_index`, derived from the base seed so
/// results do not depend on scheduling.
std::uint64_t pair_seed(std::uint64_t base, std::size_t pair_index);

std::vector<Correspondence> to_correspondences(const MatchSet& matches, const CameraIntrinsics& k);

/// ORB -> match -> RANSAC -> decompose -> cheirality per consecutive pair, then
/// a sequential fold of the relative poses. Throws InsufficientFrames for < 2.
Trajectory run_vo(std::span<const GrayFrame> frames, const CameraIntrinsics& k, const VoConfig& config = {});

/// Same fold but also returns the per-pair relative poses.
Trajectory run_vo(std::span<const GrayFrame> frames, const CameraIntrinsics& k, const VoConfig& config,
                  std::vector<RelativePose>* relatives);

}  // namespace trek
