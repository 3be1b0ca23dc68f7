#include "trek/odometry.hpp"

#include "trek/error.hpp"
#include "trek/parallel.hpp"

namespace trek {

const TrajectoryStep* Trajectory::find(std::int64_t timestep) const {
  for (const auto& s : steps) {
    if (s.timestep == timestep) return &s;
  }
  return nullptr;
}

std::vector<bool> Trajectory::flags() const {
  std::vector<bool> out;
  out.reserve(steps.size());
  for (const auto& s : steps) out.push_back(s.flagged);
  return out;
}

std::uint64_t pair_seed(std::uint64_t base, std::size_t pair_index) {
  // splitmix64 finaliser
  std::uint64_t z = base + 0x9E3779B97F4A7C15ull * (static_cast<std::uint64_t>(pair_index) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::vector<Correspondence> to_correspondences(const MatchSet& matches, const CameraIntrinsics& k) {
  std::vector<Correspondence> out;
  out.reserve(matches.count());
  for (const auto& m : matches.pairs) {
    out.push_back({normalize_point(m.prev_x, m.prev_y, k), normalize_point(m.cur_x, m.cur_y, k)});
  }
  return out;
}

Trajectory run_vo(std::span<const GrayFrame> frames, const CameraIntrinsics& k, const VoConfig& config) {
  return run_vo(frames, k, config, nullptr);
}

Trajectory run_vo(std::span<const GrayFrame> frames, const CameraIntrinsics& k, const VoConfig& config,
                  std::vector<RelativePose>* relatives) {
  if (frames.size() < 2) throw Error(ErrorKind::InsufficientFrames, "visual odometry needs at least 2 frames");
  const unsigned workers = config.workers == 0 ? default_workers() : config.workers;

  std::vector<Features> features(frames.size());
  parallel_for(frames.size(), workers, [&](std::size_t i) { features[i] = extract_features(frames[i], config.orb); });

  std::vector<RelativePose> rel(frames.size() - 1);
  parallel_for(rel.size(), workers, [&](std::size_t i) {
    const auto matches = match_descriptors(features[i], features[i + 1], config.orb.ratio, config.orb.max_hamming);
    const auto pairs = to_correspondences(matches, k);
    RansacParams params = config.ransac;
    params.seed = pair_seed(config.ransac.seed, i);
    rel[i] = estimate_relative_pose(pairs, params);
  });

  Trajectory traj;
  traj.steps.push_back({frames[0].timestep, WorldPose{}, false});
  for (std::size_t i = 0; i < rel.size(); ++i) {
    traj.steps.push_back({frames[i + 1].timestep, chain_pose(traj.steps.back().pose, rel[i]), rel[i].flagged});
  }
  if (relatives) *relatives = std::move(rel);
  return traj;
}

}  // namespace trek
