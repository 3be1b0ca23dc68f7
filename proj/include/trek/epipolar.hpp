#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "trek/frame_ingest.hpp"
#include "trek/orb.hpp"

namespace trek {

using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;

/// A correspondence between the previous (first) and current (second) view.
/// For normalized coordinates the epipolar constraint reads cur^T E prev = 0.
struct Correspondence {
  Vec3 prev;
  Vec3 cur;
};

struct RansacParams {
  double threshold = 1e-3;  // Sampson distance, normalized image units
  int max_iters = 2000;
  double confidence = 0.999;
  std::uint64_t seed = 0x7ACE'5EED;
};

struct RansacResult {
  Mat3 essential;
  std::vector<bool> inliers;
  std::size_t inlier_count = 0;
  int iterations = 0;
};

/// Camera motion from the previous frame to the current one: `rotation` and
/// `translation` give the current camera's orientation and (unit) position in
/// the previous camera's frame. A flagged pose is the identity with zero
/// translation and marks a step where estimation failed.
struct RelativePose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
  std::size_t inlier_count = 0;
  bool flagged = false;

  static RelativePose identity_flagged() {
    RelativePose p;
    p.flagged = true;
    return p;
  }
};

struct WorldPose {
  Mat3 rotation = Mat3::Identity();
  Vec3 position = Vec3::Zero();
};

/// One solution of E = [t]x R: maps previous-camera points into the current
/// camera as X_cur = R X_prev + t.
struct PoseCandidate {
  Mat3 rotation;
  Vec3 translation;
};

/// K^-1 [x y 1]^T for each pixel coordinate.
std::vector<Vec3> normalize_points(std::span<const Eigen::Vector2d> points, const CameraIntrinsics& k);
Vec3 normalize_point(double x, double y, const CameraIntrinsics& k);

/// Linear eight-point estimate from the stacked epipolar constraints, projected
/// onto the essential manifold. Throws InvalidInput for fewer than eight
/// pairs and DegenerateConfiguration when the null space is not 1-D.
Mat3 estimate_essential_8pt(std::span<const Correspondence> pairs);

/// First-order geometric epipolar error (a distance, not its square).
double sampson_distance(const Mat3& e, const Correspondence& c);

/// Throws InsufficientMatches (< 8 pairs) or NoConsensus (< 8 inliers).
RansacResult ransac_essential(std::span<const Correspondence> pairs, const RansacParams& params);

/// U diag(1,1,0) V^T. Throws InvalidInput for the zero matrix.
Mat3 project_to_essential_manifold(const Mat3& e);

/// Four (R, t) pairs with det R = +1 and |t| = 1, ordered
/// (R1,+t), (R1,-t), (R2,+t), (R2,-t). Throws NotEssential off the manifold.
std::array<PoseCandidate, 4> decompose_essential(const Mat3& e);

Mat3 skew(const Vec3& v);

/// Linear DLT between [I|0] and [R|t]; returns the point in the first camera.
/// `ok` is false when the homogeneous solution lies at infinity.
Vec3 triangulate(const PoseCandidate& pose, const Correspondence& c, bool* ok = nullptr);

/// Number of correspondences triangulating in front of both cameras.
std::size_t count_in_front(const PoseCandidate& pose, std::span<const Correspondence> pairs);

/// Picks the candidate with the most points in front of both cameras and
/// expresses it as camera motion. Returns a flagged identity when the winner
/// scores below max(8, half the correspondences).
RelativePose cheirality_select(std::span<const PoseCandidate> candidates, std::span<const Correspondence> inliers);

/// R_w = R_prev R_rel, T_w = R_prev T_rel + T_prev; flagged steps are no-ops.
WorldPose chain_pose(const WorldPose& prev, const RelativePose& rel);

/// Full estimation chain for one frame pair, with every failure mode folded
/// into a flagged identity.
RelativePose estimate_relative_pose(std::span<const Correspondence> pairs, const RansacParams& params);

}  // namespace trek
