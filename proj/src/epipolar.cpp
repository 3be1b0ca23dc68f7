#include "trek/epipolar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Geometry>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "trek/error.hpp"

namespace trek {

namespace {

constexpr std::size_t kMinimalSample = 8;
constexpr double kNullSpaceGap = 1e-12;
constexpr double kManifoldTolerance = 1e-6;

// Similarity that moves the points' centroid to the origin with mean
// distance sqrt(2); conditions the linear system.
Mat3 conditioning(std::span<const Correspondence> pairs, bool use_prev) {
  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  for (const auto& c : pairs) {
    const Vec3& p = use_prev ? c.prev : c.cur;
    centroid += p.hnormalized();
  }
  centroid /= static_cast<double>(pairs.size());
  double mean_dist = 0.0;
  for (const auto& c : pairs) {
    const Vec3& p = use_prev ? c.prev : c.cur;
    mean_dist += (p.hnormalized() - centroid).norm();
  }
  mean_dist /= static_cast<double>(pairs.size());
  if (!(mean_dist > 0.0)) {
    throw Error(ErrorKind::DegenerateConfiguration, "all points coincide");
  }
  const double s = std::sqrt(2.0) / mean_dist;
  Mat3 t;
  t << s, 0, -s * centroid.x(), 0, s, -s * centroid.y(), 0, 0, 1;
  return t;
}

std::size_t required_iterations(std::size_t inliers, std::size_t total, double confidence, int cap) {
  const double w = static_cast<double>(inliers) / static_cast<double>(total);
  const double all_good = std::pow(w, static_cast<double>(kMinimalSample));
  if (all_good >= 1.0) return 1;
  if (all_good <= 0.0) return static_cast<std::size_t>(cap);
  const double n = std::log(1.0 - confidence) / std::log(1.0 - all_good);
  if (!std::isfinite(n) || n > cap) return static_cast<std::size_t>(cap);
  return static_cast<std::size_t>(std::ceil(std::max(n, 1.0)));
}

struct Score {
  std::size_t count = 0;
  double total_error = 0.0;

  double mean() const { return count == 0 ? std::numeric_limits<double>::infinity() : total_error / count; }
  bool better_than(const Score& o) const { return count > o.count || (count == o.count && mean() < o.mean()); }
};

Score score_model(const Mat3& e, std::span<const Correspondence> pairs, double threshold, std::vector<bool>* mask) {
  Score s;
  if (mask) mask->assign(pairs.size(), false);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const double d = sampson_distance(e, pairs[i]);
    if (d < threshold) {
      ++s.count;
      s.total_error += d;
      if (mask) (*mask)[i] = true;
    }
  }
  return s;
}

std::vector<Correspondence> select(std::span<const Correspondence> pairs, const std::vector<bool>& mask) {
  std::vector<Correspondence> out;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (mask[i]) out.push_back(pairs[i]);
  }
  return out;
}

}  // namespace

Vec3 normalize_point(double x, double y, const CameraIntrinsics& k) {
  return {(x - k.cx) / k.fx, (y - k.cy) / k.fy, 1.0};
}

std::vector<Vec3> normalize_points(std::span<const Eigen::Vector2d> points, const CameraIntrinsics& k) {
  std::vector<Vec3> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(normalize_point(p.x(), p.y(), k));
  return out;
}

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

Mat3 estimate_essential_8pt(std::span<const Correspondence> pairs) {
  if (pairs.size() < kMinimalSample) {
    throw Error(ErrorKind::InvalidInput, "eight-point estimation needs at least 8 correspondences");
  }
  const Mat3 t_prev = conditioning(pairs, true);
  const Mat3 t_cur = conditioning(pairs, false);

  const Eigen::Index rows = std::max<Eigen::Index>(9, static_cast<Eigen::Index>(pairs.size()));
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows, 9);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const Vec3 p = t_prev * pairs[i].prev / pairs[i].prev.z();
    const Vec3 q = t_cur * pairs[i].cur / pairs[i].cur.z();
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) a(static_cast<Eigen::Index>(i), 3 * r + c) = q(r) * p(c);
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  if (!(s(0) > 0.0) || (s(7) - s(8)) / s(0) < kNullSpaceGap) {
    throw Error(ErrorKind::DegenerateConfiguration, "epipolar system has no unique null vector");
  }
  const Eigen::VectorXd v = svd.matrixV().col(8);
  Mat3 e_conditioned;
  e_conditioned << v(0), v(1), v(2), v(3), v(4), v(5), v(6), v(7), v(8);
  return project_to_essential_manifold(t_cur.transpose() * e_conditioned * t_prev);
}

double sampson_distance(const Mat3& e, const Correspondence& c) {
  const Vec3 p = c.prev / c.prev.z();
  const Vec3 q = c.cur / c.cur.z();
  const Vec3 ep = e * p;
  const Vec3 etq = e.transpose() * q;
  const double denom = ep.x() * ep.x() + ep.y() * ep.y() + etq.x() * etq.x() + etq.y() * etq.y();
  if (!(denom > 0.0)) return std::numeric_limits<double>::infinity();
  return std::abs(q.dot(ep)) / std::sqrt(denom);
}

RansacResult ransac_essential(std::span<const Correspondence> pairs, const RansacParams& params) {
  const std::size_t n = pairs.size();
  if (n < kMinimalSample) {
    throw Error(ErrorKind::InsufficientMatches, std::to_string(n) + " matches, need 8");
  }
  std::mt19937_64 gen(params.seed);
  std::array<std::size_t, kMinimalSample> sample{};
  std::array<Correspondence, kMinimalSample> subset;

  Mat3 best_e = Mat3::Zero();
  Score best;
  bool found = false;
  std::size_t needed = static_cast<std::size_t>(params.max_iters);
  int iter = 0;
  for (; iter < params.max_iters && static_cast<std::size_t>(iter) < needed; ++iter) {
    for (std::size_t k = 0; k < kMinimalSample; ++k) {
      std::size_t idx;
      do {
        idx = static_cast<std::size_t>(gen() % n);
      } while (std::find(sample.begin(), sample.begin() + static_cast<std::ptrdiff_t>(k), idx) !=
               sample.begin() + static_cast<std::ptrdiff_t>(k));
      sample[k] = idx;
      subset[k] = pairs[idx];
    }
    Mat3 e;
    try {
      e = estimate_essential_8pt(subset);
    } catch (const Error& err) {
      if (err.kind() == ErrorKind::DegenerateConfiguration) continue;
      throw;
    }
    const Score s = score_model(e, pairs, params.threshold, nullptr);
    if (!found || s.better_than(best)) {
      found = true;
      best = s;
      best_e = e;
      needed = required_iterations(best.count, n, params.confidence, params.max_iters);
    }
  }
  if (!found || best.count < kMinimalSample) {
    throw Error(ErrorKind::NoConsensus, "best model has " + std::to_string(best.count) + " inliers");
  }

  RansacResult result;
  result.iterations = iter;
  result.essential = best_e;
  score_model(best_e, pairs, params.threshold, &result.inliers);
  result.inlier_count = best.count;

  // Re-fit on the consensus set while it does not shrink.
  for (int round = 0; round < 5; ++round) {
    Mat3 refit;
    try {
      refit = estimate_essential_8pt(select(pairs, result.inliers));
    } catch (const Error&) {
      break;
    }
    std::vector<bool> mask;
    const Score s = score_model(refit, pairs, params.threshold, &mask);
    if (s.count < result.inlier_count) break;
    const bool unchanged = mask == result.inliers;
    result.essential = refit;
    result.inliers = std::move(mask);
    result.inlier_count = s.count;
    if (unchanged) break;
  }
  return result;
}

Mat3 project_to_essential_manifold(const Mat3& e) {
  if (e.isZero(0.0)) throw Error(ErrorKind::InvalidInput, "cannot project the zero matrix");
  Eigen::JacobiSVD<Mat3> svd(e, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * Eigen::Vector3d(1.0, 1.0, 0.0).asDiagonal() * svd.matrixV().transpose();
}

std::array<PoseCandidate, 4> decompose_essential(const Mat3& e) {
  Eigen::JacobiSVD<Mat3> svd(e, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 s = svd.singularValues();
  if (!(s(0) > 0.0) || (s(0) - s(1)) / s(0) > kManifoldTolerance || s(2) / s(0) > kManifoldTolerance) {
    throw Error(ErrorKind::NotEssential, "singular values are not proportional to (1, 1, 0)");
  }
  Mat3 u = svd.matrixU();
  Mat3 v = svd.matrixV();
  if (u.determinant() < 0.0) u = -u;
  if (v.determinant() < 0.0) v = -v;
  Mat3 w;
  w << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  const Mat3 r1 = u * w * v.transpose();
  const Mat3 r2 = u * w.transpose() * v.transpose();
  const Vec3 t = u.col(2).normalized();
  return {PoseCandidate{r1, t}, PoseCandidate{r1, -t}, PoseCandidate{r2, t}, PoseCandidate{r2, -t}};
}

Vec3 triangulate(const PoseCandidate& pose, const Correspondence& c, bool* ok) {
  Eigen::Matrix<double, 3, 4> p1 = Eigen::Matrix<double, 3, 4>::Zero();
  p1.leftCols<3>() = Mat3::Identity();
  Eigen::Matrix<double, 3, 4> p2;
  p2.leftCols<3>() = pose.rotation;
  p2.col(3) = pose.translation;

  const Eigen::Vector2d x1 = c.prev.hnormalized();
  const Eigen::Vector2d x2 = c.cur.hnormalized();
  Eigen::Matrix4d a;
  a.row(0) = x1.x() * p1.row(2) - p1.row(0);
  a.row(1) = x1.y() * p1.row(2) - p1.row(1);
  a.row(2) = x2.x() * p2.row(2) - p2.row(0);
  a.row(3) = x2.y() * p2.row(2) - p2.row(1);
  Eigen::JacobiSVD<Eigen::Matrix4d> svd(a, Eigen::ComputeFullV);
  const Eigen::Vector4d x = svd.matrixV().col(3);
  const bool finite = std::abs(x(3)) > 1e-12 * x.head<3>().norm();
  if (ok) *ok = finite;
  if (!finite) return Vec3::Constant(std::numeric_limits<double>::infinity());
  return x.head<3>() / x(3);
}

std::size_t count_in_front(const PoseCandidate& pose, std::span<const Correspondence> pairs) {
  std::size_t count = 0;
  for (const auto& c : pairs) {
    bool ok = false;
    const Vec3 x = triangulate(pose, c, &ok);
    if (!ok) continue;
    const Vec3 in_cur = pose.rotation * x + pose.translation;
    if (x.z() > 0.0 && in_cur.z() > 0.0) ++count;
  }
  return count;
}

RelativePose cheirality_select(std::span<const PoseCandidate> candidates, std::span<const Correspondence> inliers) {
  if (candidates.empty()) return RelativePose::identity_flagged();
  std::size_t best = 0, best_count = 0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const std::size_t count = count_in_front(candidates[i], inliers);
    if (i == 0 || count > best_count) {
      best = i;
      best_count = count;
    }
  }
  const double needed = std::max(8.0, 0.5 * static_cast<double>(inliers.size()));
  if (static_cast<double>(best_count) < needed) {
    auto flagged = RelativePose::identity_flagged();
    flagged.inlier_count = inliers.size();
    return flagged;
  }
  const auto& c = candidates[best];
  RelativePose rel;
  rel.rotation = c.rotation.transpose();
  rel.translation = -(c.rotation.transpose() * c.translation);
  rel.inlier_count = inliers.size();
  return rel;
}

WorldPose chain_pose(const WorldPose& prev, const RelativePose& rel) {
  if (rel.flagged) return prev;
  return {prev.rotation * rel.rotation, prev.rotation * rel.translation + prev.position};
}

RelativePose estimate_relative_pose(std::span<const Correspondence> pairs, const RansacParams& params) {
  try {
    const auto ransac = ransac_essential(pairs, params);
    const auto inliers = select(pairs, ransac.inliers);
    const auto candidates = decompose_essential(ransac.essential);
    return cheirality_select(candidates, inliers);
  } catch (const Error& e) {
    switch (e.kind()) {
      case ErrorKind::InsufficientMatches:
      case ErrorKind::NoConsensus:
      case ErrorKind::DegenerateConfiguration:
      case ErrorKind::NotEssential:
        return RelativePose::identity_flagged();
      default:
        throw;
    }
  }
}

}  // namespace trek
