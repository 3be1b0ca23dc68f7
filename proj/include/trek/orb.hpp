#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "trek/frame_ingest.hpp"

namespace trek {

/// Keypoints keep this distance (pixels) from every image border so the
/// orientation patch and rotated BRIEF samples stay inside the image.
inline constexpr int kKeypointBorder = 16;
inline constexpr int kMinFastImageSide = 32;
inline constexpr int kBriefPairs = 256;
inline constexpr int kBriefPatchRadius = 15;  // 31x31 patch
inline constexpr int kBriefAngleBins = 30;
inline constexpr std::uint64_t kBriefPatternSeed = 0x5EE7'12E4'0B1F'2024ull;

struct OrbParams {
  int fast_threshold = 20;
  int arc_length = 12;
  int max_keypoints = 2000;
  int orientation_radius = 15;
  double ratio = 0.75;
  int max_hamming = 64;
};

struct Keypoint {
  int x = 0;
  int y = 0;
  int score = 0;
  double angle = 0.0;  // radians in [0, 2pi)

  friend bool operator==(const Keypoint&, const Keypoint&) = default;
};

struct BinaryDescriptor {
  std::array<std::uint64_t, 4> words{};

  bool bit(int k) const { return (words[static_cast<std::size_t>(k >> 6)] >> (k & 63)) & 1u; }
  void set_bit(int k) { words[static_cast<std::size_t>(k >> 6)] |= std::uint64_t{1} << (k & 63); }

  friend bool operator==(const BinaryDescriptor&, const BinaryDescriptor&) = default;
};

int hamming(const BinaryDescriptor& a, const BinaryDescriptor& b);

struct Features {
  std::vector<Keypoint> keypoints;
  std::vector<BinaryDescriptor> descriptors;
};

struct Match {
  int prev_index = 0;
  int cur_index = 0;
  double prev_x = 0, prev_y = 0;
  double cur_x = 0, cur_y = 0;
  int distance = 0;
};

struct MatchSet {
  std::vector<Match> pairs;
  std::size_t count() const { return pairs.size(); }
};

/// 16 offsets of the radius-3 Bresenham circle, clockwise from 12 o'clock.
const std::array<std::array<int, 2>, 16>& fast_circle();

/// FAST-n with threshold `tau`: a pixel is a corner when some circular run of
/// `arc_length` circle pixels is entirely brighter than f(p)+tau or entirely
/// darker than f(p)-tau. Score is the largest |f(q)-f(p)| sum over such runs.
/// 3x3 non-maximum suppression (ties resolved toward the earlier raster
/// position), border filter, then the strongest `max_keypoints` are kept,
/// ordered by score descending then raster order. Throws ImageTooSmall.
std::vector<Keypoint> detect_fast(const GrayFrame& gray, int tau, int arc_length, int max_keypoints);

/// Intensity-centroid angle over the disc of `radius` around the keypoint.
double orientation(const GrayFrame& gray, const Keypoint& kp, int radius);

struct BriefPair {
  std::array<int, 2> a;
  std::array<int, 2> b;
};

/// Fixed sampling pattern: offsets drawn from N(0, (31/5)^2) with a seeded
/// 64-bit Mersenne Twister, pulled inside the radius-15 disc.
const std::array<BriefPair, kBriefPairs>& brief_pattern();

/// Index of the 12-degree bin used to steer the pattern.
int angle_bin(double angle);

BinaryDescriptor describe_brief(const GrayFrame& gray, const Keypoint& kp);

/// Detect, orient and describe in one pass.
Features extract_features(const GrayFrame& gray, const OrbParams& params = {});

/// Mutual nearest neighbours by Hamming distance; a pair survives when its
/// distance is <= max_hamming and passes the ratio test in both directions.
MatchSet match_descriptors(const Features& prev, const Features& cur, double ratio, int max_hamming);

}  // namespace trek
