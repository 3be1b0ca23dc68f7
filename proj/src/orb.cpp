#include "trek/orb.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "trek/error.hpp"

namespace trek {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

using RotatedPattern = std::array<std::array<BriefPair, kBriefPairs>, kBriefAngleBins>;

std::array<int, 2> draw_offset(std::mt19937_64& gen) {
  constexpr double sigma = 31.0 / 5.0;
  auto uniform = [&gen] { return static_cast<double>(gen() >> 11) * 0x1.0p-53; };
  for (;;) {
    double u1 = uniform();
    const double u2 = uniform();
    if (u1 <= 0.0) continue;
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const int x = static_cast<int>(std::lround(sigma * radius * std::cos(kTwoPi * u2)));
    const int y = static_cast<int>(std::lround(sigma * radius * std::sin(kTwoPi * u2)));
    if (x * x + y * y <= kBriefPatchRadius * kBriefPatchRadius) return {x, y};
  }
}

std::array<BriefPair, kBriefPairs> make_pattern() {
  std::mt19937_64 gen(kBriefPatternSeed);
  std::array<BriefPair, kBriefPairs> pattern{};
  for (auto& pair : pattern) {
    do {
      pair.a = draw_offset(gen);
      pair.b = draw_offset(gen);
    } while (pair.a == pair.b);
  }
  return pattern;
}

const RotatedPattern& rotated_patterns() {
  static const RotatedPattern table = [] {
    RotatedPattern t{};
    const auto& base = brief_pattern();
    for (int bin = 0; bin < kBriefAngleBins; ++bin) {
      const double angle = kTwoPi * bin / kBriefAngleBins;
      const double c = std::cos(angle), s = std::sin(angle);
      auto rot = [c, s](std::array<int, 2> p) {
        return std::array<int, 2>{static_cast<int>(std::lround(c * p[0] - s * p[1])),
                                  static_cast<int>(std::lround(s * p[0] + c * p[1]))};
      };
      for (int k = 0; k < kBriefPairs; ++k) {
        t[static_cast<std::size_t>(bin)][static_cast<std::size_t>(k)] = {rot(base[static_cast<std::size_t>(k)].a),
                                                                        rot(base[static_cast<std::size_t>(k)].b)};
      }
    }
    return t;
  }();
  return table;
}

bool has_run(std::uint32_t mask16, int n) {
  const std::uint32_t doubled = mask16 | (mask16 << 16);
  const std::uint32_t want = (1u << n) - 1u;
  for (int s = 0; s < 16; ++s) {
    if (((doubled >> s) & want) == want) return true;
  }
  return false;
}

// Largest run sum over windows of n circle pixels whose bits are all set.
int best_window(std::uint32_t mask16, const std::array<int, 32>& abs_prefix, int n) {
  const std::uint32_t doubled = mask16 | (mask16 << 16);
  const std::uint32_t want = (1u << n) - 1u;
  int best = 0;
  for (int s = 0; s < 16; ++s) {
    if (((doubled >> s) & want) == want) {
      const int sum = abs_prefix[static_cast<std::size_t>(s + n)] - abs_prefix[static_cast<std::size_t>(s)];
      best = std::max(best, sum);
    }
  }
  return best;
}

}  // namespace

int hamming(const BinaryDescriptor& a, const BinaryDescriptor& b) {
  int d = 0;
  for (std::size_t i = 0; i < a.words.size(); ++i) d += std::popcount(a.words[i] ^ b.words[i]);
  return d;
}

const std::array<std::array<int, 2>, 16>& fast_circle() {
  static const std::array<std::array<int, 2>, 16> circle = {{{0, -3}, {1, -3}, {2, -2}, {3, -1},
                                                             {3, 0}, {3, 1}, {2, 2}, {1, 3},
                                                             {0, 3}, {-1, 3}, {-2, 2}, {-3, 1},
                                                             {-3, 0}, {-3, -1}, {-2, -2}, {-1, -3}}};
  return circle;
}

std::vector<Keypoint> detect_fast(const GrayFrame& gray, int tau, int arc_length, int max_keypoints) {
  if (gray.width < kMinFastImageSide || gray.height < kMinFastImageSide) {
    throw Error(ErrorKind::ImageTooSmall, "FAST needs at least 32x32 pixels");
  }
  if (arc_length < 9 || arc_length > 16 || tau < 1) {
    throw Error(ErrorKind::InvalidInput, "FAST needs tau >= 1 and arc length in [9, 16]");
  }
  const int w = gray.width, h = gray.height;
  const auto& circle = fast_circle();
  std::array<std::ptrdiff_t, 16> offsets{};
  for (std::size_t i = 0; i < 16; ++i) offsets[i] = circle[i][1] * static_cast<std::ptrdiff_t>(w) + circle[i][0];

  // Any arc of n consecutive circle pixels covers at least n/4 of the compass points.
  const int compass_needed = arc_length / 4;
  std::vector<int> score(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0);
  const std::uint8_t* img = gray.pixels.data();

  for (int y = 3; y < h - 3; ++y) {
    for (int x = 3; x < w - 3; ++x) {
      const std::ptrdiff_t idx = static_cast<std::ptrdiff_t>(y) * w + x;
      const int center = img[idx];
      const int hi = center + tau, lo = center - tau;
      int bright_compass = 0, dark_compass = 0;
      for (std::size_t c = 0; c < 16; c += 4) {
        const int v = img[idx + offsets[c]];
        bright_compass += v > hi;
        dark_compass += v < lo;
      }
      if (bright_compass < compass_needed && dark_compass < compass_needed) continue;

      std::uint32_t bright = 0, dark = 0;
      std::array<int, 32> prefix{};
      for (std::size_t i = 0; i < 16; ++i) {
        const int v = img[idx + offsets[i]];
        bright |= static_cast<std::uint32_t>(v > hi) << i;
        dark |= static_cast<std::uint32_t>(v < lo) << i;
        const int a = std::abs(v - center);
        prefix[i + 1] = prefix[i] + a;
      }
      for (std::size_t i = 16; i < 31; ++i) prefix[i + 1] = prefix[i] + (prefix[i - 15] - prefix[i - 16]);

      int s = 0;
      if (has_run(bright, arc_length)) s = best_window(bright, prefix, arc_length);
      if (has_run(dark, arc_length)) s = std::max(s, best_window(dark, prefix, arc_length));
      score[static_cast<std::size_t>(idx)] = s;
    }
  }

  std::vector<Keypoint> out;
  for (int y = kKeypointBorder; y < h - kKeypointBorder; ++y) {
    for (int x = kKeypointBorder; x < w - kKeypointBorder; ++x) {
      const int s = score[static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)];
      if (s == 0) continue;
      bool keep = true;
      for (int dy = -1; dy <= 1 && keep; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const int q = score[static_cast<std::size_t>(y + dy) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x + dx)];
          const bool earlier = dy < 0 || (dy == 0 && dx < 0);
          if (q > s || (q == s && earlier)) {
            keep = false;
            break;
          }
        }
      }
      if (keep) out.push_back({x, y, s, 0.0});
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const Keypoint& a, const Keypoint& b) { return a.score > b.score; });
  if (max_keypoints >= 0 && out.size() > static_cast<std::size_t>(max_keypoints)) {
    out.resize(static_cast<std::size_t>(max_keypoints));
  }
  return out;
}

double orientation(const GrayFrame& gray, const Keypoint& kp, int radius) {
  std::int64_t m10 = 0, m01 = 0;
  const int r2 = radius * radius;
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      if (dx * dx + dy * dy > r2) continue;
      const int v = gray.at(kp.x + dx, kp.y + dy);
      m10 += static_cast<std::int64_t>(dx) * v;
      m01 += static_cast<std::int64_t>(dy) * v;
    }
  }
  if (m10 == 0 && m01 == 0) return 0.0;
  double theta = std::atan2(static_cast<double>(m01), static_cast<double>(m10));
  if (theta < 0.0) theta += kTwoPi;
  return theta >= kTwoPi ? 0.0 : theta;
}

const std::array<BriefPair, kBriefPairs>& brief_pattern() {
  static const auto pattern = make_pattern();
  return pattern;
}

int angle_bin(double angle) {
  const long bin = std::lround(angle / (kTwoPi / kBriefAngleBins));
  return static_cast<int>(((bin % kBriefAngleBins) + kBriefAngleBins) % kBriefAngleBins);
}

BinaryDescriptor describe_brief(const GrayFrame& gray, const Keypoint& kp) {
  const auto& pattern = rotated_patterns()[static_cast<std::size_t>(angle_bin(kp.angle))];
  BinaryDescriptor d;
  for (int k = 0; k < kBriefPairs; ++k) {
    const auto& pair = pattern[static_cast<std::size_t>(k)];
    const int va = gray.at(kp.x + pair.a[0], kp.y + pair.a[1]);
    const int vb = gray.at(kp.x + pair.b[0], kp.y + pair.b[1]);
    if (va < vb) d.set_bit(k);
  }
  return d;
}

Features extract_features(const GrayFrame& gray, const OrbParams& params) {
  Features f;
  f.keypoints = detect_fast(gray, params.fast_threshold, params.arc_length, params.max_keypoints);
  f.descriptors.reserve(f.keypoints.size());
  for (auto& kp : f.keypoints) {
    kp.angle = orientation(gray, kp, params.orientation_radius);
    f.descriptors.push_back(describe_brief(gray, kp));
  }
  return f;
}

MatchSet match_descriptors(const Features& prev, const Features& cur, double ratio, int max_hamming) {
  MatchSet out;
  const std::size_t n = prev.descriptors.size(), m = cur.descriptors.size();
  if (n == 0 || m == 0) return out;

  constexpr int kNone = std::numeric_limits<int>::max();
  struct Best {
    int index = -1;
    int first = kNone;
    int second = kNone;
    void offer(int d, int i) {
      if (d < first) {
        second = first;
        first = d;
        index = i;
      } else if (d < second) {
        second = d;
      }
    }
  };
  std::vector<Best> rows(n), cols(m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const int d = hamming(prev.descriptors[i], cur.descriptors[j]);
      rows[i].offer(d, static_cast<int>(j));
      cols[j].offer(d, static_cast<int>(i));
    }
  }
  auto passes_ratio = [ratio](const Best& b) {
    return b.second == kNone || static_cast<double>(b.first) < ratio * static_cast<double>(b.second);
  };
  for (std::size_t i = 0; i < n; ++i) {
    const Best& row = rows[i];
    const Best& col = cols[static_cast<std::size_t>(row.index)];
    if (col.index != static_cast<int>(i)) continue;
    if (row.first > max_hamming || !passes_ratio(row) || !passes_ratio(col)) continue;
    const auto& kp_prev = prev.keypoints[i];
    const auto& kp_cur = cur.keypoints[static_cast<std::size_t>(row.index)];
    out.pairs.push_back({static_cast<int>(i), row.index, static_cast<double>(kp_prev.x), static_cast<double>(kp_prev.y),
                         static_cast<double>(kp_cur.x), static_cast<double>(kp_cur.y), row.first});
  }
  return out;
}

}  // namespace trek
