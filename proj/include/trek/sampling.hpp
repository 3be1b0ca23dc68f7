#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "trek/detection.hpp"

namespace trek {

enum class Strategy { TopK, TemporalTopK, BalancedTopK };

std::string_view to_string(Strategy s);
/// Accepts "topk", "temporal_topk", "balanced_topk"; throws ConfigurationError.
Strategy parse_strategy(std::string_view name);

struct FrameClasses {
  std::int64_t timestep = 0;
  ClassSet classes;
};

using ClassTimeline = std::vector<FrameClasses>;

ClassTimeline class_timeline(const DetectionTimeline& timeline, double conf_threshold = kDefaultConfThreshold);

struct ValidInterval {
  std::int64_t t_s = 0;
  std::int64_t t_e = 0;

  friend bool operator==(const ValidInterval&, const ValidInterval&) = default;
};

struct KeyframeSelection {
  std::vector<std::int64_t> timesteps;  // ascending
  std::set<std::string> accumulated_classes;
  Strategy strategy = Strategy::BalancedTopK;
};

/// First and last timesteps with a non-empty class set; the full range when
/// nothing was detected anywhere.
ValidInterval trim_span(const ClassTimeline& timeline);

/// Sizes of `parts` contiguous runs covering `n` items; sizes differ by at
/// most one and earlier runs take the remainder.
std::vector<std::size_t> segment_sizes(std::size_t n, std::size_t parts);

KeyframeSelection select_topk(const ClassTimeline& timeline, ValidInterval interval, int k);
KeyframeSelection select_temporal_topk(const ClassTimeline& timeline, ValidInterval interval, int k);

/// Global class-count argmax (earliest on ties) seeds the pool; the interval is
/// cut into k-1 contiguous runs and each run contributes the entry minimising
/// (overlap with pool, -class count, timestep). The argmax entry is removed
/// from its run; a run left with no unselected entry borrows the nearest
/// unselected entry by timestep, earlier on ties.
KeyframeSelection select_balanced_topk(const ClassTimeline& timeline, ValidInterval interval, int k);

KeyframeSelection select_keyframes(Strategy strategy, const ClassTimeline& timeline, ValidInterval interval, int k);

}  // namespace trek
