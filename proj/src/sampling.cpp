#include "trek/sampling.hpp"

#include <algorithm>
#include <limits>
#include <tuple>

#include "trek/error.hpp"

namespace trek {

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::TopK: return "topk";
    case Strategy::TemporalTopK: return "temporal_topk";
    case Strategy::BalancedTopK: return "balanced_topk";
  }
  return "balanced_topk";
}

Strategy parse_strategy(std::string_view name) {
  if (name == "topk") return Strategy::TopK;
  if (name == "temporal_topk") return Strategy::TemporalTopK;
  if (name == "balanced_topk") return Strategy::BalancedTopK;
  throw Error(ErrorKind::ConfigurationError, "unknown strategy '" + std::string(name) + "'");
}

ClassTimeline class_timeline(const DetectionTimeline& timeline, double conf_threshold) {
  ClassTimeline out;
  out.reserve(timeline.size());
  for (const auto& e : timeline.entries()) out.push_back({e.timestep, class_set(e.detections, conf_threshold)});
  return out;
}

ValidInterval trim_span(const ClassTimeline& timeline) {
  if (timeline.empty()) throw Error(ErrorKind::NoFrames, "empty detection timeline");
  auto first = std::find_if(timeline.begin(), timeline.end(), [](const FrameClasses& f) { return f.classes.count() > 0; });
  if (first == timeline.end()) return {timeline.front().timestep, timeline.back().timestep};
  auto last = std::find_if(timeline.rbegin(), timeline.rend(), [](const FrameClasses& f) { return f.classes.count() > 0; });
  return {first->timestep, last->timestep};
}

std::vector<std::size_t> segment_sizes(std::size_t n, std::size_t parts) {
  std::vector<std::size_t> sizes(parts, parts == 0 ? 0 : n / parts);
  for (std::size_t i = 0; i < (parts == 0 ? 0 : n % parts); ++i) ++sizes[i];
  return sizes;
}

namespace {

std::vector<const FrameClasses*> entries_in(const ClassTimeline& timeline, ValidInterval interval, int k) {
  if (k < 1) throw Error(ErrorKind::InvalidK, "keyframe count must be >= 1");
  std::vector<const FrameClasses*> out;
  for (const auto& f : timeline) {
    if (f.timestep >= interval.t_s && f.timestep <= interval.t_e) out.push_back(&f);
  }
  if (out.empty()) throw Error(ErrorKind::NoFrames, "no frames inside the valid interval");
  return out;
}

KeyframeSelection finish(Strategy strategy, const std::vector<const FrameClasses*>& picked) {
  KeyframeSelection sel;
  sel.strategy = strategy;
  for (const auto* f : picked) {
    sel.timesteps.push_back(f->timestep);
    sel.accumulated_classes.insert(f->classes.labels.begin(), f->classes.labels.end());
  }
  std::sort(sel.timesteps.begin(), sel.timesteps.end());
  return sel;
}

// Earliest entry with the largest class set.
std::size_t richest(const std::vector<const FrameClasses*>& entries, std::size_t begin, std::size_t end) {
  std::size_t best = begin;
  for (std::size_t i = begin + 1; i < end; ++i) {
    if (entries[i]->classes.count() > entries[best]->classes.count()) best = i;
  }
  return best;
}

std::size_t overlap(const std::set<std::string>& a, const std::set<std::string>& pool) {
  std::size_t n = 0;
  for (const auto& label : a) n += pool.count(label);
  return n;
}

}  // namespace

KeyframeSelection select_topk(const ClassTimeline& timeline, ValidInterval interval, int k) {
  auto entries = entries_in(timeline, interval, k);
  std::stable_sort(entries.begin(), entries.end(), [](const FrameClasses* a, const FrameClasses* b) {
    return a->classes.count() > b->classes.count();
  });
  entries.resize(std::min(entries.size(), static_cast<std::size_t>(k)));
  return finish(Strategy::TopK, entries);
}

KeyframeSelection select_temporal_topk(const ClassTimeline& timeline, ValidInterval interval, int k) {
  const auto entries = entries_in(timeline, interval, k);
  if (entries.size() <= static_cast<std::size_t>(k)) return finish(Strategy::TemporalTopK, entries);
  std::vector<const FrameClasses*> picked;
  std::size_t begin = 0;
  for (const auto size : segment_sizes(entries.size(), static_cast<std::size_t>(k))) {
    picked.push_back(entries[richest(entries, begin, begin + size)]);
    begin += size;
  }
  return finish(Strategy::TemporalTopK, picked);
}

KeyframeSelection select_balanced_topk(const ClassTimeline& timeline, ValidInterval interval, int k) {
  const auto entries = entries_in(timeline, interval, k);
  if (entries.size() <= static_cast<std::size_t>(k)) return finish(Strategy::BalancedTopK, entries);

  const std::size_t global = richest(entries, 0, entries.size());
  std::vector<bool> taken(entries.size(), false);
  taken[global] = true;
  std::vector<const FrameClasses*> picked{entries[global]};
  std::set<std::string> pool = entries[global]->classes.labels;

  std::size_t begin = 0;
  for (const auto size : segment_sizes(entries.size(), static_cast<std::size_t>(k - 1))) {
    const std::size_t end = begin + size;
    std::size_t best = entries.size();
    std::tuple<std::size_t, long long, std::int64_t> best_key{};
    for (std::size_t i = begin; i < end; ++i) {
      if (taken[i]) continue;
      const auto& c = entries[i]->classes;
      const std::tuple<std::size_t, long long, std::int64_t> key{overlap(c.labels, pool),
                                                                 -static_cast<long long>(c.count()),
                                                                 entries[i]->timestep};
      if (best == entries.size() || key < best_key) {
        best = i;
        best_key = key;
      }
    }
    if (best == entries.size()) {
      // Run exhausted: borrow the closest free entry outside it.
      const auto lo = entries[begin]->timestep;
      const auto hi = entries[end - 1]->timestep;
      auto best_dist = std::numeric_limits<std::int64_t>::max();
      for (std::size_t i = 0; i < entries.size(); ++i) {
        if (taken[i]) continue;
        const auto t = entries[i]->timestep;
        const auto dist = t < lo ? lo - t : (t > hi ? t - hi : 0);
        if (dist < best_dist) {
          best_dist = dist;
          best = i;
        }
      }
    }
    taken[best] = true;
    picked.push_back(entries[best]);
    pool.insert(entries[best]->classes.labels.begin(), entries[best]->classes.labels.end());
    begin = end;
  }
  return finish(Strategy::BalancedTopK, picked);
}

KeyframeSelection select_keyframes(Strategy strategy, const ClassTimeline& timeline, ValidInterval interval, int k) {
  switch (strategy) {
    case Strategy::TopK: return select_topk(timeline, interval, k);
    case Strategy::TemporalTopK: return select_temporal_topk(timeline, interval, k);
    case Strategy::BalancedTopK: return select_balanced_topk(timeline, interval, k);
  }
  return select_balanced_topk(timeline, interval, k);
}

}  // namespace trek
