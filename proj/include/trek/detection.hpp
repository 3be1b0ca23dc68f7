#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <set>
#include <string>
#include <vector>

namespace trek {

inline constexpr double kDefaultConfThreshold = 0.25;

struct Detection {
  std::string label;
  double confidence = 0.0;
  std::array<double, 4> bbox{};  // x, y, w, h in source pixels

  friend bool operator==(const Detection&, const Detection&) = default;
};

struct TimelineEntry {
  std::int64_t timestep = 0;
  std::vector<Detection> detections;

  friend bool operator==(const TimelineEntry&, const TimelineEntry&) = default;
};

/// Per-timestep detections, strictly increasing in timestep.
class DetectionTimeline {
 public:
  DetectionTimeline() = default;
  /// Sorts by timestep; throws DuplicateTimestep or SchemaViolation.
  explicit DetectionTimeline(std::vector<TimelineEntry> entries);

  const std::vector<TimelineEntry>& entries() const { return entries_; }
  const std::set<std::string>& vocabulary() const { return vocabulary_; }
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }

  friend bool operator==(const DetectionTimeline& a, const DetectionTimeline& b) { return a.entries_ == b.entries_; }

 private:
  std::vector<TimelineEntry> entries_;
  std::set<std::string> vocabulary_;
};

/// C_t: the distinct labels detected in one frame.
struct ClassSet {
  std::set<std::string> labels;

  std::size_t count() const { return labels.size(); }
  friend bool operator==(const ClassSet&, const ClassSet&) = default;
};

ClassSet class_set(const std::vector<Detection>& detections, double conf_threshold = kDefaultConfThreshold);

/// Sidecar JSONL: {"t": int, "detections": [{"label", "conf", "bbox": [x,y,w,h]}]} per line.
DetectionTimeline parse_detections(std::istream& source);
DetectionTimeline parse_detections_text(const std::string& text);

void write_detections(const DetectionTimeline& timeline, std::ostream& sink);
std::string write_detections_text(const DetectionTimeline& timeline);

void validate_detection(const Detection& d);

}  // namespace trek
