#include "trek/detection.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "trek/error.hpp"

namespace trek {

using ordered_json = nlohmann::ordered_json;

void validate_detection(const Detection& d) {
  if (d.label.empty()) throw Error(ErrorKind::SchemaViolation, "empty label");
  if (!(d.confidence >= 0.0 && d.confidence <= 1.0)) {
    throw Error(ErrorKind::SchemaViolation, "confidence outside [0,1] for label " + d.label);
  }
  if (!(d.bbox[2] > 0.0) || !(d.bbox[3] > 0.0)) {
    throw Error(ErrorKind::SchemaViolation, "non-positive bbox size for label " + d.label);
  }
}

DetectionTimeline::DetectionTimeline(std::vector<TimelineEntry> entries) : entries_(std::move(entries)) {
  std::stable_sort(entries_.begin(), entries_.end(),
                   [](const TimelineEntry& a, const TimelineEntry& b) { return a.timestep < b.timestep; });
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (i > 0 && entries_[i].timestep == entries_[i - 1].timestep) {
      throw Error(ErrorKind::DuplicateTimestep, "timestep " + std::to_string(entries_[i].timestep));
    }
    for (const auto& d : entries_[i].detections) {
      validate_detection(d);
      vocabulary_.insert(d.label);
    }
  }
}

ClassSet class_set(const std::vector<Detection>& detections, double conf_threshold) {
  ClassSet out;
  for (const auto& d : detections) {
    if (d.confidence >= conf_threshold) out.labels.insert(d.label);
  }
  return out;
}

namespace {

Detection detection_from_json(const nlohmann::json& j, std::size_t line) {
  auto fail = [line](const std::string& what) {
    return Error(ErrorKind::SchemaViolation, "line " + std::to_string(line) + ": " + what);
  };
  if (!j.is_object()) throw fail("detection is not an object");
  if (!j.contains("label") || !j["label"].is_string()) throw fail("missing string \"label\"");
  if (!j.contains("conf") || !j["conf"].is_number()) throw fail("missing numeric \"conf\"");
  if (!j.contains("bbox") || !j["bbox"].is_array() || j["bbox"].size() != 4) throw fail("\"bbox\" must be [x,y,w,h]");
  Detection d;
  d.label = j["label"].get<std::string>();
  d.confidence = j["conf"].get<double>();
  for (std::size_t k = 0; k < 4; ++k) {
    if (!j["bbox"][k].is_number()) throw fail("non-numeric bbox component");
    d.bbox[k] = j["bbox"][k].get<double>();
  }
  try {
    validate_detection(d);
  } catch (const Error& e) {
    throw fail(e.what());
  }
  return d;
}

}  // namespace

DetectionTimeline parse_detections(std::istream& source) {
  std::vector<TimelineEntry> entries;
  std::string text;
  std::size_t line_no = 0;
  while (std::getline(source, text)) {
    ++line_no;
    if (std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); })) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("t") || !j["t"].is_number_integer()) {
      throw Error(ErrorKind::SchemaViolation, "line " + std::to_string(line_no) + ": missing integer \"t\"");
    }
    if (!j.contains("detections") || !j["detections"].is_array()) {
      throw Error(ErrorKind::SchemaViolation, "line " + std::to_string(line_no) + ": missing \"detections\" array");
    }
    TimelineEntry entry{j["t"].get<std::int64_t>(), {}};
    if (entry.timestep < 0) {
      throw Error(ErrorKind::SchemaViolation, "line " + std::to_string(line_no) + ": negative timestep");
    }
    for (const auto& dj : j["detections"]) entry.detections.push_back(detection_from_json(dj, line_no));
    entries.push_back(std::move(entry));
  }
  return DetectionTimeline(std::move(entries));
}

DetectionTimeline parse_detections_text(const std::string& text) {
  std::istringstream in(text);
  return parse_detections(in);
}

void write_detections(const DetectionTimeline& timeline, std::ostream& sink) {
  for (const auto& entry : timeline.entries()) {
    ordered_json line;
    line["t"] = entry.timestep;
    line["detections"] = ordered_json::array();
    for (const auto& d : entry.detections) {
      ordered_json dj;
      dj["label"] = d.label;
      dj["conf"] = d.confidence;
      dj["bbox"] = {d.bbox[0], d.bbox[1], d.bbox[2], d.bbox[3]};
      line["detections"].push_back(std::move(dj));
    }
    sink << line.dump() << '\n';
  }
  sink.flush();
  if (!sink) throw Error(ErrorKind::WriteError, "failed writing detection sidecar");
}

std::string write_detections_text(const DetectionTimeline& timeline) {
  std::ostringstream out;
  write_detections(timeline, out);
  return out.str();
}

}  // namespace trek
