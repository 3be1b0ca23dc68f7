#include "trek/frame_ingest.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "trek/error.hpp"

namespace trek {

namespace fs = std::filesystem;

namespace {

bool is_image_file(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

std::size_t line_of_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

std::size_t line_of_key(const std::string& text, const std::string& key) {
  const auto pos = text.find("\"" + key + "\"");
  return pos == std::string::npos ? 1 : line_of_offset(text, pos);
}

}  // namespace

std::vector<FrameFile> list_sequence(const fs::path& directory, int interval) {
  if (interval < 1) throw Error(ErrorKind::ConfigurationError, "interval must be >= 1");
  std::error_code ec;
  if (!fs::is_directory(directory, ec)) {
    throw Error(ErrorKind::NoFrames, "not a directory: " + directory.string());
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(directory)) {
    if (entry.is_regular_file() && is_image_file(entry.path())) files.push_back(entry.path());
  }
  if (files.empty()) throw Error(ErrorKind::NoFrames, "no image files in " + directory.string());
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });

  std::vector<FrameFile> out;
  for (std::size_t t = 0; t < files.size(); t += static_cast<std::size_t>(interval)) {
    out.push_back({static_cast<std::int64_t>(t), files[t]});
  }
  return out;
}

FrameRecord load_frame(const FrameFile& file) {
  FrameRecord rec{file.timestep, read_image(file.path)};
  if (rec.width() < kMinFrameSide || rec.height() < kMinFrameSide) {
    throw Error(ErrorKind::FrameTooSmall, file.path.string() + " is smaller than 16x16");
  }
  return rec;
}

std::vector<FrameRecord> load_sequence(const fs::path& directory, int interval) {
  std::vector<FrameRecord> frames;
  for (const auto& file : list_sequence(directory, interval)) {
    auto rec = load_frame(file);
    if (!frames.empty() && (rec.width() != frames.front().width() || rec.height() != frames.front().height())) {
      throw Error(ErrorKind::DimensionMismatch, file.path.string() + " differs in size from the first frame");
    }
    frames.push_back(std::move(rec));
  }
  return frames;
}

std::uint8_t luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  return static_cast<std::uint8_t>((299u * r + 587u * g + 114u * b + 500u) / 1000u);
}

GrayFrame to_grayscale(const FrameRecord& frame) {
  GrayFrame g{frame.timestep, frame.width(), frame.height(), {}};
  const auto& src = frame.image.pixels;
  g.pixels.resize(src.size() / 3);
  for (std::size_t i = 0; i < g.pixels.size(); ++i) {
    g.pixels[i] = luma(src[3 * i], src[3 * i + 1], src[3 * i + 2]);
  }
  return g;
}

CameraIntrinsics default_intrinsics(int width, int height) {
  const double f = static_cast<double>(std::max(width, height));
  return {f, f, width / 2.0, height / 2.0};
}

CameraIntrinsics parse_intrinsics_text(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::ParseError,
                "line " + std::to_string(line_of_offset(text, e.byte == 0 ? 0 : e.byte - 1)) + ": " + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorKind::ParseError, "line 1: intrinsics must be a JSON object");

  auto number = [&](const std::string& key, bool required) -> std::optional<double> {
    if (!doc.contains(key)) {
      if (required) throw Error(ErrorKind::ParseError, "line " + std::to_string(line_of_key(text, key)) + ": missing \"" + key + "\"");
      return std::nullopt;
    }
    const auto& v = doc.at(key);
    if (!v.is_number()) {
      throw Error(ErrorKind::ParseError,
                  "line " + std::to_string(line_of_key(text, key)) + ": \"" + key + "\" is not a number");
    }
    return v.get<double>();
  };

  CameraIntrinsics k;
  k.fx = *number("fx", true);
  k.fy = number("fy", false).value_or(k.fx);
  k.cx = *number("cx", true);
  k.cy = *number("cy", true);
  if (!(k.fx > 0.0) || !(k.fy > 0.0)) {
    throw Error(ErrorKind::InvalidIntrinsics, "focal lengths must be positive");
  }
  return k;
}

CameraIntrinsics parse_intrinsics(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_intrinsics_text(ss.str());
}

void check_intrinsics_bound(const CameraIntrinsics& k, int width, int height) {
  if (!(k.fx > 0.0) || !(k.fy > 0.0)) throw Error(ErrorKind::InvalidIntrinsics, "focal lengths must be positive");
  if (k.cx < 0.0 || k.cx >= width || k.cy < 0.0 || k.cy >= height) {
    throw Error(ErrorKind::InvalidIntrinsics, "principal point lies outside the image");
  }
}

}  // namespace trek
