#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "trek/image.hpp"

namespace trek {

inline constexpr int kMinFrameSide = 16;

/// One decoded sample f_t of the source video; `timestep` is the index in the
/// full (unsubsampled) sequence.
struct FrameRecord {
  std::int64_t timestep = 0;
  RgbImage image;

  int width() const { return image.width; }
  int height() const { return image.height; }
};

struct GrayFrame {
  std::int64_t timestep = 0;
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  std::uint8_t at(int x, int y) const {
    return pixels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)];
  }
};

struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;

  friend bool operator==(const CameraIntrinsics&, const CameraIntrinsics&) = default;
};

struct FrameFile {
  std::int64_t timestep = 0;
  std::filesystem::path path;
};

/// Image files (PNG/JPEG, case-insensitive extension) in lexicographic order,
/// keeping those whose source index is a multiple of `interval`.
std::vector<FrameFile> list_sequence(const std::filesystem::path& directory, int interval);

FrameRecord load_frame(const FrameFile& file);

/// Decodes the subsampled sequence. Throws NoFrames, DecodeError,
/// DimensionMismatch, or FrameTooSmall.
std::vector<FrameRecord> load_sequence(const std::filesystem::path& directory, int interval);

/// BT.601 luma rounded half-up: (299 R + 587 G + 114 B + 500) / 1000.
GrayFrame to_grayscale(const FrameRecord& frame);

std::uint8_t luma(std::uint8_t r, std::uint8_t g, std::uint8_t b);

/// Max-dimension focal heuristic with the principal point at the image centre.
CameraIntrinsics default_intrinsics(int width, int height);

/// Reads {"fx", "fy"?, "cx", "cy"}; fy defaults to fx.
CameraIntrinsics parse_intrinsics(const std::filesystem::path& file);
CameraIntrinsics parse_intrinsics_text(const std::string& text);

/// Checks the principal point lies inside a `width` x `height` image.
void check_intrinsics_bound(const CameraIntrinsics& k, int width, int height);

}  // namespace trek
