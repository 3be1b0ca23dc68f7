#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace trek {

using Rgb = std::array<std::uint8_t, 3>;

// Row-major interleaved RGB8 raster.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  RgbImage() = default;
  RgbImage(int w, int h, Rgb fill = {0, 0, 0});

  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height; }

  Rgb at(int x, int y) const {
    const auto i = index(x, y);
    return {pixels[i], pixels[i + 1], pixels[i + 2]};
  }

  void set(int x, int y, Rgb c) {
    const auto i = index(x, y);
    pixels[i] = c[0];
    pixels[i + 1] = c[1];
    pixels[i + 2] = c[2];
  }

  friend bool operator==(const RgbImage&, const RgbImage&) = default;

 private:
  std::size_t index(int x, int y) const {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)) * 3;
  }
};

/// Decodes a PNG or JPEG file. Throws Error{DecodeError} naming the file.
RgbImage read_image(const std::filesystem::path& path);

/// Lossless PNG encoding with fixed settings, so equal rasters give equal bytes.
std::vector<std::uint8_t> encode_png(const RgbImage& image);

void write_png(const std::filesystem::path& path, const RgbImage& image);
void write_jpeg(const std::filesystem::path& path, const RgbImage& image, int quality = 95);

}  // namespace trek
