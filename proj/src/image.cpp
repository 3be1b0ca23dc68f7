#include "trek/image.hpp"

#include <fstream>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "trek/error.hpp"

namespace trek {

namespace {

// OpenCV stores BGR; the library works in RGB.
cv::Mat to_bgr_mat(const RgbImage& image) {
  cv::Mat mat(image.height, image.width, CV_8UC3);
  for (int y = 0; y < image.height; ++y) {
    auto* row = mat.ptr<std::uint8_t>(y);
    for (int x = 0; x < image.width; ++x) {
      const Rgb c = image.at(x, y);
      row[3 * x] = c[2];
      row[3 * x + 1] = c[1];
      row[3 * x + 2] = c[0];
    }
  }
  return mat;
}

void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::WriteError, "cannot write " + path.string());
}

}  // namespace

RgbImage::RgbImage(int w, int h, Rgb fill) : width(w), height(h) {
  pixels.resize(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3);
  for (std::size_t i = 0; i < pixels.size(); i += 3) {
    pixels[i] = fill[0];
    pixels[i + 1] = fill[1];
    pixels[i + 2] = fill[2];
  }
}

RgbImage read_image(const std::filesystem::path& path) {
  cv::Mat mat;
  try {
    mat = cv::imread(path.string(), cv::IMREAD_COLOR);
  } catch (const cv::Exception& e) {
    throw Error(ErrorKind::DecodeError, path.string() + ": " + e.what());
  }
  if (mat.empty() || mat.type() != CV_8UC3) {
    throw Error(ErrorKind::DecodeError, "cannot decode " + path.string());
  }
  RgbImage image(mat.cols, mat.rows);
  for (int y = 0; y < mat.rows; ++y) {
    const auto* row = mat.ptr<std::uint8_t>(y);
    for (int x = 0; x < mat.cols; ++x) {
      image.set(x, y, {row[3 * x + 2], row[3 * x + 1], row[3 * x]});
    }
  }
  return image;
}

std::vector<std::uint8_t> encode_png(const RgbImage& image) {
  std::vector<std::uint8_t> bytes;
  const std::vector<int> params = {cv::IMWRITE_PNG_COMPRESSION, 6};
  if (!cv::imencode(".png", to_bgr_mat(image), bytes, params)) {
    throw Error(ErrorKind::WriteError, "PNG encoding failed");
  }
  return bytes;
}

void write_png(const std::filesystem::path& path, const RgbImage& image) {
  write_bytes(path, encode_png(image));
}

void write_jpeg(const std::filesystem::path& path, const RgbImage& image, int quality) {
  std::vector<std::uint8_t> bytes;
  const std::vector<int> params = {cv::IMWRITE_JPEG_QUALITY, quality};
  if (!cv::imencode(".jpg", to_bgr_mat(image), bytes, params)) {
    throw Error(ErrorKind::WriteError, "JPEG encoding failed");
  }
  write_bytes(path, bytes);
}

}  // namespace trek
