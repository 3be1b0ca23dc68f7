#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "trek/frame_ingest.hpp"

namespace trek::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "trek");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

std::filesystem::path fixture_dir();

/// Sidecar shipped with the tests for the room sequence below.
std::filesystem::path fixture_sidecar();

inline constexpr int kFixtureFrames = 24;
inline constexpr int kFixtureWidth = 320;
inline constexpr int kFixtureHeight = 240;

/// Renders the fixture room walk as frame_000000.png ... into `dir`.
void write_room_sequence(const std::filesystem::path& dir, int frames = kFixtureFrames, int width = kFixtureWidth,
                         int height = kFixtureHeight, std::uint64_t seed = 11);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace trek::testing
