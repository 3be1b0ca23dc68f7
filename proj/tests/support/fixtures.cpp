#include "fixtures.hpp"

#include <atomic>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include <unistd.h>

#include "scene.hpp"

namespace trek::testing {

namespace fs = std::filesystem;

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() /
          (tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++) + "-" +
           std::to_string(std::random_device{}()));
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

fs::path fixture_dir() { return TREK_FIXTURE_DIR; }

fs::path fixture_sidecar() { return fixture_dir() / "room_walk.jsonl"; }

void write_room_sequence(const fs::path& dir, int frames, int width, int height, std::uint64_t seed) {
  fs::create_directories(dir);
  std::mt19937_64 gen(seed);
  const TexturedRoom room(seed);
  const auto path = room_path(gen, static_cast<std::size_t>(frames), 0.06, 1.5);
  const auto k = default_intrinsics(width, height);
  for (int i = 0; i < frames; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%06d.png", i);
    write_png(dir / name, room.render(path[static_cast<std::size_t>(i)], k, width, height, 2));
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace trek::testing
