#include <doctest.h>

#include <cstdio>
#include <random>

#include "fixtures.hpp"
#include "trek/error.hpp"
#include "trek/frame_ingest.hpp"

using namespace trek;
using trek::testing::TempDir;

namespace {

void write_frames(const TempDir& dir, int count, int w = 32, int h = 24, const char* ext = "png") {
  for (int i = 0; i < count; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "f%04d.%s", i, ext);
    RgbImage img(w, h, Rgb{static_cast<std::uint8_t>(i * 10), 50, 200});
    if (std::string(ext) == "png") {
      write_png(dir / name, img);
    } else {
      write_jpeg(dir / name, img, 95);
    }
  }
}

std::vector<std::int64_t> timesteps(const std::vector<FrameRecord>& frames) {
  std::vector<std::int64_t> out;
  for (const auto& f : frames) out.push_back(f.timestep);
  return out;
}

void expect_kind(ErrorKind kind, auto&& fn) {
  try {
    fn();
    FAIL("expected ", to_string(kind));
  } catch (const Error& e) {
    CHECK(e.kind() == kind);
  }
}

}  // namespace

TEST_SUITE("frame_ingest") {
  TEST_CASE("subsampling keeps multiples of the interval") {
    TempDir dir;
    write_frames(dir, 12);
    CHECK(timesteps(load_sequence(dir.path(), 4)) == std::vector<std::int64_t>{0, 4, 8});
    TempDir five;
    write_frames(five, 5);
    CHECK(timesteps(load_sequence(five.path(), 1)) == std::vector<std::int64_t>{0, 1, 2, 3, 4});
  }

  TEST_CASE("every N-th of interval 1 equals interval N") {
    TempDir dir;
    write_frames(dir, 13);
    const auto all = load_sequence(dir.path(), 1);
    for (int n : {1, 2, 3, 4, 8, 12}) {
      const auto sub = load_sequence(dir.path(), n);
      std::vector<std::int64_t> expect;
      for (std::size_t i = 0; i < all.size(); i += static_cast<std::size_t>(n)) expect.push_back(all[i].timestep);
      CHECK(timesteps(sub) == expect);
      for (std::size_t i = 0; i < sub.size(); ++i) CHECK(sub[i].image == all[static_cast<std::size_t>(sub[i].timestep)].image);
    }
  }

  TEST_CASE("files are ordered by name and filtered by extension") {
    TempDir dir;
    write_frames(dir, 3, 32, 24, "jpg");
    testing::write_text(dir / "notes.txt", "x");
    testing::write_text(dir / "zz.JSON", "{}");
    const auto files = list_sequence(dir.path(), 1);
    REQUIRE(files.size() == 3);
    CHECK(files[0].path.filename() == "f0000.jpg");
    CHECK(files[2].timestep == 2);
  }

  TEST_CASE("error kinds") {
    TempDir empty;
    expect_kind(ErrorKind::NoFrames, [&] { load_sequence(empty.path(), 1); });
    expect_kind(ErrorKind::NoFrames, [&] { load_sequence(empty / "missing", 1); });

    TempDir bad;
    write_frames(bad, 2);
    testing::write_text(bad / "f0002.png", "not an image");
    try {
      load_sequence(bad.path(), 1);
      FAIL("expected DecodeError");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::DecodeError);
      CHECK(std::string(e.what()).find("f0002.png") != std::string::npos);
    }

    TempDir mixed;
    write_frames(mixed, 2);
    write_png(mixed / "f0009.png", RgbImage(40, 24, Rgb{1, 2, 3}));
    expect_kind(ErrorKind::DimensionMismatch, [&] { load_sequence(mixed.path(), 1); });

    TempDir tiny;
    write_png(tiny / "a.png", RgbImage(15, 40, Rgb{1, 2, 3}));
    expect_kind(ErrorKind::FrameTooSmall, [&] { load_sequence(tiny.path(), 1); });

    TempDir ok;
    write_frames(ok, 2);
    expect_kind(ErrorKind::ConfigurationError, [&] { load_sequence(ok.path(), 0); });
  }

  TEST_CASE("luma") {
    CHECK(luma(255, 255, 255) == 255);
    CHECK(luma(255, 0, 0) == 76);
    CHECK(luma(0, 0, 255) == 29);
    CHECK(luma(0, 0, 0) == 0);
    CHECK(luma(0, 255, 0) == 150);  // 149.685
  }

  TEST_CASE("grayscale matches the rounding formula on every colour sample") {
    std::mt19937_64 gen(3);
    std::uniform_int_distribution<int> v(0, 255);
    RgbImage img(64, 48, Rgb{0, 0, 0});
    for (int y = 0; y < 48; ++y) {
      for (int x = 0; x < 64; ++x) {
        img.set(x, y, Rgb{static_cast<std::uint8_t>(v(gen)), static_cast<std::uint8_t>(v(gen)), static_cast<std::uint8_t>(v(gen))});
      }
    }
    const auto g = to_grayscale({7, img});
    CHECK(g.timestep == 7);
    CHECK(g.width == 64);
    CHECK(g.height == 48);
    for (int y = 0; y < 48; ++y) {
      for (int x = 0; x < 64; ++x) {
        const auto p = img.at(x, y);
        const double exact = 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
        CHECK(std::abs(g.at(x, y) - exact) <= 0.5 + 1e-9);
      }
    }
    const auto flat = to_grayscale({0, RgbImage(20, 20, Rgb{10, 200, 30})});
    for (auto p : flat.pixels) CHECK(p == flat.pixels.front());
  }

  TEST_CASE("default intrinsics") {
    CHECK(default_intrinsics(640, 480) == CameraIntrinsics{640, 640, 320, 240});
    CHECK(default_intrinsics(100, 100) == CameraIntrinsics{100, 100, 50, 50});
    CHECK(default_intrinsics(1920, 1080) == CameraIntrinsics{1920, 1920, 960, 540});
  }

  TEST_CASE("intrinsics file") {
    CHECK(parse_intrinsics_text(R"({"fx":500,"fy":500,"cx":320,"cy":240})") == CameraIntrinsics{500, 500, 320, 240});
    CHECK(parse_intrinsics_text(R"({"fx":500,"cx":320,"cy":240})").fy == 500);
    expect_kind(ErrorKind::InvalidIntrinsics, [] { parse_intrinsics_text(R"({"fx":-1,"cx":320,"cy":240})"); });
    expect_kind(ErrorKind::InvalidIntrinsics, [] { parse_intrinsics_text(R"({"fx":500,"fy":0,"cx":320,"cy":240})"); });
    try {
      parse_intrinsics_text("{\n  \"fx\": 500,\n  \"cx\": \"wide\",\n  \"cy\": 240\n}");
      FAIL("expected ParseError");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::ParseError);
      CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    expect_kind(ErrorKind::ParseError, [] { parse_intrinsics_text("{\"fx\": 500,\n \"cx\": 1"); });
    expect_kind(ErrorKind::ParseError, [] { parse_intrinsics_text(R"({"fx":500,"cy":240})"); });

    TempDir dir;
    testing::write_text(dir / "k.json", R"({"fx":400,"fy":410,"cx":100,"cy":90})");
    CHECK(parse_intrinsics(dir / "k.json") == CameraIntrinsics{400, 410, 100, 90});
    CHECK_NOTHROW(check_intrinsics_bound({400, 410, 100, 90}, 200, 180));
    expect_kind(ErrorKind::InvalidIntrinsics, [] { check_intrinsics_bound({400, 410, 200, 90}, 200, 180); });
  }
}
