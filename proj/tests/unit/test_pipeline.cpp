#include <doctest.h>

#include <cstdlib>
#include <sstream>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "trek/cli.hpp"
#include "trek/error.hpp"
#include "trek/pipeline.hpp"
#include "trek/util.hpp"

using namespace trek;
using namespace trek::testing;
namespace fs = std::filesystem;

namespace {

// Rendering the fixture walk takes a moment; share one copy per process.
const fs::path& fixture_frames() {
  static TempDir dir("frames");
  static const bool ready = [] {
    write_room_sequence(dir.path());
    return true;
  }();
  (void)ready;
  return dir.path();
}

PipelineConfig base_config(const TempDir& scratch) {
  PipelineConfig c;
  c.frames_dir = fixture_frames();
  c.detections_file = fixture_sidecar();
  c.cache_root = scratch / "cache";
  c.out_dir = scratch / "bundle";
  return c;
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::InvariantViolation;
}

std::string script(const TempDir& dir, const std::string& name, const std::string& body) {
  const auto path = dir / name;
  write_text(path, "#!/bin/sh\n" + body);
  fs::permissions(path, fs::perms::owner_all);
  return shell_quote(path.string());
}

struct CliRun {
  int code;
  std::string out, err;
};

CliRun cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_SUITE("pipeline_cli") {
  TEST_CASE("shipped defaults") {
    const PipelineConfig c;
    CHECK(c.interval == 4);
    CHECK(c.keyframes == 8);
    CHECK(c.strategy == Strategy::BalancedTopK);
    CHECK(c.conf_threshold == 0.25);
    PipelineConfig bad;
    bad.interval = 0;
    CHECK(kind_of([&] { bad.validate(); }) == ErrorKind::ConfigurationError);
    bad.interval = 4;
    bad.keyframes = 0;
    CHECK(kind_of([&] { bad.validate(); }) == ErrorKind::ConfigurationError);
  }

  TEST_CASE("precompute is idempotent and the cache round-trips") {
    TempDir scratch("pipe");
    const auto config = base_config(scratch);
    const auto first = precompute(config);
    CHECK_FALSE(first.cache_hit);
    REQUIRE(fs::exists(first.path));
    const auto bytes = read_file(first.path);
    const auto second = precompute(config);
    CHECK(second.cache_hit);
    CHECK(read_file(first.path) == bytes);
    CHECK(cache_to_json(second.cache).dump() == cache_to_json(first.cache).dump());

    const auto& c = first.cache;
    CHECK(c.interval == 4);
    CHECK(c.frames.size() == 6);
    CHECK(c.trajectory.size() == 6);
    CHECK(c.detections.entries().size() == 6);
    CHECK(c.width == kFixtureWidth);
    CHECK(c.trajectory.steps.front().pose.position == Vec3::Zero());
    for (std::size_t i = 0; i < c.frames.size(); ++i) CHECK(c.trajectory.steps[i].timestep == c.frames[i].timestep);
    const auto reparsed = cache_from_json(nlohmann::json::parse(bytes));
    CHECK(cache_to_json(reparsed).dump() == cache_to_json(c).dump());
  }

  TEST_CASE("fingerprint rules") {
    TempDir scratch("pipe");
    auto config = base_config(scratch);
    const auto a = precompute(config);
    config.interval = 3;
    CHECK(config_fingerprint(config) != a.cache.fingerprint);
    const auto b = precompute(config);
    CHECK_FALSE(b.cache_hit);
    CHECK(b.cache.interval == 3);
    CHECK(b.cache.frames.size() == 8);
    CHECK(precompute(config).cache_hit);

    auto seeded = config;
    seeded.vo.ransac.seed = 99;
    CHECK(config_fingerprint(seeded) != config_fingerprint(config));
    auto workers = config;
    workers.vo.workers = 3;
    CHECK(config_fingerprint(workers) == config_fingerprint(config));
  }

  TEST_CASE("damaged cache is rebuilt") {
    TempDir scratch("pipe");
    const auto config = base_config(scratch);
    const auto a = precompute(config);
    const auto bytes = read_file(a.path);
    write_text(a.path, bytes.substr(0, bytes.size() / 2));
    const auto b = precompute(config);
    CHECK_FALSE(b.cache_hit);
    CHECK(read_file(a.path) == bytes);
    CHECK(kind_of([] { cache_from_json(nlohmann::json::parse(R"({"schema_version":1})")); }) ==
          ErrorKind::SchemaViolation);
  }

  TEST_CASE("detections are required") {
    TempDir scratch("pipe");
    auto config = base_config(scratch);
    config.detections_file.reset();
    CHECK(kind_of([&] { precompute(config); }) == ErrorKind::ConfigurationError);
  }

  TEST_CASE("detector subprocess") {
    TempDir scratch("pipe");
    auto config = base_config(scratch);
    config.detections_file.reset();
    config.detector_cmd = script(scratch, "ok.sh",
                                 "[ \"$1\" = --frames ] && [ \"$3\" = --interval ] && [ \"$5\" = --conf ] || exit 9\n"
                                 "cat " + shell_quote(fixture_sidecar().string()) + "\n");
    const auto from_cmd = precompute(config);
    auto sidecar = base_config(scratch);
    sidecar.cache_root = scratch / "cache2";
    const auto from_file = precompute(sidecar);
    CHECK(cache_to_json(from_cmd.cache)["detections"] == cache_to_json(from_file.cache)["detections"]);

    config.detector_cmd = script(scratch, "bad.sh", "echo 'model weights missing' >&2\nexit 3\n");
    try {
      precompute(config);
      FAIL("expected DetectorFailed");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::DetectorFailed);
      CHECK(std::string(e.what()).find("model weights missing") != std::string::npos);
    }
    config.detector_cmd = script(scratch, "junk.sh", "echo not json\n");
    CHECK(kind_of([&] { precompute(config); }) == ErrorKind::DetectorFailed);
  }

  TEST_CASE("two questions share images and differ in text") {
    TempDir scratch("pipe");
    auto config = base_config(scratch);
    const auto cache = precompute(config).cache;
    config.out_dir = scratch / "q1";
    const auto a = answer_prep(cache, "How many chairs?", config);
    config.out_dir = scratch / "q2";
    const auto b = answer_prep(cache, "Which way did the camera turn?", config);
    for (const auto& entry : fs::directory_iterator(scratch / "q1")) {
      const auto name = entry.path().filename().string();
      if (name == kPromptFile) {
        CHECK(read_file(entry.path()) != read_file(scratch / "q2" / name));
      } else {
        CHECK_MESSAGE(read_file(entry.path()) == read_file(scratch / "q2" / name), name);
      }
    }
    CHECK(kind_of([&] { answer_prep(cache, "  ", config); }) == ErrorKind::EmptyQuestion);
  }

  TEST_CASE("end-to-end bundle validates and colours agree") {
    TempDir scratch("pipe");
    auto config = base_config(scratch);
    config.keyframes = 4;
    const auto cache = precompute(config).cache;
    const auto bundle = answer_prep(cache, "Q?", config);
    const auto m = nlohmann::json::parse(read_file(bundle.manifest_path));
    const auto problems = manifest_problems(m, config.out_dir);
    for (const auto& p : problems) MESSAGE(p);
    CHECK(problems.empty());
    CHECK(m["k"] == 4);
    CHECK(m["interval"] == 4);
    CHECK(m["strategy"] == "balanced_topk");

    Trajectory sub;
    for (const auto& kf : m["keyframes"]) sub.steps.push_back(*cache.trajectory.find(kf["t"].get<std::int64_t>()));
    const auto bev = render_bev(sub);
    const auto plot = render_3d(sub);
    CHECK(read_image(config.out_dir / std::string(kBevFile)) == bev.image);
    CHECK(read_image(config.out_dir / std::string(kPlot3dFile)) == plot.image);
    for (std::size_t i = 0; i < m["keyframes"].size(); ++i) {
      const auto& kf = m["keyframes"][i];
      const Rgb color{kf["color"][0], kf["color"][1], kf["color"][2]};
      CHECK(color == bev.colors[i]);
      CHECK(color == plot.colors[i]);
      const auto img = read_image(config.out_dir / kf["file"].get<std::string>());
      const auto g = marker_geometry(img.width);
      // the disc edge, clear of the digits
      CHECK(img.at(g.center_x, g.center_y - g.radius + 1) == color);
    }
  }

  TEST_CASE("K beyond the available frames clamps") {
    TempDir scratch("pipe");
    auto config = base_config(scratch);
    config.keyframes = 50;
    const auto cache = precompute(config).cache;
    const auto bundle = answer_prep(cache, "Q?", config);
    const auto m = nlohmann::json::parse(read_file(bundle.manifest_path));
    const auto iv = trim_span(class_timeline(cache.detections, config.conf_threshold));
    std::size_t available = 0;
    for (const auto& f : cache.frames) available += f.timestep >= iv.t_s && f.timestep <= iv.t_e;
    CHECK(m["k"] == available);
    CHECK(m["keyframes"].size() == available);
    CHECK(bundle.keyframes.size() == available);
  }

  TEST_CASE("score") {
    CHECK(score_records({"3", "4", "5"}, {"3", "4", "5"}, ScoreType::Na)["mean"] == 1.0);
    const auto na = score_records({"1.2", "0", "1.05"}, {"1", "5", "1"}, ScoreType::Na);
    CHECK(na["items"] == nlohmann::json::array({0.6, 0.0, 0.9}));
    CHECK(std::abs(na["mean"].get<double>() - 0.5) < 1e-12);
    CHECK(na["count"] == 3);
    const auto mca = score_records({"b", "C. lamp", "A"}, {"B", "c", "D"}, ScoreType::Mca);
    CHECK(mca["items"] == nlohmann::json::array({1, 1, 0}));
    CHECK(kind_of([] { score_records({"1"}, {"1", "2"}, ScoreType::Na); }) == ErrorKind::AlignmentError);
    CHECK(kind_of([] { score_records({"1"}, {"x"}, ScoreType::Na); }) == ErrorKind::InvalidTruth);
    CHECK(score_records({"x"}, {"2"}, ScoreType::Na)["items"][0] == 0.0);

    TempDir scratch("score");
    write_text(scratch / "p.txt", "1.2\r\n0\n\n");
    write_text(scratch / "t.txt", "1\n5\n");
    CHECK(score(scratch / "p.txt", scratch / "t.txt", ScoreType::Na)["count"] == 2);
    const auto r = cli({"score", "--pred", (scratch / "p.txt").string(), "--truth", (scratch / "t.txt").string(),
                        "--type", "na"});
    CHECK(r.code == 0);
    CHECK(nlohmann::json::parse(r.out)["items"] == nlohmann::json::array({0.6, 0.0}));
    write_text(scratch / "t3.txt", "1\n5\n7\n");
    CHECK(cli({"score", "--pred", (scratch / "p.txt").string(), "--truth", (scratch / "t3.txt").string(), "--type",
               "na"}).code == kExitInput);
  }

  TEST_CASE("CLI exit codes") {
    TempDir scratch("cli");
    setenv(kCacheEnvVar, (scratch / "cache").c_str(), 1);
    const std::string frames = fixture_frames().string(), sidecar = fixture_sidecar().string();
    CHECK(cli({}).code == kExitConfig);
    CHECK(cli({"--help"}).code == kExitOk);
    CHECK(cli({"precompute"}).code == kExitConfig);
    CHECK(cli({"precompute", "--frames", frames, "--interval", "0", "--detections", sidecar}).code == kExitConfig);
    CHECK(cli({"precompute", "--frames", frames}).code == kExitConfig);
    CHECK(cli({"precompute", "--frames", (scratch / "nothing").string(), "--detections", sidecar}).code == kExitInput);
    CHECK(cli({"prep", "--frames", frames, "--question", "Q"}).code == kExitConfig);  // no cache yet
    CHECK(cli({"precompute", "--frames", frames, "--detector-cmd", "exit 1"}).code == kExitDetector);
    write_text(scratch / "bad.jsonl", "{\"t\": 0, \"detections\": 5}\n");
    CHECK(cli({"precompute", "--frames", frames, "--detections", (scratch / "bad.jsonl").string()}).code ==
          kExitInput);

    const auto pre = cli({"precompute", "--frames", frames, "--detections", sidecar});
    CHECK(pre.code == kExitOk);
    CHECK(fs::exists(pre.out.substr(0, pre.out.size() - 1)));
    CHECK(cli({"prep", "--frames", frames, "--question", "Q", "--keyframes", "0", "--out", (scratch / "b").string()})
              .code == kExitConfig);
    CHECK(cli({"prep", "--frames", frames, "--question", "Q", "--strategy", "best", "--out",
               (scratch / "b").string()}).code == kExitConfig);
    CHECK(cli({"prep", "--frames", frames, "--question", "Q", "--interval", "2", "--out", (scratch / "b").string()})
              .code == kExitConfig);
    const auto prep = cli({"prep", "--frames", frames, "--question", "Q", "--out", (scratch / "b").string()});
    CHECK(prep.code == kExitOk);
    CHECK(prep.out == (scratch / "b" / std::string(kManifestFile)).string() + "\n");
    unsetenv(kCacheEnvVar);
  }

  TEST_CASE("CLI accepts the interval knob set") {
    TempDir scratch("cli");
    setenv(kCacheEnvVar, (scratch / "cache").c_str(), 1);
    for (const char* n : {"1", "2", "3", "4", "8", "12"}) {
      const auto out = (scratch / (std::string("b") + n)).string();
      const auto r = cli({"run", "--frames", fixture_frames().string(), "--detections", fixture_sidecar().string(),
                          "--interval", n, "--question", "Where?", "--out", out});
      CHECK_MESSAGE(r.code == kExitOk, n << ": " << r.err);
      if (r.code == kExitOk) CHECK(nlohmann::json::parse(read_file(fs::path(out) / "manifest.json"))["interval"] ==
                                   std::stoi(n));
    }
    unsetenv(kCacheEnvVar);
  }

  TEST_CASE("video input goes through the frame extractor") {
    TempDir scratch("cli");
    setenv(kCacheEnvVar, (scratch / "cache").c_str(), 1);
    write_text(scratch / "clip.mp4", "not really a video");
    const auto extractor = script(scratch, "extract.sh",
                                  "while [ $# -gt 0 ]; do case $1 in --out) out=$2;; esac; shift; done\n"
                                  "echo run >> " + shell_quote((scratch / "calls").string()) + "\n"
                                  "cp " + shell_quote(fixture_frames().string()) + "/*.png \"$out\"/\n");
    const std::vector<std::string> args{"run", "--video", (scratch / "clip.mp4").string(), "--extract-cmd", extractor,
                                        "--detections", fixture_sidecar().string(), "--question", "Q?",
                                        "--out", (scratch / "b").string()};
    const auto first = cli(args);
    CHECK_MESSAGE(first.code == kExitOk, first.err);
    CHECK(cli(args).code == kExitOk);
    CHECK(read_text(scratch / "calls") == "run\n");
    CHECK(fs::exists(scratch / "b" / std::string(kManifestFile)));

    write_text(scratch / "other.mp4", "another clip");
    const auto failing = script(scratch, "fail.sh", "echo 'codec not supported' >&2\nexit 1\n");
    const auto r = cli({"precompute", "--video", (scratch / "other.mp4").string(), "--extract-cmd", failing,
                        "--detections", fixture_sidecar().string()});
    CHECK(r.code == kExitInput);
    CHECK(r.err.find("codec not supported") != std::string::npos);
    CHECK(cli({"precompute", "--video", (scratch / "other.mp4").string(), "--detections",
               fixture_sidecar().string()}).code == kExitConfig);
    CHECK(cli({"precompute", "--video", (scratch / "other.mp4").string(), "--frames", fixture_frames().string(),
               "--extract-cmd", extractor}).code == kExitConfig);
    unsetenv(kCacheEnvVar);
  }
}
