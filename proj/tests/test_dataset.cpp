#include <doctest.h>

#include <filesystem>
#include <set>

#include "blink/dataset.hpp"
#include "blink/rng.hpp"

using namespace blink;
namespace fs = std::filesystem;

namespace {

Episode kills_episode(std::vector<std::int32_t> kills) {
  Episode ep;
  ep.id = "k";
  ep.channels = 1;
  ep.height = 1;
  ep.width = 1;
  for (std::int32_t k : kills) {
    Frame f;
    f.obs = {0.0f};
    f.cum_kills = k;
    ep.frames.push_back(std::move(f));
  }
  return ep;
}

}  // namespace

TEST_CASE("window labels are re-zeroed at the window start") {
  Episode ep = kills_episode({0, 0, 1, 1, 2, 3, 3, 3});
  WindowSample w = make_window(ep, 2, 4);
  CHECK(w.rel_label == std::vector<std::int32_t>{0, 0, 1, 2});
  CHECK(w.t0 == 2);
  CHECK(w.length == 4);
}

TEST_CASE("window bounds are enforced") {
  Episode ep = kills_episode({0, 1, 1});
  CHECK_THROWS(make_window(ep, 0, 4));
  CHECK_THROWS(make_window(ep, -1, 2));
  CHECK_THROWS(make_window(ep, 2, 0));
  CHECK_NOTHROW(make_window(ep, 0, 3));
}

TEST_CASE("window grid covers starts 0, stride, 2*stride, ...") {
  Episode ep = kills_episode(std::vector<std::int32_t>(10, 0));
  auto ws = make_windows(ep, 4, 3);
  REQUIRE(ws.size() == 3);
  CHECK(ws[0].t0 == 0);
  CHECK(ws[1].t0 == 3);
  CHECK(ws[2].t0 == 6);
  CHECK(make_windows(kills_episode({0, 0}), 4, 3).empty());
}

TEST_CASE("sampled windows always fit inside the episode") {
  Episode ep = kills_episode(std::vector<std::int32_t>(13, 0));
  Rng rng(3);
  std::set<int> starts;
  for (int i = 0; i < 200; ++i) {
    WindowSample w = sample_window(ep, 5, rng);
    CHECK(w.t0 >= 0);
    CHECK(w.t0 + w.length <= ep.length());
    starts.insert(w.t0);
  }
  CHECK(starts.size() == 9);  // all of 0..8 reachable
}

TEST_CASE("short tracks are filtered out") {
  std::vector<Episode> eps;
  eps.push_back(kills_episode(std::vector<std::int32_t>(59, 0)));
  eps.push_back(kills_episode(std::vector<std::int32_t>(60, 0)));
  eps.push_back(kills_episode(std::vector<std::int32_t>(80, 0)));
  auto kept = filter_tracks(std::move(eps), 60);
  CHECK(kept.size() == 2);
}

TEST_CASE("greedy tracker follows hand-checkable detections") {
  // Two targets moving one pixel per frame; one disappears at frame 2; a
  // far detection at frame 3 must seed a fresh track.
  std::vector<std::vector<Point2>> frames = {
      {{0, 0}, {10, 10}},
      {{1, 0}, {10, 11}},
      {{2, 0}},
      {{3, 0}, {50, 50}},
  };
  auto tracks = greedy_track(frames, 5.0);
  REQUIRE(tracks.size() == 3);
  CHECK(tracks[0].start_frame == 0);
  CHECK(tracks[0].length() == 4);
  CHECK(tracks[0].points.back() == Point2{3, 0});
  CHECK(tracks[1].start_frame == 0);
  CHECK(tracks[1].length() == 2);
  CHECK(tracks[1].points.back() == Point2{10, 11});
  CHECK(tracks[2].start_frame == 3);
  CHECK(tracks[2].points.front() == Point2{50, 50});
}

TEST_CASE("matches are made globally in ascending distance order") {
  // Detection sits between two tracks; the nearer track must win even
  // though the farther track has the lower id.
  std::vector<std::vector<Point2>> frames = {
      {{0, 0}, {4, 0}},
      {{3, 0}},
  };
  auto tracks = greedy_track(frames, 5.0);
  REQUIRE(tracks.size() == 2);
  CHECK(tracks[0].length() == 1);  // track at (0,0) loses the detection
  CHECK(tracks[1].length() == 2);
}

TEST_CASE("equidistant ties break toward the lower track id") {
  std::vector<std::vector<Point2>> frames = {
      {{0, 0}, {4, 0}},
      {{2, 0}},
  };
  auto tracks = greedy_track(frames, 5.0);
  REQUIRE(tracks.size() == 2);
  CHECK(tracks[0].length() == 2);
  CHECK(tracks[1].length() == 1);
}

TEST_CASE("jumps beyond max_dist end the track and seed a new one") {
  std::vector<std::vector<Point2>> frames = {
      {{0, 0}},
      {{6, 0}},
  };
  auto tracks = greedy_track(frames, 5.0);
  REQUIRE(tracks.size() == 2);
  CHECK(tracks[0].length() == 1);
  CHECK(tracks[1].start_frame == 1);
}

TEST_CASE("first threshold crossing is permanent") {
  std::vector<std::vector<double>> targets = {
      {0.0, 0.2, 0.8, 0.1, 0.0},  // crosses at t=2, then dips
      {0.0, 0.0, 0.0, 0.0, 0.9},  // crosses at t=4
      {0.1, 0.1, 0.1, 0.1, 0.1},  // never crosses
  };
  auto cum = threshold_cumulative_labels(targets, 0.5);
  CHECK(cum == std::vector<std::int32_t>{0, 0, 1, 1, 2});
}

TEST_CASE("threshold is strict") {
  std::vector<std::vector<double>> targets = {{0.5, 0.5}};
  CHECK(threshold_cumulative_labels(targets, 0.5) ==
        std::vector<std::int32_t>{0, 0});
}

TEST_CASE("manifest round trip") {
  DatasetManifest m;
  m.splits["train"] = {"a.bin", "b.bin"};
  m.splits["test"] = {"c.bin"};
  m.seed = 42;
  m.config_json = R"({"arena_size":96.0})";
  std::string path =
      (fs::temp_directory_path() / "blink_manifest_test.json").string();
  m.save(path);
  DatasetManifest back = DatasetManifest::load(path);
  CHECK(back.splits == m.splits);
  CHECK(back.seed == 42);
  CHECK(back.format_version == m.format_version);
  CHECK(back.config_json.find("arena_size") != std::string::npos);
  fs::remove(path);
}
