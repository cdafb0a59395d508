#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "blink/run_config.hpp"

using namespace blink;
namespace fs = std::filesystem;

TEST_CASE("defaults round-trip through json") {
  RunConfig a;
  RunConfig b = RunConfig::from_json(a.to_json());
  CHECK(b.train.alpha == a.train.alpha);
  CHECK(b.train.beta == a.train.beta);
  CHECK(b.model.deter_dim == a.model.deter_dim);
  CHECK(b.sim.kill_hazard_contact == a.sim.kill_hazard_contact);
  CHECK(b.eval.max_len == 600);
  CHECK(b.eval.horizon == 30);
  CHECK(b.analyze.window_length == 30);
  CHECK(b.analyze.k == 4);
  CHECK(b.data.min_track_len == 60);
}

TEST_CASE("partial configs override only the named keys") {
  RunConfig c = RunConfig::from_json(
      R"({"train": {"lr": 0.01}, "sim": {"n_tumor": 9}, "seed": 5})");
  CHECK(c.train.lr == 0.01);
  CHECK(c.train.alpha == 10.0);  // untouched default
  CHECK(c.sim.n_tumor == 9);
  CHECK(c.sim.arena_size == 96.0);
  CHECK(c.seed == 5);
}

TEST_CASE("loading an absent path gives defaults; a bad path throws") {
  RunConfig c = RunConfig::load("");
  CHECK(c.train.window == 50);
  CHECK_THROWS(RunConfig::load("/nonexistent/config.json"));
}

TEST_CASE("resolve_seed propagates the top-level seed") {
  unsetenv("BLINK_SEED");
  RunConfig c;
  c.seed = 17;
  c.resolve_seed();
  CHECK(c.sim.seed == 17);
  CHECK(c.train.seed == 17);
  CHECK(c.analyze.seed == 17);
}

TEST_CASE("BLINK_SEED wins over the configured seed") {
  setenv("BLINK_SEED", "99", 1);
  RunConfig c;
  c.seed = 17;
  c.resolve_seed();
  CHECK(c.seed == 99);
  CHECK(c.train.seed == 99);
  unsetenv("BLINK_SEED");

  setenv("BLINK_SEED", "not-a-number", 1);
  RunConfig d;
  CHECK_THROWS(d.resolve_seed());
  unsetenv("BLINK_SEED");
}

TEST_CASE("run.json echoes the command and effective config") {
  fs::path dir = fs::temp_directory_path() / "blink_runjson_test";
  fs::remove_all(dir);
  RunConfig c;
  c.seed = 3;
  write_run_json(c, "evaluate", dir.string());
  std::ifstream in(dir / "run.json");
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  CHECK(text.find("\"command\": \"evaluate\"") != std::string::npos);
  CHECK(text.find("\"seed\": 3") != std::string::npos);
  // The echoed config is itself loadable.
  CHECK(text.find("\"train\"") != std::string::npos);
  fs::remove_all(dir);
}
