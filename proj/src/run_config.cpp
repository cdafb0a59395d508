#include "blink/run_config.hpp"

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace blink {

using nlohmann::json;

namespace {

json analyze_to_json(const behavior::AnalysisConfig& a) {
  json j;
  j["window_length"] = a.window_length;
  j["window_stride"] = a.window_stride;
  j["last_minus_first"] = a.last_minus_first;
  j["max_components"] = a.max_components;
  j["var_target"] = a.var_target;
  j["k"] = a.k;
  j["seed"] = a.seed;
  return j;
}

behavior::AnalysisConfig analyze_from_json(const json& j) {
  behavior::AnalysisConfig a;
  a.window_length = j.value("window_length", a.window_length);
  a.window_stride = j.value("window_stride", a.window_stride);
  a.last_minus_first = j.value("last_minus_first", a.last_minus_first);
  a.max_components = j.value("max_components", a.max_components);
  a.var_target = j.value("var_target", a.var_target);
  a.k = j.value("k", a.k);
  a.seed = j.value("seed", a.seed);
  return a;
}

}  // namespace

std::string RunConfig::to_json() const {
  json j;
  j["seed"] = seed;
  j["sim"] = json::parse(sim.to_json());
  j["data"] = {{"n_train", data.n_train},
               {"n_val", data.n_val},
               {"n_test", data.n_test},
               {"min_track_len", data.min_track_len}};
  j["model"] = json::parse(model.to_json());
  j["train"] = json::parse(train.to_json());
  j["eval"] = {{"max_len", eval.max_len},
               {"horizon", eval.horizon},
               {"zero_actions", eval.zero_actions},
               {"n_bootstrap", eval.n_bootstrap}};
  j["analyze"] = analyze_to_json(analyze);
  return j.dump(2);
}

RunConfig RunConfig::from_json(const std::string& text) {
  json j = json::parse(text);
  RunConfig c;
  c.seed = j.value("seed", c.seed);
  if (j.contains("sim")) c.sim = sim::SimConfig::from_json(j["sim"].dump());
  if (j.contains("data")) {
    const json& d = j["data"];
    c.data.n_train = d.value("n_train", c.data.n_train);
    c.data.n_val = d.value("n_val", c.data.n_val);
    c.data.n_test = d.value("n_test", c.data.n_test);
    c.data.min_track_len = d.value("min_track_len", c.data.min_track_len);
  }
  if (j.contains("model"))
    c.model = ModelConfig::from_json(j["model"].dump());
  if (j.contains("train"))
    c.train = TrainConfig::from_json(j["train"].dump());
  if (j.contains("eval")) {
    const json& e = j["eval"];
    c.eval.max_len = e.value("max_len", c.eval.max_len);
    c.eval.horizon = e.value("horizon", c.eval.horizon);
    c.eval.zero_actions = e.value("zero_actions", c.eval.zero_actions);
    c.eval.n_bootstrap = e.value("n_bootstrap", c.eval.n_bootstrap);
  }
  if (j.contains("analyze")) c.analyze = analyze_from_json(j["analyze"]);
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  if (path.empty()) return RunConfig{};
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config file not found: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

void RunConfig::resolve_seed() {
  if (const char* env = std::getenv("BLINK_SEED")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0')
      throw std::runtime_error("BLINK_SEED must be an unsigned integer");
    seed = v;
  }
  sim.seed = seed;
  train.seed = seed;
  analyze.seed = seed;
}

void write_run_json(const RunConfig& cfg, const std::string& command,
                    const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  json j;
  j["command"] = command;
  j["config"] = json::parse(cfg.to_json());
  std::ofstream out(out_dir + "/run.json");
  if (!out) throw std::runtime_error("cannot write run.json in " + out_dir);
  out << j.dump(2) << "\n";
}

}  // namespace blink
