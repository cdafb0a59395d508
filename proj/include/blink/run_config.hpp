#pragma once

#include <string>

#include "blink/behavior.hpp"
#include "blink/model.hpp"
#include "blink/sim.hpp"
#include "blink/train.hpp"

namespace blink {

struct DataConfig {
  int n_train = 120;
  int n_val = 20;
  int n_test = 40;
  int min_track_len = 60;
};

struct EvalSettings {
  int max_len = 600;
  int horizon = 30;
  bool zero_actions = false;
  int n_bootstrap = 1000;
};

// One config object for the whole pipeline, loadable from a JSON file with
// sections "sim", "data", "model", "train", "eval", "analyze". Missing
// sections or keys keep their defaults. BLINK_SEED in the environment
// overrides every seed field.
struct RunConfig {
  sim::SimConfig sim;
  DataConfig data;
  ModelConfig model;
  TrainConfig train;
  EvalSettings eval;
  behavior::AnalysisConfig analyze;
  std::uint64_t seed = 0;

  std::string to_json() const;
  static RunConfig from_json(const std::string& text);
  static RunConfig load(const std::string& path);  // "" -> defaults

  // Propagates the top-level seed into sub-configs, honoring BLINK_SEED.
  void resolve_seed();
};

// Records the effective config plus the invoked subcommand under
// out_dir/run.json so any run can be replayed exactly.
void write_run_json(const RunConfig& cfg, const std::string& command,
                    const std::string& out_dir);

}  // namespace blink
