#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "blink/behavior.hpp"
#include "blink/dataset.hpp"
#include "blink/eval.hpp"
#include "blink/run_config.hpp"
#include "blink/sim.hpp"
#include "blink/train.hpp"

namespace fs = std::filesystem;
using namespace blink;

namespace {

DatasetManifest open_dataset(const std::string& data_dir) {
  std::string manifest = data_dir + "/manifest.json";
  if (!fs::exists(manifest))
    throw std::runtime_error("missing dataset manifest: " + manifest);
  return DatasetManifest::load(manifest);
}

std::vector<Episode> load_tracks(const DatasetManifest& m,
                                 const std::string& split,
                                 const std::string& dir, int min_len) {
  return filter_tracks(load_split(m, split, dir), min_len);
}

int cmd_simulate(const RunConfig& cfg, const std::string& out_dir) {
  cfg.sim.validate();
  sim::generate_dataset(cfg.sim, cfg.data.n_train, cfg.data.n_val,
                        cfg.data.n_test, cfg.seed, out_dir);
  write_run_json(cfg, "simulate", out_dir);
  std::printf("simulate: wrote %d train / %d val / %d test episodes to %s\n",
              cfg.data.n_train, cfg.data.n_val, cfg.data.n_test,
              out_dir.c_str());
  return 0;
}

int cmd_train(RunConfig cfg, const std::string& data_dir,
              const std::string& out_dir, const std::string& model_kind) {
  DatasetManifest m = open_dataset(data_dir);
  auto train = load_tracks(m, "train", data_dir, cfg.data.min_track_len);
  auto val = load_tracks(m, "val", data_dir, cfg.data.min_track_len);
  if (train.empty())
    throw std::runtime_error("no usable training tracks in " + data_dir);
  if (!train.front().frames.empty()) {
    cfg.model.obs_channels = train.front().channels;
    cfg.model.obs_size = train.front().height;
  }
  compute_action_stats(train, cfg.model);
  auto model = make_model(model_kind, cfg.model, cfg.seed);
  model->fit_statistics(train);
  fs::create_directories(out_dir);
  if (model->trainable()) {
    TrainResult res = train_model(*model, train, val, cfg.train, out_dir);
    std::printf("train: %s best val MAE %.4f (epoch %d)\n",
                model_kind.c_str(), res.best_val_mae, res.best_epoch);
  } else {
    save_checkpoint(*model, cfg.train, out_dir);
    std::printf("train: %s has no learned parameters; checkpoint saved\n",
                model_kind.c_str());
  }
  write_run_json(cfg, "train", out_dir);
  return 0;
}

int cmd_evaluate(const RunConfig& cfg, const std::string& data_dir,
                 const std::string& model_dir, const std::string& out_dir,
                 const std::string& split) {
  DatasetManifest m = open_dataset(data_dir);
  auto eps = load_tracks(m, split, data_dir, cfg.data.min_track_len);
  if (eps.empty())
    throw std::runtime_error("no usable tracks in split: " + split);
  auto model = load_checkpoint(model_dir);
  EvalReport rep = evaluate_model(*model, eps, cfg.eval.max_len,
                                  cfg.eval.horizon, cfg.eval.zero_actions);
  fs::create_directories(out_dir);
  write_metrics_csv(out_dir + "/metrics.csv", {model->kind()}, {cfg.seed},
                    {rep});
  write_per_track_csv(out_dir + "/per_track.csv", rep);
  write_run_json(cfg, "evaluate", out_dir);
  std::printf("evaluate: %s on %s: MAE %.4f RMSE %.4f r %.4f within±1 %.1f%%",
              model->kind().c_str(), split.c_str(), rep.mae, rep.rmse,
              rep.pearson, rep.within_pm1);
  if (rep.fmae30) std::printf(" F-MAE %.4f", *rep.fmae30);
  std::printf("\n");
  return 0;
}

int cmd_forecast(const RunConfig& cfg, const std::string& data_dir,
                 const std::string& model_dir, const std::string& episode_id,
                 int t_f, const std::string& out_csv) {
  DatasetManifest m = open_dataset(data_dir);
  std::string entry_name;
  for (const auto& [name, entries] : m.splits)
    for (const auto& entry : entries)
      if (entry == episode_id || entry == episode_id + ".bin")
        entry_name = entry;
  if (entry_name.empty())
    throw std::runtime_error("episode id not in manifest: " + episode_id);
  Episode ep = load_episode(data_dir + "/" + entry_name);
  if (t_f < 0 || t_f + cfg.eval.horizon >= ep.length())
    throw std::runtime_error("forecast start out of range for " + episode_id);
  auto model = load_checkpoint(model_dir);
  if (!model->supports_forecast())
    throw std::runtime_error("model kind has no forecast mode: " +
                             model->kind());
  auto pred = model->forecast(ep, t_f, cfg.eval.horizon,
                              cfg.eval.zero_actions);
  double base = ep.frames[t_f].cum_kills;
  std::ofstream* file = nullptr;
  std::ofstream out;
  if (!out_csv.empty()) {
    out.open(out_csv);
    if (!out) throw std::runtime_error("cannot write " + out_csv);
    out << "step,pred_rel,true_rel\r\n";
    file = &out;
  }
  for (int i = 0; i < cfg.eval.horizon; ++i) {
    double truth = ep.frames[t_f + 1 + i].cum_kills - base;
    std::printf("t+%d: pred %.3f true %.0f\n", i + 1, pred[i], truth);
    if (file) *file << (i + 1) << "," << pred[i] << "," << truth << "\r\n";
  }
  return 0;
}

int cmd_analyze(const RunConfig& cfg, const std::string& data_dir,
                const std::string& model_dir, const std::string& out_dir) {
  DatasetManifest m = open_dataset(data_dir);
  auto train = load_tracks(m, "train", data_dir, cfg.data.min_track_len);
  auto test = load_tracks(m, "test", data_dir, cfg.data.min_track_len);
  auto model = load_checkpoint(model_dir);
  auto* world_model = dynamic_cast<Blink*>(model.get());
  if (!world_model)
    throw std::runtime_error(
        "analyze needs a latent world model checkpoint, got: " +
        model->kind());
  auto res = behavior::analyze(*world_model, train, test, cfg.analyze);
  behavior::write_analysis_outputs(res, test, cfg.analyze, out_dir);
  write_run_json(cfg, "analyze", out_dir);
  std::printf("analyze: %zu train windows, %zu test tracks -> %s\n",
              res.train_windows.size(), res.test_mode_paths.size(),
              out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"NK-cell co-culture world model pipeline"};
  app.require_subcommand(1);

  std::string config_path, data_dir, model_dir, out_dir;
  std::string model_kind = "blink", split = "test", episode_id, out_csv;
  int t_f = 30;
  std::uint64_t seed = 0;
  bool seed_set = false, zero_actions = false;
  int epochs = -1, batch = -1, window = -1;
  double lr = -1.0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON run config")
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "global seed (overrides config)")
        ->each([&](const std::string&) { seed_set = true; });
  };

  CLI::App* sim_cmd = app.add_subcommand("simulate", "generate a dataset");
  add_common(sim_cmd);
  sim_cmd->add_option("--out", out_dir, "output directory")->required();
  int n_train = -1, n_val = -1, n_test = -1;
  sim_cmd->add_option("--n-train", n_train, "training episodes");
  sim_cmd->add_option("--n-val", n_val, "validation episodes");
  sim_cmd->add_option("--n-test", n_test, "test episodes");

  CLI::App* train_cmd = app.add_subcommand("train", "train a model");
  add_common(train_cmd);
  train_cmd->add_option("--data", data_dir, "dataset directory")->required();
  train_cmd->add_option("--out", out_dir, "checkpoint directory")->required();
  train_cmd->add_option("--model", model_kind,
                        "blink|blink_no_action|frame_ae|gru_regress|"
                        "gru_monotone|zero|mean");
  train_cmd->add_option("--epochs", epochs, "override training epochs");
  train_cmd->add_option("--batch", batch, "override batch size");
  train_cmd->add_option("--window", window, "override window length");
  train_cmd->add_option("--lr", lr, "override learning rate");

  CLI::App* eval_cmd = app.add_subcommand("evaluate", "evaluate a checkpoint");
  add_common(eval_cmd);
  eval_cmd->add_option("--data", data_dir, "dataset directory")->required();
  eval_cmd->add_option("--model", model_dir, "checkpoint directory")
      ->required();
  eval_cmd->add_option("--out", out_dir, "metrics output directory")
      ->required();
  eval_cmd->add_option("--split", split, "dataset split (default test)");
  eval_cmd->add_flag("--zero-actions", zero_actions,
                     "forecast without future actions");

  CLI::App* fc_cmd = app.add_subcommand("forecast", "latent rollout forecast");
  add_common(fc_cmd);
  fc_cmd->add_option("--data", data_dir, "dataset directory")->required();
  fc_cmd->add_option("--model", model_dir, "checkpoint directory")->required();
  fc_cmd->add_option("--episode", episode_id, "episode id")->required();
  fc_cmd->add_option("--start", t_f, "observed prefix length t_f");
  fc_cmd->add_option("--out-csv", out_csv, "optional CSV output path");
  fc_cmd->add_flag("--zero-actions", zero_actions,
                   "forecast without future actions");

  CLI::App* an_cmd = app.add_subcommand("analyze", "behavioral-mode analysis");
  add_common(an_cmd);
  an_cmd->add_option("--data", data_dir, "dataset directory")->required();
  an_cmd->add_option("--model", model_dir, "checkpoint directory")->required();
  an_cmd->add_option("--out", out_dir, "analysis output directory")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig cfg = RunConfig::load(config_path);
    if (seed_set) cfg.seed = seed;
    cfg.resolve_seed();
    if (sim_cmd->parsed()) {
      if (n_train >= 0) cfg.data.n_train = n_train;
      if (n_val >= 0) cfg.data.n_val = n_val;
      if (n_test >= 0) cfg.data.n_test = n_test;
      return cmd_simulate(cfg, out_dir);
    }
    if (train_cmd->parsed()) {
      if (epochs >= 0) cfg.train.epochs = epochs;
      if (batch >= 0) cfg.train.batch = batch;
      if (window >= 0) cfg.train.window = window;
      if (lr > 0) cfg.train.lr = lr;
      return cmd_train(cfg, data_dir, out_dir, model_kind);
    }
    if (eval_cmd->parsed()) {
      cfg.eval.zero_actions = cfg.eval.zero_actions || zero_actions;
      return cmd_evaluate(cfg, data_dir, model_dir, out_dir, split);
    }
    if (fc_cmd->parsed()) {
      cfg.eval.zero_actions = cfg.eval.zero_actions || zero_actions;
      return cmd_forecast(cfg, data_dir, model_dir, episode_id, t_f, out_csv);
    }
    if (an_cmd->parsed())
      return cmd_analyze(cfg, data_dir, model_dir, out_dir);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
