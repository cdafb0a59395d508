#include "blink/train.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace blink {

using ad::Mat;
using nlohmann::json;
namespace fs = std::filesystem;

std::string TrainConfig::to_json() const {
  json j;
  j["alpha"] = alpha;
  j["beta"] = beta;
  j["kl_mix"] = kl_mix;
  j["huber_delta"] = huber_delta;
  j["window"] = window;
  j["batch"] = batch;
  j["lr"] = lr;
  j["epochs"] = epochs;
  j["grad_clip"] = grad_clip;
  j["seed"] = seed;
  j["windows_per_episode"] = windows_per_episode;
  return j.dump();
}

TrainConfig TrainConfig::from_json(const std::string& text) {
  json j = json::parse(text);
  TrainConfig c;
  c.alpha = j.value("alpha", c.alpha);
  c.beta = j.value("beta", c.beta);
  c.kl_mix = j.value("kl_mix", c.kl_mix);
  c.huber_delta = j.value("huber_delta", c.huber_delta);
  c.window = j.value("window", c.window);
  c.batch = j.value("batch", c.batch);
  c.lr = j.value("lr", c.lr);
  c.epochs = j.value("epochs", c.epochs);
  c.grad_clip = j.value("grad_clip", c.grad_clip);
  c.seed = j.value("seed", c.seed);
  c.windows_per_episode = j.value("windows_per_episode", c.windows_per_episode);
  return c;
}

Adam::Adam(ad::ParamStore& params, double lr, double clip)
    : params_(params), lr_(lr), clip_(clip) {
  m_.reserve(params.size());
  v_.reserve(params.size());
  for (int i = 0; i < params.size(); ++i) {
    m_.push_back(Mat::Zero(params.value(i).rows(), params.value(i).cols()));
    v_.push_back(Mat::Zero(params.value(i).rows(), params.value(i).cols()));
  }
}

void Adam::step(const std::map<int, Mat>& grads) {
  double sq = 0.0;
  for (const auto& [id, g] : grads) sq += g.squaredNorm();
  double norm = std::sqrt(sq);
  double scale = (clip_ > 0.0 && norm > clip_) ? clip_ / norm : 1.0;
  ++t_;
  double bc1 = 1.0 - std::pow(beta1_, t_);
  double bc2 = 1.0 - std::pow(beta2_, t_);
  for (const auto& [id, g0] : grads) {
    Mat g = g0 * scale;
    m_[id] = beta1_ * m_[id] + (1.0 - beta1_) * g;
    v_[id] = beta2_ * v_[id] + (1.0 - beta2_) * g.cwiseProduct(g);
    Mat mhat = m_[id] / bc1;
    Mat vhat = v_[id] / bc2;
    params_.value(id).array() -=
        lr_ * mhat.array() / (vhat.array().sqrt() + eps_);
  }
}

void compute_action_stats(const std::vector<Episode>& train,
                          ModelConfig& cfg) {
  double sum[2] = {0, 0}, sq[2] = {0, 0};
  std::size_t n = 0;
  for (const Episode& ep : train)
    for (std::size_t t = 1; t < ep.frames.size(); ++t) {
      double a[2] = {ep.frames[t].dx, ep.frames[t].dy};
      for (int k = 0; k < 2; ++k) {
        sum[k] += a[k];
        sq[k] += a[k] * a[k];
      }
      ++n;
    }
  for (int k = 0; k < 2; ++k) {
    double mean = n ? sum[k] / n : 0.0;
    double var = n ? sq[k] / n - mean * mean : 1.0;
    cfg.action_mean[k] = mean;
    cfg.action_std[k] = std::sqrt(std::max(var, 1e-8));
  }
}

double track_mae(Model& model, const std::vector<Episode>& eps, int max_len) {
  if (eps.empty()) return 0.0;
  double sum = 0.0;
  for (const Episode& ep : eps) {
    std::vector<double> pred = model.predict_track(ep, max_len);
    int T = static_cast<int>(pred.size());
    double truth =
        T > 0 ? ep.frames[T - 1].cum_kills - ep.frames[0].cum_kills : 0.0;
    double final_pred = pred.empty() ? 0.0 : pred.back();
    sum += std::abs(final_pred - truth);
  }
  return sum / static_cast<double>(eps.size());
}

void save_checkpoint(Model& model, const TrainConfig& cfg,
                     const std::string& out_dir) {
  fs::create_directories(out_dir);
  model.param_store().save(out_dir + "/checkpoint.bin");
  json j;
  j["model_kind"] = model.kind();
  j["model_config"] = json::parse(model.config().to_json());
  j["train_config"] = json::parse(cfg.to_json());
  j["seed"] = cfg.seed;
  j["extra_state"] = json::parse(model.extra_state_json());
  std::ofstream out(out_dir + "/config.json");
  if (!out) throw std::runtime_error("cannot write " + out_dir + "/config.json");
  out << j.dump(2) << "\n";
}

std::unique_ptr<Model> load_checkpoint(const std::string& dir) {
  std::string cfg_path = dir + "/config.json";
  std::ifstream in(cfg_path);
  if (!in) throw std::runtime_error("missing checkpoint sidecar: " + cfg_path);
  json j = json::parse(in);
  ModelConfig mc = ModelConfig::from_json(j.at("model_config").dump());
  std::uint64_t seed = j.value("seed", std::uint64_t{0});
  auto model = make_model(j.at("model_kind").get<std::string>(), mc, seed);
  std::string bin = dir + "/checkpoint.bin";
  if (!fs::exists(bin))
    throw std::runtime_error("missing checkpoint file: " + bin);
  model->param_store().load(bin);
  if (j.contains("extra_state"))
    model->load_extra_state_json(j["extra_state"].dump());
  return model;
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

TrainResult train_model(Model& model, const std::vector<Episode>& train,
                        const std::vector<Episode>& val,
                        const TrainConfig& cfg, const std::string& out_dir) {
  if (train.empty()) throw std::runtime_error("training split is empty");
  fs::create_directories(out_dir);
  std::ofstream log(out_dir + "/train_log.csv");
  log << "epoch,recon,kl,outcome,total,val_mae\r\n";

  model.fit_statistics(train);
  TrainResult result;
  if (!model.trainable()) {
    double vm = track_mae(model, val);
    log << "0," << fmt(0.0) << "," << fmt(0.0) << "," << fmt(0.0) << ","
        << fmt(0.0) << "," << fmt(vm) << "\r\n";
    result.best_val_mae = vm;
    result.best_epoch = 0;
    save_checkpoint(model, cfg, out_dir);
    return result;
  }

  // Episodes shorter than the window are skipped with a logged warning.
  std::vector<const Episode*> usable;
  for (const Episode& ep : train) {
    if (ep.length() >= cfg.window)
      usable.push_back(&ep);
    else
      std::fprintf(stderr, "warn: episode %s shorter than window (%d < %d)\n",
                   ep.id.c_str(), ep.length(), cfg.window);
  }
  if (usable.empty())
    throw std::runtime_error("no training episode is at least one window long");

  Adam opt(model.param_store(), cfg.lr, cfg.grad_clip);
  LossWeights w = cfg.weights();
  Rng root(cfg.seed, Rng::hash("train"));
  double best = std::numeric_limits<double>::infinity();
  std::vector<Mat> best_params;
  auto snapshot = [&]() {
    best_params.clear();
    for (int i = 0; i < model.param_store().size(); ++i)
      best_params.push_back(model.param_store().value(i));
  };
  snapshot();
  int n_params = model.param_store().size();

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng erng = root.fork(static_cast<std::uint64_t>(epoch));
    // One (or more) random windows per usable episode, then shuffled.
    std::vector<WindowSample> windows;
    for (const Episode* ep : usable)
      for (int k = 0; k < cfg.windows_per_episode; ++k) {
        Rng wrng = erng.fork(Rng::hash(ep->id) + k);
        windows.push_back(sample_window(*ep, cfg.window, wrng));
      }
    for (std::size_t i = windows.size(); i > 1; --i)
      std::swap(windows[i - 1], windows[erng.uniform_int(i)]);

    double erecon = 0, ekl = 0, eoutcome = 0, etotal = 0;
    int steps = 0;
    for (std::size_t start = 0; start < windows.size();
         start += cfg.batch) {
      std::size_t count = std::min<std::size_t>(cfg.batch,
                                                windows.size() - start);
      // One tape per window so the reduction order (and hence the result)
      // is independent of the thread count.
      std::vector<std::map<int, Mat>> grads(count);
      std::vector<WindowLossParts> parts(count);
      std::vector<ad::Tape> tapes(count);
      bool bad = false;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
      for (std::int64_t i = 0; i < static_cast<std::int64_t>(count); ++i) {
        Rng wrng = erng.fork(0x5eed + start + static_cast<std::size_t>(i));
        WindowBatch batch = build_batch(
            std::span<const WindowSample>(&windows[start + i], 1));
        parts[i] = model.window_loss(tapes[i], batch, w, wrng, nullptr);
        if (!std::isfinite(parts[i].total.val()(0, 0))) {
          bad = true;
        } else {
          tapes[i].backward(parts[i].total);
          grads[i] = tapes[i].param_grads();
        }
      }
      if (bad) {
        save_checkpoint(model, cfg, out_dir);
        throw std::runtime_error(
            "training diverged (non-finite loss); last checkpoint saved to " +
            out_dir);
      }
      std::map<int, Mat> total_grads;
      double inv = 1.0 / static_cast<double>(count);
      for (std::size_t i = 0; i < count; ++i)
        for (auto& [id, g] : grads[i]) {
          auto it = total_grads.find(id);
          if (it == total_grads.end())
            total_grads[id] = g * inv;
          else
            it->second += g * inv;
        }
      (void)n_params;
      opt.step(total_grads);
      for (std::size_t i = 0; i < count; ++i) {
        erecon += parts[i].recon * inv;
        ekl += parts[i].kl * inv;
        eoutcome += parts[i].outcome * inv;
        etotal += parts[i].total.val()(0, 0) * inv;
      }
      ++steps;
    }
    double vm = track_mae(model, val);
    double s = steps > 0 ? 1.0 / steps : 0.0;
    log << epoch << "," << fmt(erecon * s) << "," << fmt(ekl * s) << ","
        << fmt(eoutcome * s) << "," << fmt(etotal * s) << "," << fmt(vm)
        << "\r\n";
    log.flush();
    result.epoch_total_loss.push_back(etotal * s);
    if (vm < best || result.best_epoch < 0) {
      best = vm;
      result.best_epoch = epoch;
      snapshot();
    }
  }
  // Restore and persist the best-on-validation parameters.
  for (int i = 0; i < model.param_store().size(); ++i)
    model.param_store().value(i) = best_params[i];
  result.best_val_mae = best;
  save_checkpoint(model, cfg, out_dir);
  return result;
}

}  // namespace blink
