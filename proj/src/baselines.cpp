#include "blink/baselines.hpp"

#include <cmath>
#include <json.hpp>

#include "blink/rssm.hpp"

namespace blink {

using ad::Mat;
using ad::Tape;
using ad::Var;
using nlohmann::json;

// ---- Zero ----

WindowLossParts ZeroPredictor::window_loss(Tape& t, const WindowBatch&,
                                           const LossWeights&, Rng&,
                                           ad::StFreeze*) {
  WindowLossParts p;
  p.total = t.constant(Mat::Zero(1, 1));
  return p;
}

std::vector<double> ZeroPredictor::predict_track(const Episode& ep,
                                                 int max_len) {
  return std::vector<double>(std::min(ep.length(), max_len), 0.0);
}

// ---- Mean ----

void MeanPredictor::fit_statistics(const std::vector<Episode>& train) {
  double sum = 0.0;
  for (const Episode& ep : train)
    if (!ep.frames.empty())
      sum += ep.frames.back().cum_kills - ep.frames.front().cum_kills;
  mean_outcome_ = train.empty() ? 0.0 : sum / static_cast<double>(train.size());
}

WindowLossParts MeanPredictor::window_loss(Tape& t, const WindowBatch&,
                                           const LossWeights&, Rng&,
                                           ad::StFreeze*) {
  WindowLossParts p;
  p.total = t.constant(Mat::Zero(1, 1));
  return p;
}

std::vector<double> MeanPredictor::predict_track(const Episode& ep,
                                                 int max_len) {
  int T = std::min(ep.length(), max_len);
  std::vector<double> out(T, 0.0);
  if (T <= 1) return out;
  for (int i = 0; i < T; ++i)
    out[i] = mean_outcome_ * i / static_cast<double>(ep.length() - 1);
  return out;
}

std::vector<double> MeanPredictor::forecast(const Episode& ep, int, int horizon,
                                            bool) {
  std::vector<double> out(horizon, 0.0);
  if (ep.length() <= 1) return out;
  double slope = mean_outcome_ / static_cast<double>(ep.length() - 1);
  for (int i = 0; i < horizon; ++i) out[i] = slope * (i + 1);
  return out;
}

std::string MeanPredictor::extra_state_json() const {
  json j;
  j["mean_outcome"] = mean_outcome_;
  return j.dump();
}

void MeanPredictor::load_extra_state_json(const std::string& text) {
  json j = json::parse(text);
  mean_outcome_ = j.value("mean_outcome", 0.0);
}

// ---- FrameAE ----

FrameAe::FrameAe(const ModelConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  Rng rng(seed, Rng::hash("frame-ae-init"));
  encoder_.build(params_, rng, "encoder", cfg.obs_channels, cfg.obs_size,
                 cfg.conv_base);
  decoder_.build(params_, rng, "decoder", encoder_.embed_dim, cfg.obs_channels,
                 cfg.obs_size, cfg.conv_base);
  head_.build(params_, rng, "head", encoder_.embed_dim, cfg.hidden, 1);
}

WindowLossParts FrameAe::window_loss(Tape& t, const WindowBatch& batch,
                                     const LossWeights& w, Rng&,
                                     ad::StFreeze*) {
  int B = batch.batch, L = batch.length;
  Var obs = t.constant(batch.obs);
  Var embed = encoder_(t, params_, obs);
  Var xhat = decoder_(t, params_, embed);
  Var recon = ad::scale(ad::gaussian_nll_sum(xhat, batch.obs), 1.0 / B);
  Var pred = head_(t, params_, embed);  // [L*B, 1]
  // Targets in the same t-major layout.
  Mat target(static_cast<Eigen::Index>(L) * B, 1);
  for (int step = 0; step < L; ++step)
    for (int b = 0; b < B; ++b)
      target(static_cast<Eigen::Index>(step) * B + b, 0) =
          batch.labels(b, step);
  Var outcome =
      ad::scale(ad::huber_sum(pred, target, w.huber_delta), 1.0 / B);
  WindowLossParts parts;
  parts.total = ad::add(recon, ad::scale(outcome, w.alpha));
  parts.recon = recon.val()(0, 0);
  parts.outcome = outcome.val()(0, 0);
  return parts;
}

std::vector<double> FrameAe::predict_frames(const Mat& obs) {
  Tape t;
  Var embed = encoder_(t, params_, t.constant(obs));
  Var pred = head_(t, params_, embed);
  std::vector<double> out(obs.rows());
  for (Eigen::Index i = 0; i < obs.rows(); ++i) out[i] = pred.val()(i, 0);
  return out;
}

std::vector<double> FrameAe::predict_track(const Episode& ep, int max_len) {
  int T = std::min(ep.length(), max_len);
  Mat obs(T, static_cast<Eigen::Index>(ep.obs_size()));
  for (int i = 0; i < T; ++i)
    for (std::size_t j = 0; j < ep.obs_size(); ++j)
      obs(i, static_cast<Eigen::Index>(j)) = ep.frames[i].obs[j];
  return predict_frames(obs);
}

// ---- GRU baselines ----

GruBaseline::GruBaseline(const ModelConfig& cfg, std::uint64_t seed,
                         bool monotone)
    : cfg_(cfg), monotone_(monotone) {
  Rng rng(seed, Rng::hash("gru-init"));
  encoder_.build(params_, rng, "encoder", cfg.obs_channels, cfg.obs_size,
                 cfg.conv_base);
  action_proj_.build(params_, rng, "action_proj", 2, cfg.action_embed);
  gru_.build(params_, rng, "gru", encoder_.embed_dim + cfg.action_embed,
             cfg.deter_dim);
  head_.build(params_, rng, "head", cfg.deter_dim, cfg.hidden, 1);
  if (monotone_) {
    // Same calm start as the world model's increment head: begin near a
    // small constant softplus rate rather than an overshoot.
    params_.value(head_.l2.w) *= 1e-2;
    params_.value(head_.l2.b).setConstant(-5.0);
  }
}

Var GruBaseline::step(Tape& t, Var embed, Var action_raw, Var h) const {
  Mat mean(1, 2), inv_std(1, 2);
  mean << cfg_.action_mean[0], cfg_.action_mean[1];
  inv_std << 1.0 / cfg_.action_std[0], 1.0 / cfg_.action_std[1];
  Var a = ad::add_rowvec(action_raw, t.constant(-mean));
  a = ad::mul(a, t.constant(inv_std.replicate(a.rows(), 1)));
  Var a_emb = ad::elu(action_proj_(t, params_, a));
  return gru_(t, params_, ad::concat_cols({embed, a_emb}), h);
}

Var GruBaseline::head_value(Tape& t, Var h) const {
  return head_(t, params_, h);
}

WindowLossParts GruBaseline::window_loss(Tape& t, const WindowBatch& batch,
                                         const LossWeights& w, Rng&,
                                         ad::StFreeze*) {
  int B = batch.batch, L = batch.length;
  Var obs = t.constant(batch.obs);
  Var acts = t.constant(batch.actions);
  Var embed = encoder_(t, params_, obs);
  Var h = t.constant(Mat::Zero(B, cfg_.deter_dim));
  Var outcome{}, cum{};
  for (int step = 0; step < L; ++step) {
    Var e = ad::rows(embed, static_cast<Eigen::Index>(step) * B, B);
    Var a = ad::rows(acts, static_cast<Eigen::Index>(step) * B, B);
    h = this->step(t, e, a, h);
    Var raw = head_value(t, h);
    Var pred;
    if (monotone_) {
      Var lam = ad::softplus(raw);
      if (step == 0) lam = ad::scale(lam, 0.0);
      cum = step == 0 ? lam : ad::add(cum, lam);
      pred = cum;
    } else {
      pred = raw;
    }
    Mat target_col = batch.labels.col(step);
    Var out_t = ad::huber_sum(pred, target_col, w.huber_delta);
    outcome = step == 0 ? out_t : ad::add(outcome, out_t);
  }
  outcome = ad::scale(outcome, 1.0 / B);
  WindowLossParts parts;
  parts.total = ad::scale(outcome, w.alpha);
  parts.outcome = outcome.val()(0, 0);
  return parts;
}

std::vector<double> GruBaseline::predict_track(const Episode& ep,
                                               int max_len) {
  int T = std::min(ep.length(), max_len);
  if (T <= 0) return {};
  Mat obs(T, static_cast<Eigen::Index>(ep.obs_size()));
  Mat acts(T, 2);
  for (int i = 0; i < T; ++i) {
    for (std::size_t j = 0; j < ep.obs_size(); ++j)
      obs(i, static_cast<Eigen::Index>(j)) = ep.frames[i].obs[j];
    acts(i, 0) = i == 0 ? 0.0 : ep.frames[i].dx;
    acts(i, 1) = i == 0 ? 0.0 : ep.frames[i].dy;
  }
  Tape t;
  Var embed = encoder_(t, params_, t.constant(obs));
  Var h = t.constant(Mat::Zero(1, cfg_.deter_dim));
  std::vector<double> out(T);
  double acc = 0.0;
  for (int step = 0; step < T; ++step) {
    Var e = ad::rows(embed, step, 1);
    Var a = t.constant(Mat(acts.row(step)));
    h = this->step(t, e, a, h);
    double raw = head_value(t, h).val()(0, 0);
    if (monotone_) {
      if (step > 0) acc += std::log1p(std::exp(-std::abs(raw))) + std::max(raw, 0.0);
      out[step] = acc;
    } else {
      out[step] = raw;
    }
  }
  return out;
}

std::vector<double> GruBaseline::forecast(const Episode& ep, int t_f,
                                          int horizon, bool zero_actions) {
  if (t_f + horizon >= ep.length())
    throw std::runtime_error("forecast horizon exceeds track length");
  Mat obs(t_f + 1, static_cast<Eigen::Index>(ep.obs_size()));
  for (int i = 0; i <= t_f; ++i)
    for (std::size_t j = 0; j < ep.obs_size(); ++j)
      obs(i, static_cast<Eigen::Index>(j)) = ep.frames[i].obs[j];
  Tape t;
  Var embed = encoder_(t, params_, t.constant(obs));
  Var h = t.constant(Mat::Zero(1, cfg_.deter_dim));
  for (int step = 0; step <= t_f; ++step) {
    Var e = ad::rows(embed, step, 1);
    Mat a(1, 2);
    a(0, 0) = step == 0 ? 0.0 : ep.frames[step].dx;
    a(0, 1) = step == 0 ? 0.0 : ep.frames[step].dy;
    h = this->step(t, e, t.constant(a), h);
  }
  double base = monotone_ ? 0.0 : head_value(t, h).val()(0, 0);
  Var zero_embed = t.constant(Mat::Zero(1, encoder_.embed_dim));
  std::vector<double> out(horizon);
  double acc = 0.0;
  for (int i = 0; i < horizon; ++i) {
    Mat a(1, 2);
    const Frame& f = ep.frames[t_f + 1 + i];
    a(0, 0) = zero_actions ? 0.0 : f.dx;
    a(0, 1) = zero_actions ? 0.0 : f.dy;
    h = this->step(t, zero_embed, t.constant(a), h);
    double raw = head_value(t, h).val()(0, 0);
    if (monotone_) {
      acc += std::log1p(std::exp(-std::abs(raw))) + std::max(raw, 0.0);
      out[i] = acc;
    } else {
      out[i] = raw - base;
    }
  }
  return out;
}

// ---- factory ----

std::unique_ptr<Model> make_model(const std::string& kind,
                                  const ModelConfig& cfg, std::uint64_t seed) {
  if (kind == "blink") return std::make_unique<Blink>(cfg, seed, true);
  if (kind == "blink_no_action")
    return std::make_unique<Blink>(cfg, seed, false);
  if (kind == "frame_ae") return std::make_unique<FrameAe>(cfg, seed);
  if (kind == "gru_regress")
    return std::make_unique<GruBaseline>(cfg, seed, false);
  if (kind == "gru_monotone")
    return std::make_unique<GruBaseline>(cfg, seed, true);
  if (kind == "zero") return std::make_unique<ZeroPredictor>(cfg);
  if (kind == "mean") return std::make_unique<MeanPredictor>(cfg);
  throw std::runtime_error("unknown model kind: " + kind);
}

}  // namespace blink
