#include "blink/rssm.hpp"

#include <cmath>
#include <json.hpp>

namespace blink {

using ad::Mat;
using ad::Tape;
using ad::Var;
using nlohmann::json;

std::string ModelConfig::to_json() const {
  json j;
  j["obs_channels"] = obs_channels;
  j["obs_size"] = obs_size;
  j["conv_base"] = conv_base;
  j["deter_dim"] = deter_dim;
  j["groups"] = groups;
  j["classes"] = classes;
  j["hidden"] = hidden;
  j["action_embed"] = action_embed;
  j["action_mean"] = {action_mean[0], action_mean[1]};
  j["action_std"] = {action_std[0], action_std[1]};
  return j.dump();
}

ModelConfig ModelConfig::from_json(const std::string& text) {
  json j = json::parse(text);
  ModelConfig c;
  c.obs_channels = j.value("obs_channels", c.obs_channels);
  c.obs_size = j.value("obs_size", c.obs_size);
  c.conv_base = j.value("conv_base", c.conv_base);
  c.deter_dim = j.value("deter_dim", c.deter_dim);
  c.groups = j.value("groups", c.groups);
  c.classes = j.value("classes", c.classes);
  c.hidden = j.value("hidden", c.hidden);
  c.action_embed = j.value("action_embed", c.action_embed);
  if (j.contains("action_mean")) {
    c.action_mean[0] = j["action_mean"][0];
    c.action_mean[1] = j["action_mean"][1];
  }
  if (j.contains("action_std")) {
    c.action_std[0] = j["action_std"][0];
    c.action_std[1] = j["action_std"][1];
  }
  return c;
}

WindowBatch build_batch(std::span<const WindowSample> windows) {
  WindowBatch b;
  b.batch = static_cast<int>(windows.size());
  b.length = windows.front().length;
  const Episode& first = *windows.front().ep;
  Eigen::Index D = static_cast<Eigen::Index>(first.obs_size());
  b.obs.resize(static_cast<Eigen::Index>(b.length) * b.batch, D);
  b.actions.resize(static_cast<Eigen::Index>(b.length) * b.batch, 2);
  b.labels.resize(b.batch, b.length);
  for (int w = 0; w < b.batch; ++w) {
    const WindowSample& ws = windows[w];
    for (int t = 0; t < b.length; ++t) {
      const Frame& f = ws.ep->frames[ws.t0 + t];
      Eigen::Index row = static_cast<Eigen::Index>(t) * b.batch + w;
      for (Eigen::Index i = 0; i < D; ++i) b.obs(row, i) = f.obs[i];
      // The window is treated as its own sequence: no displacement precedes
      // its first frame.
      b.actions(row, 0) = t == 0 ? 0.0 : f.dx;
      b.actions(row, 1) = t == 0 ? 0.0 : f.dy;
      b.labels(w, t) = ws.rel_label[t];
    }
  }
  return b;
}

Blink::Blink(const ModelConfig& cfg, std::uint64_t seed,
             bool action_conditioned)
    : cfg_(cfg), action_conditioned_(action_conditioned) {
  Rng rng(seed, Rng::hash("blink-init"));
  encoder_.build(params_, rng, "encoder", cfg.obs_channels, cfg.obs_size,
                 cfg.conv_base);
  action_proj_.build(params_, rng, "action_proj", 2, cfg.action_embed);
  int zdim = cfg.groups * cfg.classes;
  gru_.build(params_, rng, "gru", zdim + cfg.action_embed, cfg.deter_dim);
  prior_head_.build(params_, rng, "prior", cfg.deter_dim, cfg.hidden, zdim);
  posterior_head_.build(params_, rng, "posterior",
                        cfg.deter_dim + encoder_.embed_dim, cfg.hidden, zdim);
  decoder_.build(params_, rng, "decoder", cfg.deter_dim + zdim,
                 cfg.obs_channels, cfg.obs_size, cfg.conv_base);
  increment_head_.build(params_, rng, "increment", cfg.deter_dim + zdim,
                        cfg.hidden, 1);
  // Calm start for the increment head: shrunken output weights and a
  // negative bias, so training begins near a small constant rate
  // (softplus(-5) per frame) instead of an overshoot that Huber then
  // crushes into the vanishing-gradient tail of the softplus.
  params_.value(increment_head_.l2.w) *= 1e-2;
  params_.value(increment_head_.l2.b).setConstant(-5.0);
}

Var Blink::encode(Tape& t, Var obs) const { return encoder_(t, params_, obs); }

Var Blink::recurrent_step(Tape& t, Var h_prev, Var z_prev,
                          Var action_raw) const {
  Var a = action_raw;
  if (action_conditioned_) {
    Mat mean(1, 2), inv_std(1, 2);
    mean << cfg_.action_mean[0], cfg_.action_mean[1];
    inv_std << 1.0 / cfg_.action_std[0], 1.0 / cfg_.action_std[1];
    Var centered = ad::add_rowvec(a, t.constant(-mean));
    a = ad::mul(centered, t.constant(inv_std.replicate(a.rows(), 1)));
  } else {
    a = t.constant(Mat::Zero(action_raw.rows(), 2));
  }
  Var a_emb = ad::elu(action_proj_(t, params_, a));
  Var input = ad::concat_cols({z_prev, a_emb});
  return gru_(t, params_, input, h_prev);
}

Belief Blink::prior(Tape& t, Var h) const {
  Var logits = prior_head_(t, params_, h);
  return {logits, ad::softmax_groups(logits, cfg_.groups, cfg_.classes)};
}

Belief Blink::posterior(Tape& t, Var h, Var embed) const {
  Var logits = posterior_head_(t, params_, ad::concat_cols({h, embed}));
  return {logits, ad::softmax_groups(logits, cfg_.groups, cfg_.classes)};
}

Var Blink::sample_latent(Tape& t, const Belief& b, Rng* rng,
                         ad::StFreeze* freeze, bool argmax_mode) const {
  (void)t;
  return ad::straight_through_sample(b.probs, cfg_.groups, cfg_.classes, rng,
                                     freeze, argmax_mode);
}

Var Blink::decode(Tape& t, Var h, Var z) const {
  return decoder_(t, params_, ad::concat_cols({h, z}));
}

Var Blink::predict_increment(Tape& t, Var h, Var z) const {
  return ad::softplus(increment_head_(t, params_, ad::concat_cols({h, z})));
}

SequenceResult Blink::observe_sequence(Tape& t, const Mat& obs,
                                       const Mat& actions, int batch, int len,
                                       Rng* rng, ad::StFreeze* freeze,
                                       bool argmax_mode) const {
  if (obs.rows() != static_cast<Eigen::Index>(batch) * len ||
      actions.rows() != obs.rows())
    throw std::runtime_error("observe_sequence: sequence length mismatch");
  SequenceResult res;
  Var obs_v = t.constant(obs);
  Var act_v = t.constant(actions);
  Var embed = encode(t, obs_v);
  Var h = t.constant(Mat::Zero(batch, cfg_.deter_dim));
  Var z{};
  for (int step = 0; step < len; ++step) {
    if (step > 0) {
      Var a = ad::rows(act_v, static_cast<Eigen::Index>(step - 1) * batch,
                       batch);
      h = recurrent_step(t, h, z, a);
    }
    Var e = ad::rows(embed, static_cast<Eigen::Index>(step) * batch, batch);
    Belief pri = prior(t, h);
    Belief post = posterior(t, h, e);
    z = sample_latent(t, post, rng, freeze, argmax_mode);
    res.states.push_back({h, z});
    res.priors.push_back(pri);
    res.posteriors.push_back(post);
  }
  return res;
}

std::vector<LatentVars> Blink::imagine_rollout(Tape& t, const LatentVars& start,
                                               const Mat& actions, Rng* rng,
                                               bool argmax_mode) const {
  if (actions.rows() < 1)
    throw std::runtime_error("imagine_rollout needs at least one step");
  std::vector<LatentVars> out;
  Var h = start.h;
  Var z = start.z;
  for (Eigen::Index i = 0; i < actions.rows(); ++i) {
    Var a = t.constant(Mat(actions.row(i)));
    h = recurrent_step(t, h, z, a);
    Belief pri = prior(t, h);
    z = sample_latent(t, pri, rng, nullptr, argmax_mode);
    out.push_back({h, z});
  }
  return out;
}

WindowLossParts Blink::window_loss(Tape& t, const WindowBatch& batch,
                                   const LossWeights& w, Rng& rng,
                                   ad::StFreeze* freeze) {
  int B = batch.batch, L = batch.length;
  SequenceResult seq = observe_sequence(t, batch.obs, batch.actions, B, L,
                                        &rng, freeze, false);
  Var recon{}, kl{}, outcome{}, cum{};
  for (int step = 0; step < L; ++step) {
    const LatentVars& s = seq.states[step];
    Var xhat = decode(t, s.h, s.z);
    Mat target = batch.obs.middleRows(static_cast<Eigen::Index>(step) * B, B);
    Var recon_t = ad::gaussian_nll_sum(xhat, target);
    recon = step == 0 ? recon_t : ad::add(recon, recon_t);
    Var kl_t = kl_categorical(seq.posteriors[step].probs,
                              seq.priors[step].probs, cfg_.groups,
                              cfg_.classes, w.kl_mix, freeze);
    kl = step == 0 ? kl_t : ad::add(kl, kl_t);
    Var lam = predict_increment(t, s.h, s.z);
    if (step == 0) lam = ad::scale(lam, 0.0);  // window-start convention
    cum = step == 0 ? lam : ad::add(cum, lam);
    Mat target_col = batch.labels.col(step);
    Var out_t = ad::huber_sum(cum, target_col, w.huber_delta);
    outcome = step == 0 ? out_t : ad::add(outcome, out_t);
  }
  double inv_b = 1.0 / B;
  recon = ad::scale(recon, inv_b);
  kl = ad::scale(kl, inv_b);
  outcome = ad::scale(outcome, inv_b);
  WindowLossParts parts;
  parts.total = loss_joint(recon, kl, outcome, w);
  parts.recon = recon.val()(0, 0);
  parts.kl = kl.val()(0, 0);
  parts.outcome = outcome.val()(0, 0);
  return parts;
}

namespace {

void fill_track_inputs(const Episode& ep, int T, Mat& obs, Mat& actions) {
  Eigen::Index D = static_cast<Eigen::Index>(ep.obs_size());
  obs.resize(T, D);
  actions.resize(T, 2);
  for (int t = 0; t < T; ++t) {
    const Frame& f = ep.frames[t];
    for (Eigen::Index i = 0; i < D; ++i) obs(t, i) = f.obs[i];
    actions(t, 0) = t == 0 ? 0.0 : f.dx;
    actions(t, 1) = t == 0 ? 0.0 : f.dy;
  }
}

}  // namespace

std::vector<double> Blink::predict_track(const Episode& ep, int max_len) {
  int T = std::min(ep.length(), max_len);
  if (T <= 0) return {};
  Mat obs, actions;
  fill_track_inputs(ep, T, obs, actions);
  Tape t;
  SequenceResult seq =
      observe_sequence(t, obs, actions, 1, T, nullptr, nullptr, true);
  std::vector<double> cum(T);
  double acc = 0.0;
  for (int step = 0; step < T; ++step) {
    if (step > 0) {
      Tape& tp = t;
      Var lam = predict_increment(tp, seq.states[step].h, seq.states[step].z);
      acc += lam.val()(0, 0);
    }
    cum[step] = acc;
  }
  return cum;
}

std::vector<double> Blink::forecast(const Episode& ep, int t_f, int horizon,
                                    bool zero_actions) {
  if (t_f + horizon >= ep.length())
    throw std::runtime_error("forecast horizon exceeds track length");
  Mat obs, actions;
  fill_track_inputs(ep, t_f + 1, obs, actions);
  Tape t;
  SequenceResult seq =
      observe_sequence(t, obs, actions, 1, t_f + 1, nullptr, nullptr, true);
  Mat future(horizon, 2);
  for (int i = 0; i < horizon; ++i) {
    const Frame& f = ep.frames[t_f + 1 + i];
    future(i, 0) = zero_actions ? 0.0 : f.dx;
    future(i, 1) = zero_actions ? 0.0 : f.dy;
  }
  std::vector<LatentVars> imagined =
      imagine_rollout(t, seq.states.back(), future, nullptr, true);
  std::vector<double> cum(horizon);
  double acc = 0.0;
  for (int i = 0; i < horizon; ++i) {
    Var lam = predict_increment(t, imagined[i].h, imagined[i].z);
    acc += lam.val()(0, 0);
    cum[i] = acc;
  }
  return cum;
}

std::vector<Eigen::VectorXd> Blink::extract_latents(const Episode& ep) {
  int T = ep.length();
  if (T == 0) return {};
  Mat obs, actions;
  fill_track_inputs(ep, T, obs, actions);
  Tape t;
  SequenceResult seq =
      observe_sequence(t, obs, actions, 1, T, nullptr, nullptr, true);
  std::vector<Eigen::VectorXd> feats(T);
  int zdim = cfg_.groups * cfg_.classes;
  for (int step = 0; step < T; ++step) {
    Eigen::VectorXd v(cfg_.deter_dim + zdim);
    v.head(cfg_.deter_dim) = seq.states[step].h.val().row(0);
    v.tail(zdim) = seq.posteriors[step].probs.val().row(0);
    feats[step] = v;
  }
  return feats;
}

}  // namespace blink
