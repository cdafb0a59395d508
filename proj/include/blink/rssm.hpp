#pragma once

#include "blink/model.hpp"
#include "blink/nn.hpp"

namespace blink {

struct Belief {
  ad::Var logits;
  ad::Var probs;
};

struct LatentVars {
  ad::Var h;
  ad::Var z;  // one-hot sample (or straight-through surrogate)
};

struct SequenceResult {
  std::vector<LatentVars> states;
  std::vector<Belief> priors;
  std::vector<Belief> posteriors;
};

// Recurrent state-space world model with categorical latents and the
// monotone apoptosis-increment head.
class Blink : public Model {
 public:
  Blink(const ModelConfig& cfg, std::uint64_t seed,
        bool action_conditioned = true);

  std::string kind() const override {
    return action_conditioned_ ? "blink" : "blink_no_action";
  }
  ad::ParamStore& param_store() override { return params_; }
  const ModelConfig& config() const override { return cfg_; }

  // ---- core operations ----
  ad::Var encode(ad::Tape& t, ad::Var obs) const;
  // h_t from (h_{t-1}, z_{t-1}, raw action); standardizes the action and
  // zeroes it for the no-action variant.
  ad::Var recurrent_step(ad::Tape& t, ad::Var h_prev, ad::Var z_prev,
                         ad::Var action_raw) const;
  Belief prior(ad::Tape& t, ad::Var h) const;
  Belief posterior(ad::Tape& t, ad::Var h, ad::Var embed) const;
  ad::Var sample_latent(ad::Tape& t, const Belief& b, Rng* rng,
                        ad::StFreeze* freeze, bool argmax_mode) const;
  ad::Var decode(ad::Tape& t, ad::Var h, ad::Var z) const;
  ad::Var predict_increment(ad::Tape& t, ad::Var h, ad::Var z) const;

  // Posterior filtering over an aligned (obs, action) sequence laid out
  // t-major ([L*B, .] with row t*B+b). h_0 = 0, action[0] = (0,0).
  SequenceResult observe_sequence(ad::Tape& t, const ad::Mat& obs,
                                  const ad::Mat& actions, int batch, int len,
                                  Rng* rng, ad::StFreeze* freeze,
                                  bool argmax_mode) const;

  // Prior-only rollout from a start state; no observation access.
  std::vector<LatentVars> imagine_rollout(ad::Tape& t, const LatentVars& start,
                                          const ad::Mat& actions, Rng* rng,
                                          bool argmax_mode) const;

  // ---- Model interface ----
  WindowLossParts window_loss(ad::Tape& t, const WindowBatch& batch,
                              const LossWeights& w, Rng& rng,
                              ad::StFreeze* freeze) override;
  std::vector<double> predict_track(const Episode& ep, int max_len) override;
  bool supports_forecast() const override { return true; }
  std::vector<double> forecast(const Episode& ep, int t_f, int horizon,
                               bool zero_actions) override;

  // Per-frame latent features (h, posterior z-probabilities) for the
  // behavior pipeline.
  std::vector<Eigen::VectorXd> extract_latents(const Episode& ep);

  int latent_dim() const { return cfg_.deter_dim + cfg_.groups * cfg_.classes; }
  bool action_conditioned() const { return action_conditioned_; }

 private:
  ModelConfig cfg_;
  bool action_conditioned_;
  ad::ParamStore params_;
  nn::ConvEncoder encoder_;
  nn::Linear action_proj_;
  nn::GruCell gru_;
  nn::Mlp prior_head_;
  nn::Mlp posterior_head_;
  nn::ConvDecoder decoder_;
  nn::Mlp increment_head_;
};

}  // namespace blink
