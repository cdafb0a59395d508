#pragma once

#include "blink/model.hpp"
#include "blink/nn.hpp"

namespace blink {

// Constant-zero cumulative predictor.
class ZeroPredictor : public Model {
 public:
  explicit ZeroPredictor(const ModelConfig& cfg) : cfg_(cfg) {}
  std::string kind() const override { return "zero"; }
  ad::ParamStore& param_store() override { return params_; }
  const ModelConfig& config() const override { return cfg_; }
  bool trainable() const override { return false; }
  WindowLossParts window_loss(ad::Tape&, const WindowBatch&, const LossWeights&,
                              Rng&, ad::StFreeze*) override;
  std::vector<double> predict_track(const Episode& ep, int max_len) override;
  bool supports_forecast() const override { return true; }
  std::vector<double> forecast(const Episode&, int, int horizon,
                               bool) override {
    return std::vector<double>(horizon, 0.0);
  }

 private:
  ModelConfig cfg_;
  ad::ParamStore params_;
};

// Predicts the training-set mean final outcome, ramped linearly across the
// track so per-frame series and forecasts are defined.
class MeanPredictor : public Model {
 public:
  explicit MeanPredictor(const ModelConfig& cfg) : cfg_(cfg) {}
  std::string kind() const override { return "mean"; }
  ad::ParamStore& param_store() override { return params_; }
  const ModelConfig& config() const override { return cfg_; }
  bool trainable() const override { return false; }
  WindowLossParts window_loss(ad::Tape&, const WindowBatch&, const LossWeights&,
                              Rng&, ad::StFreeze*) override;
  std::vector<double> predict_track(const Episode& ep, int max_len) override;
  bool supports_forecast() const override { return true; }
  std::vector<double> forecast(const Episode& ep, int t_f, int horizon,
                               bool zero_actions) override;
  void fit_statistics(const std::vector<Episode>& train) override;
  std::string extra_state_json() const override;
  void load_extra_state_json(const std::string& text) override;
  double mean_outcome() const { return mean_outcome_; }

 private:
  ModelConfig cfg_;
  ad::ParamStore params_;
  double mean_outcome_ = 0.0;
};

// Feedforward autoencoder: shared conv encoder/decoder, per-frame head, no
// recurrence and no forecast mode.
class FrameAe : public Model {
 public:
  FrameAe(const ModelConfig& cfg, std::uint64_t seed);
  std::string kind() const override { return "frame_ae"; }
  ad::ParamStore& param_store() override { return params_; }
  const ModelConfig& config() const override { return cfg_; }
  WindowLossParts window_loss(ad::Tape& t, const WindowBatch& batch,
                              const LossWeights& w, Rng& rng,
                              ad::StFreeze* freeze) override;
  std::vector<double> predict_track(const Episode& ep, int max_len) override;
  bool supports_forecast() const override { return false; }
  std::vector<double> forecast(const Episode&, int, int, bool) override {
    throw std::runtime_error("frame_ae has no forecast mode");
  }
  // Per-frame predictions for a stack of observations (statelessness checks).
  std::vector<double> predict_frames(const ad::Mat& obs);

 private:
  ModelConfig cfg_;
  ad::ParamStore params_;
  nn::ConvEncoder encoder_;
  nn::ConvDecoder decoder_;
  nn::Mlp head_;
};

// Deterministic recurrent baselines; `monotone` switches the head between
// direct cumulative regression and accumulated softplus increments.
class GruBaseline : public Model {
 public:
  GruBaseline(const ModelConfig& cfg, std::uint64_t seed, bool monotone);
  std::string kind() const override {
    return monotone_ ? "gru_monotone" : "gru_regress";
  }
  ad::ParamStore& param_store() override { return params_; }
  const ModelConfig& config() const override { return cfg_; }
  WindowLossParts window_loss(ad::Tape& t, const WindowBatch& batch,
                              const LossWeights& w, Rng& rng,
                              ad::StFreeze* freeze) override;
  std::vector<double> predict_track(const Episode& ep, int max_len) override;
  // Deterministic hidden-state propagation with zeroed input embeddings;
  // not a learned latent prior, but the defined forecast mode.
  bool supports_forecast() const override { return true; }
  std::vector<double> forecast(const Episode& ep, int t_f, int horizon,
                               bool zero_actions) override;
  bool monotone() const { return monotone_; }

 private:
  ad::Var step(ad::Tape& t, ad::Var embed, ad::Var action_raw, ad::Var h) const;
  ad::Var head_value(ad::Tape& t, ad::Var h) const;  // raw head output

  ModelConfig cfg_;
  bool monotone_;
  ad::ParamStore params_;
  nn::ConvEncoder encoder_;
  nn::Linear action_proj_;
  nn::GruCell gru_;
  nn::Mlp head_;
};

}  // namespace blink
