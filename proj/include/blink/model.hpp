#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "blink/dataset.hpp"
#include "blink/episode.hpp"
#include "blink/loss.hpp"
#include "blink/tensor.hpp"

namespace blink {

// Architecture knobs shared by every learned model so the whole ladder
// trains under one protocol.
struct ModelConfig {
  int obs_channels = 3;
  int obs_size = 32;
  int conv_base = 16;   // encoder/decoder channel multiplier
  int deter_dim = 200;  // recurrent state width
  int groups = 16;      // categorical latent groups (K)
  int classes = 16;     // classes per group (C)
  int hidden = 128;     // head MLP width
  int action_embed = 16;
  // Training-set displacement statistics; actions are standardized before
  // entering the recurrent core.
  double action_mean[2] = {0.0, 0.0};
  double action_std[2] = {1.0, 1.0};

  int obs_dim() const { return obs_channels * obs_size * obs_size; }
  std::string to_json() const;
  static ModelConfig from_json(const std::string& text);
};

// One training batch of B windows of length L.
struct WindowBatch {
  int batch = 0;
  int length = 0;
  ad::Mat obs;      // [L*B, obs_dim], row t*B + b
  ad::Mat actions;  // [L*B, 2], raw pixel displacements
  ad::Mat labels;   // [B, L] relative cumulative outcomes
};

WindowBatch build_batch(std::span<const WindowSample> windows);

struct WindowLossParts {
  ad::Var total;
  double recon = 0.0, kl = 0.0, outcome = 0.0;
};

class Model {
 public:
  virtual ~Model() = default;
  virtual std::string kind() const = 0;
  virtual ad::ParamStore& param_store() = 0;
  virtual const ModelConfig& config() const = 0;
  virtual bool trainable() const { return true; }

  // Loss over one batch, built on the given tape (caller runs backward).
  virtual WindowLossParts window_loss(ad::Tape& t, const WindowBatch& batch,
                                      const LossWeights& w, Rng& rng,
                                      ad::StFreeze* freeze = nullptr) = 0;

  // Filtering prediction over a full track (observations available at every
  // frame), truncated to max_len. Deterministic; first element is 0 for
  // monotone models.
  virtual std::vector<double> predict_track(const Episode& ep,
                                            int max_len) = 0;

  virtual bool supports_forecast() const = 0;
  // Relative cumulative predictions for frames t_f+1 .. t_f+horizon, zeroed
  // at t_f, with no access to observations past t_f.
  virtual std::vector<double> forecast(const Episode& ep, int t_f, int horizon,
                                       bool zero_actions) = 0;

  // Hook for stats learned outside SGD (the mean predictor).
  virtual void fit_statistics(const std::vector<Episode>&) {}
  virtual std::string extra_state_json() const { return "{}"; }
  virtual void load_extra_state_json(const std::string&) {}
};

std::unique_ptr<Model> make_model(const std::string& kind,
                                  const ModelConfig& cfg, std::uint64_t seed);

}  // namespace blink
