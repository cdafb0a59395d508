#pragma once

#include <memory>
#include <string>
#include <vector>

#include "blink/model.hpp"

namespace blink {

struct TrainConfig {
  double alpha = 10.0;
  double beta = 0.3;
  double kl_mix = 0.8;
  double huber_delta = 1.0;
  int window = 50;  // L
  int batch = 8;    // windows per step
  double lr = 3e-4;
  int epochs = 10;
  double grad_clip = 100.0;
  std::uint64_t seed = 0;
  int windows_per_episode = 1;  // random-start draws per episode per epoch

  LossWeights weights() const {
    return LossWeights{alpha, beta, kl_mix, huber_delta};
  }
  std::string to_json() const;
  static TrainConfig from_json(const std::string& text);
};

// Adaptive-moment gradient descent with global-norm clipping.
class Adam {
 public:
  Adam(ad::ParamStore& params, double lr, double clip);
  void step(const std::map<int, ad::Mat>& grads);

 private:
  ad::ParamStore& params_;
  double lr_, clip_;
  double beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
  int t_ = 0;
  std::vector<ad::Mat> m_, v_;
};

struct TrainResult {
  double best_val_mae = 0.0;
  int best_epoch = -1;
  std::vector<double> epoch_total_loss;
};

void compute_action_stats(const std::vector<Episode>& train, ModelConfig& cfg);

// Optimizes the model on random windows, logging one CSV row per epoch and
// retaining the best-on-validation parameters. Writes checkpoint.bin,
// config.json and train_log.csv under out_dir.
TrainResult train_model(Model& model, const std::vector<Episode>& train,
                        const std::vector<Episode>& val,
                        const TrainConfig& cfg, const std::string& out_dir);

void save_checkpoint(Model& model, const TrainConfig& cfg,
                     const std::string& out_dir);
std::unique_ptr<Model> load_checkpoint(const std::string& dir);

// Mean absolute error of final cumulative predictions over full tracks.
double track_mae(Model& model, const std::vector<Episode>& eps,
                 int max_len = 600);

}  // namespace blink
