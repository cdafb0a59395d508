#pragma once

#include "blink/tensor.hpp"

namespace blink {

struct LossWeights {
  double alpha = 10.0;  // outcome weight
  double beta = 0.3;    // KL weight
  double kl_mix = 0.8;  // balancing: weight on KL(sg(post) || prior)
  double huber_delta = 1.0;
};

// recon + beta*kl + alpha*outcome. Scalar form used by tests and logging.
double loss_joint(double recon_nll, double kl, double outcome_loss,
                  const LossWeights& w);
ad::Var loss_joint(ad::Var recon_nll, ad::Var kl, ad::Var outcome_loss,
                   const LossWeights& w);

// Sum over K groups of KL(post || prior) from probability rows [N, K*C].
// Value equals the plain KL; gradients are balanced between the two sides
// by `mix` via stop-gradients.
ad::Var kl_categorical(ad::Var post_probs, ad::Var prior_probs, int groups,
                       int classes, double mix,
                       ad::StFreeze* freeze = nullptr);
double kl_categorical_value(const ad::Mat& post_probs,
                            const ad::Mat& prior_probs);

double huber(double pred, double target, double delta);

// Prefix sums of nonnegative per-frame increments; throws on negative input.
std::vector<double> accumulate_increments(const std::vector<double>& lambda);

}  // namespace blink
