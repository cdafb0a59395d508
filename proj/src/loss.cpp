#include "blink/loss.hpp"

#include <cmath>
#include <stdexcept>

namespace blink {

double loss_joint(double recon_nll, double kl, double outcome_loss,
                  const LossWeights& w) {
  if (!std::isfinite(recon_nll) || !std::isfinite(kl) ||
      !std::isfinite(outcome_loss))
    throw std::runtime_error("non-finite loss component");
  return recon_nll + w.beta * kl + w.alpha * outcome_loss;
}

ad::Var loss_joint(ad::Var recon_nll, ad::Var kl, ad::Var outcome_loss,
                   const LossWeights& w) {
  return ad::add(recon_nll,
                 ad::add(ad::scale(kl, w.beta), ad::scale(outcome_loss, w.alpha)));
}

namespace {
// p=0 terms contribute exactly 0; the epsilon only guards log(0).
constexpr double kLogEps = 1e-300;

ad::Var kl_term(ad::Var p, ad::Var q) {
  ad::Var logp = ad::log_(ad::add_scalar(p, kLogEps));
  ad::Var logq = ad::log_(ad::add_scalar(q, kLogEps));
  return ad::sum_all(ad::mul(p, ad::sub(logp, logq)));
}
}  // namespace

ad::Var kl_categorical(ad::Var post_probs, ad::Var prior_probs, int groups,
                       int classes, double mix, ad::StFreeze* freeze) {
  (void)groups;
  (void)classes;  // KL sums over all groups at once
  ad::Var lhs = kl_term(ad::stopgrad(post_probs, freeze), prior_probs);
  ad::Var rhs = kl_term(post_probs, ad::stopgrad(prior_probs, freeze));
  return ad::add(ad::scale(lhs, mix), ad::scale(rhs, 1.0 - mix));
}

double kl_categorical_value(const ad::Mat& post_probs,
                            const ad::Mat& prior_probs) {
  double kl = 0.0;
  for (Eigen::Index j = 0; j < post_probs.cols(); ++j)
    for (Eigen::Index i = 0; i < post_probs.rows(); ++i) {
      double p = post_probs(i, j);
      if (p > 0.0) kl += p * (std::log(p) - std::log(prior_probs(i, j)));
    }
  return kl;
}

double huber(double pred, double target, double delta) {
  if (delta <= 0.0) throw std::runtime_error("huber delta must be positive");
  return ad::huber_scalar(pred, target, delta);
}

std::vector<double> accumulate_increments(const std::vector<double>& lambda) {
  std::vector<double> cum(lambda.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    if (lambda[i] < 0.0)
      throw std::runtime_error("negative increment violates the contract");
    acc += lambda[i];
    cum[i] = acc;
  }
  return cum;
}

}  // namespace blink
