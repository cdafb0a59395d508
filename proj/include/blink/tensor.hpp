#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "blink/rng.hpp"

namespace blink::ad {

using Mat = Eigen::MatrixXd;

class Tape;

// Handle into a tape. Cheap to copy; valid while the tape lives.
struct Var {
  Tape* tape = nullptr;
  int idx = -1;
  const Mat& val() const;
  Eigen::Index rows() const { return val().rows(); }
  Eigen::Index cols() const { return val().cols(); }
};

// Named parameter tensors shared between tapes. Values are only mutated by
// the optimizer; forward passes read them concurrently.
class ParamStore {
 public:
  int add(const std::string& name, Mat value);
  int find(const std::string& name) const;  // -1 if absent
  Mat& value(int id) { return values_[id]; }
  const Mat& value(int id) const { return values_[id]; }
  const std::string& name(int id) const { return names_[id]; }
  int size() const { return static_cast<int>(values_.size()); }
  std::size_t scalar_count() const;

  void save(const std::string& path) const;
  void load(const std::string& path);  // shapes must match

 private:
  std::vector<std::string> names_;
  std::vector<Mat> values_;
  std::map<std::string, int> index_;
};

// Captured straight-through samples so a loss can be re-evaluated as a
// smooth function of the parameters (finite-difference checks).
struct StFreeze {
  bool recording = true;
  std::vector<Mat> onehots;
  std::vector<Mat> base_probs;
  std::size_t cursor = 0;
  std::vector<Mat> frozen_consts;  // recorded stop-gradient values
  std::size_t const_cursor = 0;
  void rewind() {
    recording = false;
    cursor = 0;
    const_cursor = 0;
  }
};

class Tape {
 public:
  struct Node {
    Mat value;
    Mat grad;  // empty until touched by backward
    int param_id = -1;
    std::function<void()> backward;  // may be empty (leaf/constant)
  };

  Var leaf(Mat value, int param_id = -1);
  Var constant(Mat value) { return leaf(std::move(value)); }
  Var param(const ParamStore& store, int id) {
    return leaf(store.value(id), id);
  }

  const Mat& value(int idx) const { return nodes_[idx].value; }
  Mat& grad(int idx);  // allocates zeros on first access
  bool has_grad(int idx) const { return nodes_[idx].grad.size() > 0; }

  // Seeds d(loss)=1 and propagates. `loss` must be 1x1.
  void backward(Var loss);

  // Gradient per parameter id, available after backward().
  const std::map<int, Mat>& param_grads() const { return param_grads_; }

  std::size_t node_count() const { return nodes_.size(); }

  std::vector<Node> nodes_;

 private:
  std::map<int, Mat> param_grads_;
};

// ---- elementwise / linear algebra ops ----
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);  // elementwise
Var scale(Var a, double k);
Var add_scalar(Var a, double k);
Var matmul(Var a, Var b);
Var add_rowvec(Var x, Var b);  // x: [N,F], b: [1,F]
Var concat_cols(const std::vector<Var>& xs);
Var slice_cols(Var x, Eigen::Index start, Eigen::Index len);
Var rows(Var x, Eigen::Index start, Eigen::Index len);

Var tanh_(Var x);
Var sigmoid(Var x);
Var elu(Var x);
Var softplus(Var x);
Var exp_(Var x);
Var log_(Var x);
Var stopgrad(Var x);
// Freeze-aware variant: replaying holds the value captured during the
// recording pass, so finite differences see only differentiable paths.
Var stopgrad(Var x, StFreeze* freeze);

// Softmax applied independently to each of K contiguous groups of C columns.
Var softmax_groups(Var logits, int groups, int classes);

Var sum_all(Var x);   // -> 1x1
Var mean_all(Var x);  // -> 1x1

// 0.5 * sum((x - target)^2); the unit-variance Gaussian NLL up to a constant.
Var gaussian_nll_sum(Var x, const Mat& target);
// Sum of elementwise Huber losses against a constant target.
Var huber_sum(Var pred, const Mat& target, double delta);

// One-hot sample per group with pass-through gradient. When `freeze` is
// given and not recording, replays captured samples as
// onehot + probs - base_probs so the value is differentiable in probs.
Var straight_through_sample(Var probs, int groups, int classes, Rng* rng,
                            StFreeze* freeze = nullptr,
                            bool argmax_mode = false);

// ---- spatial ops (NCHW, rows are flattened images) ----
struct ConvSpec {
  int in_ch, in_h, in_w;
  int out_ch;
  int kernel, stride, pad;
  int out_h() const { return (in_h + 2 * pad - kernel) / stride + 1; }
  int out_w() const { return (in_w + 2 * pad - kernel) / stride + 1; }
};

// x: [N, in_ch*in_h*in_w], w: [out_ch, in_ch*k*k], b: [1, out_ch]
Var conv2d(Var x, Var w, Var b, const ConvSpec& spec);
// Transposed convolution: x: [N, in_ch*in_h*in_w] ->
// [N, out_ch*H*W] with H = (in_h-1)*stride - 2*pad + kernel.
// w: [in_ch, out_ch*k*k], b: [1, out_ch]
struct DeconvSpec {
  int in_ch, in_h, in_w;
  int out_ch;
  int kernel, stride, pad;
  int out_h() const { return (in_h - 1) * stride - 2 * pad + kernel; }
  int out_w() const { return (in_w - 1) * stride - 2 * pad + kernel; }
};
Var deconv2d(Var x, Var w, Var b, const DeconvSpec& spec);

double huber_scalar(double pred, double target, double delta);

}  // namespace blink::ad
