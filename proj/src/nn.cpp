#include "blink/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace blink::nn {

Mat init_weight(Rng& rng, Eigen::Index rows, Eigen::Index cols,
                double fan_in) {
  double bound = std::sqrt(3.0 / fan_in);
  Mat w(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i)
      w(i, j) = rng.uniform(-bound, bound);
  return w;
}

void Linear::build(ParamStore& ps, Rng& rng, const std::string& name,
                   int in_dim, int out_dim) {
  in = in_dim;
  out = out_dim;
  Rng r = rng.fork(name);
  w = ps.add(name + ".w", init_weight(r, in_dim, out_dim, in_dim));
  b = ps.add(name + ".b", Mat::Zero(1, out_dim));
}

Var Linear::operator()(Tape& t, const ParamStore& ps, Var x) const {
  return ad::add_rowvec(ad::matmul(x, t.param(ps, w)), t.param(ps, b));
}

void Mlp::build(ParamStore& ps, Rng& rng, const std::string& name, int in_dim,
                int hidden, int out_dim) {
  l1.build(ps, rng, name + ".l1", in_dim, hidden);
  l2.build(ps, rng, name + ".l2", hidden, out_dim);
}

Var Mlp::operator()(Tape& t, const ParamStore& ps, Var x) const {
  return l2(t, ps, ad::elu(l1(t, ps, x)));
}

void Conv::build(ParamStore& ps, Rng& rng, const std::string& name,
                 const ad::ConvSpec& s) {
  spec = s;
  Rng r = rng.fork(name);
  double fan_in = static_cast<double>(s.in_ch) * s.kernel * s.kernel;
  w = ps.add(name + ".w",
             init_weight(r, s.out_ch, s.in_ch * s.kernel * s.kernel, fan_in));
  b = ps.add(name + ".b", Mat::Zero(1, s.out_ch));
}

Var Conv::operator()(Tape& t, const ParamStore& ps, Var x) const {
  return ad::conv2d(x, t.param(ps, w), t.param(ps, b), spec);
}

void Deconv::build(ParamStore& ps, Rng& rng, const std::string& name,
                   const ad::DeconvSpec& s) {
  spec = s;
  Rng r = rng.fork(name);
  double fan_in = static_cast<double>(s.in_ch) * s.kernel * s.kernel;
  w = ps.add(name + ".w",
             init_weight(r, s.in_ch, s.out_ch * s.kernel * s.kernel, fan_in));
  b = ps.add(name + ".b", Mat::Zero(1, s.out_ch));
}

Var Deconv::operator()(Tape& t, const ParamStore& ps, Var x) const {
  return ad::deconv2d(x, t.param(ps, w), t.param(ps, b), spec);
}

void GruCell::build(ParamStore& ps, Rng& rng, const std::string& name,
                    int input_dim, int hidden_dim) {
  input = input_dim;
  hidden = hidden_dim;
  gates.build(ps, rng, name + ".gates", input_dim + hidden_dim,
              2 * hidden_dim);
  candidate.build(ps, rng, name + ".cand", input_dim + hidden_dim, hidden_dim);
}

Var GruCell::operator()(Tape& t, const ParamStore& ps, Var x, Var h) const {
  Var xh = ad::concat_cols({x, h});
  Var g = ad::sigmoid(gates(t, ps, xh));
  Var z = ad::slice_cols(g, 0, hidden);
  Var r = ad::slice_cols(g, hidden, hidden);
  Var n = ad::tanh_(candidate(t, ps, ad::concat_cols({x, ad::mul(r, h)})));
  // h' = (1-z)*n + z*h
  Var one_minus_z = ad::add_scalar(ad::scale(z, -1.0), 1.0);
  return ad::add(ad::mul(one_minus_z, n), ad::mul(z, h));
}

void ConvEncoder::build(ParamStore& ps, Rng& rng, const std::string& name,
                        int channels, int size, int base_ch) {
  if (size % 16 != 0)
    throw std::runtime_error("encoder needs observation size divisible by 16");
  layers.clear();
  int chans[5] = {channels, base_ch, 2 * base_ch, 3 * base_ch, 4 * base_ch};
  int h = size;
  for (int i = 0; i < 4; ++i) {
    ad::ConvSpec s{chans[i], h, h, chans[i + 1], 4, 2, 1};
    Conv c;
    c.build(ps, rng, name + ".conv" + std::to_string(i), s);
    layers.push_back(c);
    h = s.out_h();
  }
  embed_dim = 4 * base_ch * h * h;
}

Var ConvEncoder::operator()(Tape& t, const ParamStore& ps, Var obs) const {
  Var x = obs;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    x = layers[i](t, ps, x);
    x = ad::elu(x);
  }
  return x;
}

void ConvDecoder::build(ParamStore& ps, Rng& rng, const std::string& name,
                        int in_dim, int channels, int size, int base_ch) {
  if (size % 16 != 0)
    throw std::runtime_error("decoder needs observation size divisible by 16");
  int h0 = size / 16;
  fc.build(ps, rng, name + ".fc", in_dim, 4 * base_ch * h0 * h0);
  layers.clear();
  int chans[5] = {4 * base_ch, 3 * base_ch, 2 * base_ch, base_ch, channels};
  int h = h0;
  for (int i = 0; i < 4; ++i) {
    ad::DeconvSpec s{chans[i], h, h, chans[i + 1], 4, 2, 1};
    Deconv d;
    d.build(ps, rng, name + ".deconv" + std::to_string(i), s);
    layers.push_back(d);
    h = s.out_h();
  }
  out_dim = channels * size * size;
}

Var ConvDecoder::operator()(Tape& t, const ParamStore& ps, Var state) const {
  Var x = ad::elu(fc(t, ps, state));
  for (std::size_t i = 0; i < layers.size(); ++i) {
    x = layers[i](t, ps, x);
    if (i + 1 < layers.size()) x = ad::elu(x);
  }
  return x;
}

}  // namespace blink::nn
