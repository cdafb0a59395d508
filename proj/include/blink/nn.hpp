#pragma once

#include <string>
#include <vector>

#include "blink/rng.hpp"
#include "blink/tensor.hpp"

namespace blink::nn {

using ad::Mat;
using ad::ParamStore;
using ad::Tape;
using ad::Var;

// Deterministic fan-in scaled uniform init (Glorot-style).
Mat init_weight(Rng& rng, Eigen::Index rows, Eigen::Index cols, double fan_in);

struct Linear {
  int w = -1, b = -1;
  int in = 0, out = 0;
  void build(ParamStore& ps, Rng& rng, const std::string& name, int in_dim,
             int out_dim);
  Var operator()(Tape& t, const ParamStore& ps, Var x) const;
};

// out = act(W2 act(W1 x + b1) + b2) shaped by callers; this is just the
// two affine layers with ELU in between.
struct Mlp {
  Linear l1, l2;
  void build(ParamStore& ps, Rng& rng, const std::string& name, int in_dim,
             int hidden, int out_dim);
  Var operator()(Tape& t, const ParamStore& ps, Var x) const;  // ELU hidden
};

struct Conv {
  int w = -1, b = -1;
  ad::ConvSpec spec;
  void build(ParamStore& ps, Rng& rng, const std::string& name,
             const ad::ConvSpec& s);
  Var operator()(Tape& t, const ParamStore& ps, Var x) const;
};

struct Deconv {
  int w = -1, b = -1;
  ad::DeconvSpec spec;
  void build(ParamStore& ps, Rng& rng, const std::string& name,
             const ad::DeconvSpec& s);
  Var operator()(Tape& t, const ParamStore& ps, Var x) const;
};

// Standard GRU cell on concatenated input.
struct GruCell {
  Linear gates;      // -> [update, reset] (2*hidden)
  Linear candidate;  // -> hidden
  int input = 0, hidden = 0;
  void build(ParamStore& ps, Rng& rng, const std::string& name, int input_dim,
             int hidden_dim);
  Var operator()(Tape& t, const ParamStore& ps, Var x, Var h) const;
};

// Strided conv encoder: obs -> flat embedding. Spatial size must be a
// power-of-two multiple of the final 2x2 (or 1x1) grid.
struct ConvEncoder {
  std::vector<Conv> layers;
  int embed_dim = 0;
  void build(ParamStore& ps, Rng& rng, const std::string& name, int channels,
             int size, int base_ch);
  Var operator()(Tape& t, const ParamStore& ps, Var obs) const;
};

// Mirror of ConvEncoder: latent -> image, linear head into the conv stack.
struct ConvDecoder {
  Linear fc;
  std::vector<Deconv> layers;
  int out_dim = 0;
  void build(ParamStore& ps, Rng& rng, const std::string& name, int in_dim,
             int channels, int size, int base_ch);
  Var operator()(Tape& t, const ParamStore& ps, Var state) const;
};

}  // namespace blink::nn
