#include <doctest.h>

#include <cmath>

#include "blink/nn.hpp"

using namespace blink;
using namespace blink::ad;
using namespace blink::nn;

TEST_CASE("linear layer computes xW + b") {
  ParamStore ps;
  Rng rng(1);
  Linear lin;
  lin.build(ps, rng, "lin", 3, 2);
  Mat x(2, 3);
  x << 1, 2, 3, -1, 0, 1;
  Tape t;
  Var out = lin(t, ps, t.leaf(x));
  Mat expect = x * ps.value(lin.w);
  expect.rowwise() += ps.value(lin.b).row(0);
  CHECK(out.val().isApprox(expect));
}

TEST_CASE("weight init respects the fan-in bound and is deterministic") {
  Rng a(7), b(7);
  Mat wa = init_weight(a, 64, 32, 64);
  Mat wb = init_weight(b, 64, 32, 64);
  CHECK(wa.isApprox(wb));
  double bound = std::sqrt(3.0 / 64.0);
  CHECK(wa.cwiseAbs().maxCoeff() <= bound);
  CHECK(wa.cwiseAbs().maxCoeff() > 0.5 * bound);  // not degenerate
}

TEST_CASE("gru cell matches a hand-rolled reference") {
  ParamStore ps;
  Rng rng(3);
  GruCell gru;
  gru.build(ps, rng, "gru", 3, 4);
  Mat x(2, 3), h(2, 4);
  Rng data(5);
  for (int i = 0; i < x.size(); ++i) x.data()[i] = data.gaussian();
  for (int i = 0; i < h.size(); ++i) h.data()[i] = 0.5 * data.gaussian();

  Tape t;
  Var out = gru(t, ps, t.leaf(x), t.leaf(h));

  // Reference: gates on [x,h], candidate on [x, r*h].
  Mat xh(2, 7);
  xh << x, h;
  Mat g = xh * ps.value(gru.gates.w);
  g.rowwise() += ps.value(gru.gates.b).row(0);
  Mat z = (1.0 / (1.0 + (-g.leftCols(4).array()).exp())).matrix();
  Mat r = (1.0 / (1.0 + (-g.rightCols(4).array()).exp())).matrix();
  Mat xrh(2, 7);
  xrh << x, (r.array() * h.array()).matrix();
  Mat n = xrh * ps.value(gru.candidate.w);
  n.rowwise() += ps.value(gru.candidate.b).row(0);
  n = n.array().tanh().matrix();
  Mat expect =
      ((1.0 - z.array()) * n.array() + z.array() * h.array()).matrix();
  CHECK(out.val().isApprox(expect, 1e-12));
}

TEST_CASE("gru with zero state and zero input stays bounded") {
  ParamStore ps;
  Rng rng(4);
  GruCell gru;
  gru.build(ps, rng, "gru", 2, 8);
  Tape t;
  Var h = t.constant(Mat::Zero(1, 8));
  Var x = t.constant(Mat::Zero(1, 2));
  for (int i = 0; i < 50; ++i) h = gru(t, ps, x, h);
  CHECK(h.val().cwiseAbs().maxCoeff() <= 1.0);
}

TEST_CASE("conv encoder/decoder shapes are mirrors") {
  ParamStore ps;
  Rng rng(5);
  int C = 3, S = 32, base = 4;
  ConvEncoder enc;
  enc.build(ps, rng, "enc", C, S, base);
  // Four stride-2 layers: 32 -> 16 -> 8 -> 4 -> 2 with 4*base channels.
  CHECK(enc.embed_dim == 4 * base * 2 * 2);

  ConvDecoder dec;
  dec.build(ps, rng, "dec", 10, C, S, base);
  CHECK(dec.out_dim == C * S * S);

  Tape t;
  Mat obs = Mat::Random(2, C * S * S);
  Var e = enc(t, ps, t.leaf(obs));
  CHECK(e.val().rows() == 2);
  CHECK(e.val().cols() == enc.embed_dim);
  Var img = dec(t, ps, t.constant(Mat::Random(2, 10)));
  CHECK(img.val().cols() == C * S * S);
}

TEST_CASE("mlp gradients reach both layers") {
  ParamStore ps;
  Rng rng(6);
  Mlp mlp;
  mlp.build(ps, rng, "mlp", 4, 8, 2);
  Tape t;
  Var out = mlp(t, ps, t.constant(Mat::Random(3, 4)));
  t.backward(ad::sum_all(out));
  CHECK(t.param_grads().count(mlp.l1.w) == 1);
  CHECK(t.param_grads().count(mlp.l2.w) == 1);
  CHECK(t.param_grads().at(mlp.l1.w).norm() > 0.0);
}
