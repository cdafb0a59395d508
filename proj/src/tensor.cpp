#include "blink/tensor.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>

namespace blink::ad {

const Mat& Var::val() const { return tape->value(idx); }

// ---- ParamStore ----

int ParamStore::add(const std::string& name, Mat value) {
  if (index_.count(name)) throw std::runtime_error("duplicate param: " + name);
  int id = static_cast<int>(values_.size());
  names_.push_back(name);
  values_.push_back(std::move(value));
  index_[name] = id;
  return id;
}

int ParamStore::find(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? -1 : it->second;
}

std::size_t ParamStore::scalar_count() const {
  std::size_t n = 0;
  for (const Mat& m : values_) n += static_cast<std::size_t>(m.size());
  return n;
}

void ParamStore::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  std::uint64_t count = values_.size();
  out.write(reinterpret_cast<const char*>(&count), 8);
  for (int i = 0; i < size(); ++i) {
    std::uint64_t len = names_[i].size();
    out.write(reinterpret_cast<const char*>(&len), 8);
    out.write(names_[i].data(), static_cast<std::streamsize>(len));
    std::uint64_t r = values_[i].rows(), c = values_[i].cols();
    out.write(reinterpret_cast<const char*>(&r), 8);
    out.write(reinterpret_cast<const char*>(&c), 8);
    out.write(reinterpret_cast<const char*>(values_[i].data()),
              static_cast<std::streamsize>(values_[i].size() * 8));
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

void ParamStore::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::uint64_t count = 0;
  in.read(reinterpret_cast<char*>(&count), 8);
  if (count != values_.size())
    throw std::runtime_error("checkpoint tensor count mismatch: " + path);
  for (std::uint64_t i = 0; i < count; ++i) {
    std::uint64_t len = 0;
    in.read(reinterpret_cast<char*>(&len), 8);
    std::string name(len, '\0');
    in.read(name.data(), static_cast<std::streamsize>(len));
    int id = find(name);
    if (id < 0) throw std::runtime_error("unknown tensor in checkpoint: " + name);
    std::uint64_t r = 0, c = 0;
    in.read(reinterpret_cast<char*>(&r), 8);
    in.read(reinterpret_cast<char*>(&c), 8);
    Mat& dst = values_[id];
    if (static_cast<Eigen::Index>(r) != dst.rows() ||
        static_cast<Eigen::Index>(c) != dst.cols())
      throw std::runtime_error("shape mismatch for tensor " + name);
    in.read(reinterpret_cast<char*>(dst.data()),
            static_cast<std::streamsize>(dst.size() * 8));
  }
  if (!in) throw std::runtime_error("truncated checkpoint: " + path);
}

// ---- Tape ----

Var Tape::leaf(Mat value, int param_id) {
  Node n;
  n.value = std::move(value);
  n.param_id = param_id;
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<int>(nodes_.size() - 1)};
}

Mat& Tape::grad(int idx) {
  Node& n = nodes_[idx];
  if (n.grad.size() == 0) n.grad = Mat::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

void Tape::backward(Var loss) {
  if (loss.val().size() != 1)
    throw std::runtime_error("backward expects a scalar loss");
  param_grads_.clear();
  grad(loss.idx)(0, 0) = 1.0;
  for (int i = static_cast<int>(nodes_.size()) - 1; i >= 0; --i) {
    Node& n = nodes_[i];
    if (n.grad.size() == 0) continue;  // not on any path to the loss
    if (n.backward) n.backward();
    if (n.param_id >= 0) {
      auto it = param_grads_.find(n.param_id);
      if (it == param_grads_.end())
        param_grads_[n.param_id] = n.grad;
      else
        it->second += n.grad;
    }
  }
}

// ---- op helpers ----

namespace {
Var binary_op(Tape* t, Mat value,
              std::function<void(Tape*, int /*out*/)> bind) {
  Var v = t->leaf(std::move(value));
  int out = v.idx;
  std::function<void(Tape*, int)> b = std::move(bind);
  t->nodes_[out].backward = [t, out, b]() { b(t, out); };
  return v;
}
}  // namespace

Var add(Var a, Var b) {
  Tape* t = a.tape;
  int ia = a.idx, ib = b.idx;
  return binary_op(t, a.val() + b.val(), [ia, ib](Tape* t, int out) {
    const Mat& g = t->grad(out);
    t->grad(ia) += g;
    t->grad(ib) += g;
  });
}

Var sub(Var a, Var b) {
  Tape* t = a.tape;
  int ia = a.idx, ib = b.idx;
  return binary_op(t, a.val() - b.val(), [ia, ib](Tape* t, int out) {
    const Mat& g = t->grad(out);
    t->grad(ia) += g;
    t->grad(ib) -= g;
  });
}

Var mul(Var a, Var b) {
  Tape* t = a.tape;
  int ia = a.idx, ib = b.idx;
  return binary_op(t, a.val().cwiseProduct(b.val()),
                   [ia, ib](Tape* t, int out) {
                     const Mat& g = t->grad(out);
                     t->grad(ia) += g.cwiseProduct(t->value(ib));
                     t->grad(ib) += g.cwiseProduct(t->value(ia));
                   });
}

Var scale(Var a, double k) {
  Tape* t = a.tape;
  int ia = a.idx;
  return binary_op(t, a.val() * k, [ia, k](Tape* t, int out) {
    t->grad(ia) += t->grad(out) * k;
  });
}

Var add_scalar(Var a, double k) {
  Tape* t = a.tape;
  int ia = a.idx;
  return binary_op(t, a.val().array() + k, [ia](Tape* t, int out) {
    t->grad(ia) += t->grad(out);
  });
}

Var matmul(Var a, Var b) {
  Tape* t = a.tape;
  int ia = a.idx, ib = b.idx;
  return binary_op(t, a.val() * b.val(), [ia, ib](Tape* t, int out) {
    const Mat& g = t->grad(out);
    t->grad(ia).noalias() += g * t->value(ib).transpose();
    t->grad(ib).noalias() += t->value(ia).transpose() * g;
  });
}

Var add_rowvec(Var x, Var b) {
  Tape* t = x.tape;
  int ix = x.idx, ib = b.idx;
  Mat v = x.val();
  v.rowwise() += b.val().row(0);
  return binary_op(t, std::move(v), [ix, ib](Tape* t, int out) {
    const Mat& g = t->grad(out);
    t->grad(ix) += g;
    t->grad(ib) += g.colwise().sum();
  });
}

Var concat_cols(const std::vector<Var>& xs) {
  Tape* t = xs.front().tape;
  Eigen::Index rows = xs.front().rows();
  Eigen::Index total = 0;
  for (const Var& x : xs) total += x.cols();
  Mat v(rows, total);
  Eigen::Index off = 0;
  std::vector<int> idxs;
  std::vector<Eigen::Index> widths;
  for (const Var& x : xs) {
    v.middleCols(off, x.cols()) = x.val();
    idxs.push_back(x.idx);
    widths.push_back(x.cols());
    off += x.cols();
  }
  return binary_op(t, std::move(v), [idxs, widths](Tape* t, int out) {
    const Mat& g = t->grad(out);
    Eigen::Index off = 0;
    for (std::size_t i = 0; i < idxs.size(); ++i) {
      t->grad(idxs[i]) += g.middleCols(off, widths[i]);
      off += widths[i];
    }
  });
}

Var slice_cols(Var x, Eigen::Index start, Eigen::Index len) {
  Tape* t = x.tape;
  int ix = x.idx;
  return binary_op(t, x.val().middleCols(start, len),
                   [ix, start, len](Tape* t, int out) {
                     t->grad(ix).middleCols(start, len) += t->grad(out);
                   });
}

Var rows(Var x, Eigen::Index start, Eigen::Index len) {
  Tape* t = x.tape;
  int ix = x.idx;
  return binary_op(t, x.val().middleRows(start, len),
                   [ix, start, len](Tape* t, int out) {
                     t->grad(ix).middleRows(start, len) += t->grad(out);
                   });
}

Var tanh_(Var x) {
  Tape* t = x.tape;
  int ix = x.idx;
  return binary_op(t, x.val().array().tanh(), [ix](Tape* t, int out) {
    const Mat& y = t->value(out);
    t->grad(ix).array() += t->grad(out).array() * (1.0 - y.array().square());
  });
}

Var sigmoid(Var x) {
  Tape* t = x.tape;
  int ix = x.idx;
  Mat v = (1.0 / (1.0 + (-x.val().array()).exp())).matrix();
  return binary_op(t, std::move(v), [ix](Tape* t, int out) {
    const Mat& y = t->value(out);
    t->grad(ix).array() += t->grad(out).array() * y.array() * (1.0 - y.array());
  });
}

Var elu(Var x) {
  Tape* t = x.tape;
  int ix = x.idx;
  Mat v = x.val().unaryExpr(
      [](double a) { return a > 0.0 ? a : std::expm1(a); });
  return binary_op(t, std::move(v), [ix](Tape* t, int out) {
    const Mat& xv = t->value(ix);
    const Mat& g = t->grad(out);
    Mat& gx = t->grad(ix);
    for (Eigen::Index j = 0; j < xv.cols(); ++j)
      for (Eigen::Index i = 0; i < xv.rows(); ++i)
        gx(i, j) += g(i, j) * (xv(i, j) > 0.0 ? 1.0 : std::exp(xv(i, j)));
  });
}

Var softplus(Var x) {
  Tape* t = x.tape;
  int ix = x.idx;
  // log(1+e^x) computed stably for large |x|.
  Mat v = x.val().unaryExpr([](double a) {
    return a > 0.0 ? a + std::log1p(std::exp(-a)) : std::log1p(std::exp(a));
  });
  return binary_op(t, std::move(v), [ix](Tape* t, int out) {
    const Mat& xv = t->value(ix);
    Mat sig = (1.0 / (1.0 + (-xv.array()).exp())).matrix();
    t->grad(ix).array() += t->grad(out).array() * sig.array();
  });
}

Var exp_(Var x) {
  Tape* t = x.tape;
  int ix = x.idx;
  return binary_op(t, x.val().array().exp(), [ix](Tape* t, int out) {
    t->grad(ix).array() += t->grad(out).array() * t->value(out).array();
  });
}

Var log_(Var x) {
  Tape* t = x.tape;
  int ix = x.idx;
  return binary_op(t, x.val().array().log(), [ix](Tape* t, int out) {
    t->grad(ix).array() += t->grad(out).array() / t->value(ix).array();
  });
}

Var stopgrad(Var x) {
  return x.tape->constant(x.val());
}

Var stopgrad(Var x, StFreeze* freeze) {
  if (!freeze) return stopgrad(x);
  if (freeze->recording) {
    freeze->frozen_consts.push_back(x.val());
    return x.tape->constant(x.val());
  }
  return x.tape->constant(freeze->frozen_consts.at(freeze->const_cursor++));
}

Var softmax_groups(Var logits, int groups, int classes) {
  Tape* t = logits.tape;
  int ix = logits.idx;
  const Mat& L = logits.val();
  Mat P(L.rows(), L.cols());
  for (Eigen::Index r = 0; r < L.rows(); ++r) {
    for (int g = 0; g < groups; ++g) {
      auto seg = L.row(r).segment(g * classes, classes);
      double m = seg.maxCoeff();
      Eigen::ArrayXd e = (seg.array() - m).exp();
      P.row(r).segment(g * classes, classes) = e / e.sum();
    }
  }
  return binary_op(t, std::move(P), [ix, groups, classes](Tape* t, int out) {
    const Mat& P = t->value(out);
    const Mat& g = t->grad(out);
    Mat& gl = t->grad(ix);
    for (Eigen::Index r = 0; r < P.rows(); ++r) {
      for (int k = 0; k < groups; ++k) {
        auto p = P.row(r).segment(k * classes, classes).array();
        auto dp = g.row(r).segment(k * classes, classes).array();
        double dot = (p * dp).sum();
        gl.row(r).segment(k * classes, classes).array() += p * (dp - dot);
      }
    }
  });
}

Var sum_all(Var x) {
  Tape* t = x.tape;
  int ix = x.idx;
  Mat v(1, 1);
  v(0, 0) = x.val().sum();
  return binary_op(t, std::move(v), [ix](Tape* t, int out) {
    t->grad(ix).array() += t->grad(out)(0, 0);
  });
}

Var mean_all(Var x) {
  return scale(sum_all(x), 1.0 / static_cast<double>(x.val().size()));
}

Var gaussian_nll_sum(Var x, const Mat& target) {
  Tape* t = x.tape;
  int ix = x.idx;
  Mat e = x.val() - target;
  Mat v(1, 1);
  v(0, 0) = 0.5 * e.squaredNorm();
  return binary_op(t, std::move(v), [ix, e = std::move(e)](Tape* t, int out) {
    t->grad(ix) += t->grad(out)(0, 0) * e;
  });
}

double huber_scalar(double pred, double target, double delta) {
  double e = std::abs(pred - target);
  return e <= delta ? 0.5 * e * e : delta * (e - 0.5 * delta);
}

Var huber_sum(Var pred, const Mat& target, double delta) {
  Tape* t = pred.tape;
  int ix = pred.idx;
  const Mat& p = pred.val();
  double total = 0.0;
  for (Eigen::Index j = 0; j < p.cols(); ++j)
    for (Eigen::Index i = 0; i < p.rows(); ++i)
      total += huber_scalar(p(i, j), target(i, j), delta);
  Mat v(1, 1);
  v(0, 0) = total;
  Mat tgt = target;
  return binary_op(t, std::move(v),
                   [ix, tgt = std::move(tgt), delta](Tape* t, int out) {
                     double g = t->grad(out)(0, 0);
                     const Mat& p = t->value(ix);
                     Mat& gp = t->grad(ix);
                     for (Eigen::Index j = 0; j < p.cols(); ++j)
                       for (Eigen::Index i = 0; i < p.rows(); ++i) {
                         double e = p(i, j) - tgt(i, j);
                         double d = e > delta ? delta
                                              : (e < -delta ? -delta : e);
                         gp(i, j) += g * d;
                       }
                   });
}

Var straight_through_sample(Var probs, int groups, int classes, Rng* rng,
                            StFreeze* freeze, bool argmax_mode) {
  Tape* t = probs.tape;
  int ix = probs.idx;
  const Mat& P = probs.val();
  Mat value;
  if (freeze && !freeze->recording) {
    if (freeze->cursor >= freeze->onehots.size())
      throw std::runtime_error("straight-through replay exhausted");
    const Mat& oh = freeze->onehots[freeze->cursor];
    const Mat& p0 = freeze->base_probs[freeze->cursor];
    ++freeze->cursor;
    value = oh + P - p0;
  } else {
    Mat oh = Mat::Zero(P.rows(), P.cols());
    for (Eigen::Index r = 0; r < P.rows(); ++r) {
      for (int k = 0; k < groups; ++k) {
        auto seg = P.row(r).segment(k * classes, classes);
        int pick = 0;
        if (argmax_mode) {
          seg.maxCoeff(&pick);
        } else {
          double u = rng->uniform() * seg.sum();
          double acc = 0.0;
          pick = classes - 1;
          for (int c = 0; c < classes; ++c) {
            acc += seg(c);
            if (u < acc) {
              pick = c;
              break;
            }
          }
        }
        oh(r, k * classes + pick) = 1.0;
      }
    }
    if (freeze) {
      freeze->onehots.push_back(oh);
      freeze->base_probs.push_back(P);
    }
    value = std::move(oh);
  }
  return binary_op(t, std::move(value), [ix](Tape* t, int out) {
    t->grad(ix) += t->grad(out);
  });
}

// ---- convolutions ----

namespace {

// Gathers conv patches: cols(row=(c*k+ky)*k+kx, col=oy*ow+ox).
void im2col(const double* img, const ConvSpec& s, Mat& cols) {
  int oh = s.out_h(), ow = s.out_w(), k = s.kernel;
  cols.setZero();
  for (int c = 0; c < s.in_ch; ++c) {
    const double* plane = img + static_cast<std::ptrdiff_t>(c) * s.in_h * s.in_w;
    for (int ky = 0; ky < k; ++ky)
      for (int kx = 0; kx < k; ++kx) {
        int row = (c * k + ky) * k + kx;
        for (int oy = 0; oy < oh; ++oy) {
          int y = oy * s.stride - s.pad + ky;
          if (y < 0 || y >= s.in_h) continue;
          for (int ox = 0; ox < ow; ++ox) {
            int x = ox * s.stride - s.pad + kx;
            if (x < 0 || x >= s.in_w) continue;
            cols(row, oy * ow + ox) = plane[y * s.in_w + x];
          }
        }
      }
  }
}

// Scatters patch gradients back onto the image (accumulating).
void col2im(const Mat& cols, const ConvSpec& s, double* img) {
  int oh = s.out_h(), ow = s.out_w(), k = s.kernel;
  for (int c = 0; c < s.in_ch; ++c) {
    double* plane = img + static_cast<std::ptrdiff_t>(c) * s.in_h * s.in_w;
    for (int ky = 0; ky < k; ++ky)
      for (int kx = 0; kx < k; ++kx) {
        int row = (c * k + ky) * k + kx;
        for (int oy = 0; oy < oh; ++oy) {
          int y = oy * s.stride - s.pad + ky;
          if (y < 0 || y >= s.in_h) continue;
          for (int ox = 0; ox < ow; ++ox) {
            int x = ox * s.stride - s.pad + kx;
            if (x < 0 || x >= s.in_w) continue;
            plane[y * s.in_w + x] += cols(row, oy * ow + ox);
          }
        }
      }
  }
}

}  // namespace

Var conv2d(Var x, Var w, Var b, const ConvSpec& spec) {
  Tape* t = x.tape;
  int ix = x.idx, iw = w.idx, ib = b.idx;
  const Mat& X = x.val();
  const Mat& W = w.val();
  int oh = spec.out_h(), ow = spec.out_w();
  Eigen::Index n = X.rows();
  Mat out(n, static_cast<Eigen::Index>(spec.out_ch) * oh * ow);
  Mat cols(spec.in_ch * spec.kernel * spec.kernel, oh * ow);
  Eigen::VectorXd img(X.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    img = X.row(i);
    im2col(img.data(), spec, cols);
    Mat o = W * cols;  // [out_ch, oh*ow]
    o.colwise() += b.val().row(0).transpose();
    for (int c = 0; c < spec.out_ch; ++c)
      out.row(i).segment(static_cast<Eigen::Index>(c) * oh * ow, oh * ow) =
          o.row(c);
  }
  return binary_op(t, std::move(out), [ix, iw, ib, spec](Tape* t, int out_idx) {
    const Mat& X = t->value(ix);
    const Mat& W = t->value(iw);
    const Mat& G = t->grad(out_idx);
    Mat& gx = t->grad(ix);
    Mat& gw = t->grad(iw);
    Mat& gb = t->grad(ib);
    int oh = spec.out_h(), ow = spec.out_w();
    Mat cols(spec.in_ch * spec.kernel * spec.kernel, oh * ow);
    Mat gout(spec.out_ch, oh * ow);
    Eigen::VectorXd img(X.cols());
    Eigen::VectorXd gimg(X.cols());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      for (int c = 0; c < spec.out_ch; ++c)
        gout.row(c) =
            G.row(i).segment(static_cast<Eigen::Index>(c) * oh * ow, oh * ow);
      img = X.row(i);
      im2col(img.data(), spec, cols);
      gw.noalias() += gout * cols.transpose();
      gb.row(0).transpose() += gout.rowwise().sum();
      Mat gcols = W.transpose() * gout;
      gimg.setZero();
      col2im(gcols, spec, gimg.data());
      gx.row(i) += gimg;
    }
  });
}

Var deconv2d(Var x, Var w, Var b, const DeconvSpec& spec) {
  Tape* t = x.tape;
  int ix = x.idx, iw = w.idx, ib = b.idx;
  const Mat& X = x.val();
  const Mat& W = w.val();  // [in_ch, out_ch*k*k]
  int H = spec.out_h(), Wd = spec.out_w();
  // The output image plays the role of a conv input whose patches are the
  // deconv input positions.
  ConvSpec cs{spec.out_ch, H, Wd, spec.in_ch, spec.kernel, spec.stride,
              spec.pad};
  Eigen::Index n = X.rows();
  Mat out(n, static_cast<Eigen::Index>(spec.out_ch) * H * Wd);
  Mat xm(spec.in_ch, spec.in_h * spec.in_w);
  Eigen::VectorXd img(out.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int c = 0; c < spec.in_ch; ++c)
      xm.row(c) = X.row(i).segment(
          static_cast<Eigen::Index>(c) * spec.in_h * spec.in_w,
          spec.in_h * spec.in_w);
    Mat cols = W.transpose() * xm;  // [out_ch*k*k, in_h*in_w]
    img.setZero();
    col2im(cols, cs, img.data());
    for (int c = 0; c < spec.out_ch; ++c)
      img.segment(static_cast<Eigen::Index>(c) * H * Wd, H * Wd).array() +=
          b.val()(0, c);
    out.row(i) = img;
  }
  return binary_op(t, std::move(out), [ix, iw, ib, spec, cs](Tape* t,
                                                             int out_idx) {
    const Mat& X = t->value(ix);
    const Mat& W = t->value(iw);
    const Mat& G = t->grad(out_idx);
    Mat& gx = t->grad(ix);
    Mat& gw = t->grad(iw);
    Mat& gb = t->grad(ib);
    int H = spec.out_h(), Wd = spec.out_w();
    Mat gimg_cols(spec.out_ch * spec.kernel * spec.kernel,
                  spec.in_h * spec.in_w);
    Mat xm(spec.in_ch, spec.in_h * spec.in_w);
    Eigen::VectorXd gimg(G.cols());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      gimg = G.row(i);
      im2col(gimg.data(), cs, gimg_cols);
      for (int c = 0; c < spec.in_ch; ++c)
        xm.row(c) = X.row(i).segment(
            static_cast<Eigen::Index>(c) * spec.in_h * spec.in_w,
            spec.in_h * spec.in_w);
      gw.noalias() += xm * gimg_cols.transpose();
      Mat gxm = W * gimg_cols;  // [in_ch, in_h*in_w]
      for (int c = 0; c < spec.in_ch; ++c)
        gx.row(i).segment(static_cast<Eigen::Index>(c) * spec.in_h * spec.in_w,
                          spec.in_h * spec.in_w) += gxm.row(c);
      for (int c = 0; c < spec.out_ch; ++c)
        gb(0, c) +=
            gimg.segment(static_cast<Eigen::Index>(c) * H * Wd, H * Wd).sum();
    }
  });
}

}  // namespace blink::ad
