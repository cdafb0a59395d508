#include "blink/behavior.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "blink/png.hpp"
#include "blink/sim.hpp"

namespace blink::behavior {

namespace fs = std::filesystem;

std::vector<WindowEmbedding> window_embed(
    const std::string& track_id, const std::vector<Eigen::VectorXd>& features,
    const Episode& ep, int length, int stride, bool last_minus_first) {
  int T = static_cast<int>(features.size());
  std::vector<WindowEmbedding> out;
  if (T < length) return out;
  Eigen::Index dim = features.front().size();
  int wi = 0;
  for (int start = 0; start + length <= T; start += stride, ++wi) {
    WindowEmbedding w;
    w.track_id = track_id;
    w.window_index = wi;
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
    for (int t = start; t < start + length; ++t) mean += features[t];
    mean /= length;
    Eigen::VectorXd change;
    if (last_minus_first) {
      change = features[start + length - 1] - features[start];
    } else {
      // Mean of first differences: (f_last - f_first) / (L-1).
      change = (features[start + length - 1] - features[start]) /
               static_cast<double>(length - 1);
    }
    w.feature.resize(2 * dim);
    w.feature << mean, change;
    w.outcome = ep.frames[start + length - 1].cum_kills -
                ep.frames[start].cum_kills;
    double sp = 0.0;
    for (int t = start; t < start + length; ++t)
      sp += std::hypot(ep.frames[t].dx, ep.frames[t].dy);
    w.speed = sp / length;
    out.push_back(std::move(w));
  }
  return out;
}

PcaTransform standardize_pca(const std::vector<WindowEmbedding>& embeddings,
                             int max_components, double var_target,
                             bool whiten) {
  if (embeddings.empty())
    throw std::runtime_error("standardize_pca needs at least one sample");
  Eigen::Index d = embeddings.front().feature.size();
  Eigen::Index n = static_cast<Eigen::Index>(embeddings.size());
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  for (const auto& e : embeddings) mean += e.feature;
  mean /= static_cast<double>(n);
  Eigen::VectorXd var = Eigen::VectorXd::Zero(d);
  for (const auto& e : embeddings)
    var += (e.feature - mean).cwiseProduct(e.feature - mean);
  var /= static_cast<double>(n);

  PcaTransform tr;
  for (Eigen::Index i = 0; i < d; ++i) {
    if (var(i) > 1e-18) {
      tr.kept_dims.push_back(static_cast<int>(i));
    } else {
      std::fprintf(stderr,
                   "warn: dropping zero-variance embedding dimension %ld\n",
                   static_cast<long>(i));
    }
  }
  Eigen::Index dk = static_cast<Eigen::Index>(tr.kept_dims.size());
  if (dk == 0) throw std::runtime_error("all embedding dimensions constant");
  tr.mean.resize(dk);
  tr.stddev.resize(dk);
  for (Eigen::Index i = 0; i < dk; ++i) {
    tr.mean(i) = mean(tr.kept_dims[i]);
    tr.stddev(i) = std::sqrt(var(tr.kept_dims[i]));
  }
  Eigen::MatrixXd Z(n, dk);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index i = 0; i < dk; ++i)
      Z(r, i) = (embeddings[r].feature(tr.kept_dims[i]) - tr.mean(i)) /
                tr.stddev(i);
  Eigen::MatrixXd cov = Z.transpose() * Z / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  Eigen::VectorXd evals = es.eigenvalues();  // ascending
  double total = std::max(evals.sum(), 1e-300);
  Eigen::Index limit = std::min<Eigen::Index>(
      {static_cast<Eigen::Index>(max_components), dk, n});
  double captured = 0.0;
  Eigen::Index ncomp = 0;
  for (Eigen::Index i = 0; i < limit; ++i) {
    captured += evals(dk - 1 - i);
    ++ncomp;
    if (captured / total >= var_target) break;
  }
  tr.components.resize(dk, ncomp);
  for (Eigen::Index i = 0; i < ncomp; ++i) {
    tr.components.col(i) = es.eigenvectors().col(dk - 1 - i);
    if (whiten) {
      double ev = std::max(evals(dk - 1 - i), 1e-12);
      tr.components.col(i) /= std::sqrt(ev);
    }
  }
  return tr;
}

Eigen::VectorXd PcaTransform::apply(const Eigen::VectorXd& x) const {
  Eigen::Index dk = static_cast<Eigen::Index>(kept_dims.size());
  Eigen::VectorXd z(dk);
  for (Eigen::Index i = 0; i < dk; ++i)
    z(i) = (x(kept_dims[i]) - mean(i)) / stddev(i);
  return components.transpose() * z;
}

int nearest_centroid(const Eigen::MatrixXd& centroids,
                     const Eigen::VectorXd& x) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < centroids.rows(); ++k) {
    double d = (centroids.row(k).transpose() - x).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(k);
    }
  }
  return best;
}

namespace {
KMeansResult kmeans_single(const std::vector<Eigen::VectorXd>& points, int k,
                           Rng rng, int max_iter) {
  Eigen::Index dim = points.front().size();
  KMeansResult res;
  res.centroids.resize(k, dim);

  // k-means++ style seeding.
  std::size_t first = rng.uniform_int(points.size());
  res.centroids.row(0) = points[first];
  std::vector<double> d2(points.size(),
                         std::numeric_limits<double>::infinity());
  for (int c = 1; c < k; ++c) {
    for (std::size_t i = 0; i < points.size(); ++i)
      d2[i] = std::min(d2[i], (points[i].transpose() - res.centroids.row(c - 1))
                                  .squaredNorm());
    std::size_t pick = rng.categorical(d2);
    res.centroids.row(c) = points[pick];
  }

  res.assignment.assign(points.size(), -1);
  for (int iter = 0; iter < max_iter; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < points.size(); ++i) {
      int a = nearest_centroid(res.centroids, points[i]);
      if (a != res.assignment[i]) {
        res.assignment[i] = a;
        changed = true;
      }
    }
    if (!changed && iter > 0) break;
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, dim);
    std::vector<int> counts(k, 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      sums.row(res.assignment[i]) += points[i];
      ++counts[res.assignment[i]];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        res.centroids.row(c) = sums.row(c) / counts[c];
      } else {
        // Reseed an empty cluster to the globally farthest point.
        std::size_t far = 0;
        double far_d = -1.0;
        for (std::size_t i = 0; i < points.size(); ++i) {
          double d = (points[i].transpose() -
                      res.centroids.row(res.assignment[i]))
                         .squaredNorm();
          if (d > far_d) {
            far_d = d;
            far = i;
          }
        }
        res.centroids.row(c) = points[far];
      }
    }
  }
  return res;
}
}  // namespace

KMeansResult kmeans(const std::vector<Eigen::VectorXd>& points, int k,
                    std::uint64_t seed, int max_iter) {
  if (static_cast<int>(points.size()) < k)
    throw std::runtime_error("kmeans needs at least k samples");
  // Lloyd is sensitive to the initial centroids; run several seeded
  // restarts and keep the lowest-inertia solution (deterministic in seed).
  const int n_init = 8;
  Rng rng(seed, Rng::hash("kmeans"));
  KMeansResult best;
  double best_inertia = std::numeric_limits<double>::infinity();
  for (int init = 0; init < n_init; ++init) {
    KMeansResult res = kmeans_single(points, k, rng.fork(init), max_iter);
    double inertia = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i)
      inertia += (points[i].transpose() - res.centroids.row(res.assignment[i]))
                     .squaredNorm();
    if (inertia < best_inertia) {
      best_inertia = inertia;
      best = std::move(res);
    }
  }
  return best;
}

std::vector<ClusterStats> cluster_stats(
    const std::vector<WindowEmbedding>& embeddings,
    const std::vector<int>& assignment, int k) {
  std::vector<ClusterStats> stats(k);
  std::vector<int> counts(k, 0);
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    int c = assignment[i];
    stats[c].mean_outcome += embeddings[i].outcome;
    stats[c].mean_speed += embeddings[i].speed;
    ++counts[c];
  }
  for (int c = 0; c < k; ++c) {
    if (counts[c] > 0) {
      stats[c].mean_outcome /= counts[c];
      stats[c].mean_speed /= counts[c];
    }
    stats[c].fraction =
        static_cast<double>(counts[c]) / static_cast<double>(embeddings.size());
  }
  return stats;
}

std::array<int, 4> label_clusters(const std::vector<ClusterStats>& stats) {
  if (stats.size() != 4)
    throw std::runtime_error("mode labeling expects exactly 4 clusters");
  std::array<int, 4> cluster_to_mode{};
  std::vector<int> remaining = {0, 1, 2, 3};
  auto take = [&](auto cmp) {
    auto it = std::max_element(remaining.begin(), remaining.end(), cmp);
    int c = *it;
    remaining.erase(it);
    return c;
  };
  int high = take([&](int a, int b) {
    return stats[a].mean_outcome < stats[b].mean_outcome;
  });
  int motile =
      take([&](int a, int b) { return stats[a].mean_speed < stats[b].mean_speed; });
  int low = take([&](int a, int b) {
    return stats[a].mean_outcome < stats[b].mean_outcome;
  });
  int quiescent = remaining.front();
  cluster_to_mode[high] = static_cast<int>(sim::Mode::HighCytotoxic);
  cluster_to_mode[motile] = static_cast<int>(sim::Mode::Motile);
  cluster_to_mode[low] = static_cast<int>(sim::Mode::LowCytotoxic);
  cluster_to_mode[quiescent] = static_cast<int>(sim::Mode::Quiescent);
  return cluster_to_mode;
}

TransitionMatrix estimate_transitions(
    const std::vector<std::vector<int>>& mode_paths_per_track) {
  TransitionMatrix tm;
  Eigen::Matrix4d counts = Eigen::Matrix4d::Zero();
  for (const auto& path : mode_paths_per_track)
    for (std::size_t i = 0; i + 1 < path.size(); ++i)
      counts(path[i], path[i + 1]) += 1.0;
  for (int i = 0; i < 4; ++i) {
    double row = counts.row(i).sum();
    if (row > 0.0) {
      tm.m.row(i) = counts.row(i) / row;
    } else {
      tm.m.row(i).setConstant(0.25);
      tm.uniform_row_flag[i] = true;
    }
  }
  return tm;
}

AnalysisResult analyze(Blink& model, const std::vector<Episode>& train,
                       const std::vector<Episode>& test,
                       const AnalysisConfig& cfg) {
  AnalysisResult res;
  for (const Episode& ep : train) {
    auto feats = model.extract_latents(ep);
    auto ws = window_embed(ep.id, feats, ep, cfg.window_length,
                           cfg.window_stride, cfg.last_minus_first);
    for (auto& w : ws) res.train_windows.push_back(std::move(w));
  }
  if (res.train_windows.empty())
    throw std::runtime_error("no training track is long enough for a window");
  res.transform = standardize_pca(res.train_windows, cfg.max_components,
                                  cfg.var_target, cfg.whiten);
  std::vector<Eigen::VectorXd> reduced;
  reduced.reserve(res.train_windows.size());
  for (const auto& w : res.train_windows)
    reduced.push_back(res.transform.apply(w.feature));
  res.clustering = kmeans(reduced, cfg.k, cfg.seed);
  res.stats =
      cluster_stats(res.train_windows, res.clustering.assignment, cfg.k);
  res.cluster_to_mode = label_clusters(res.stats);
  res.train_modes.reserve(res.train_windows.size());
  for (int a : res.clustering.assignment)
    res.train_modes.push_back(res.cluster_to_mode[a]);

  for (const Episode& ep : test) {
    auto feats = model.extract_latents(ep);
    auto ws = window_embed(ep.id, feats, ep, cfg.window_length,
                           cfg.window_stride, cfg.last_minus_first);
    std::vector<int> path;
    for (auto& w : ws) {
      int c = nearest_centroid(res.clustering.centroids,
                               res.transform.apply(w.feature));
      res.test_clusters.push_back(c);
      path.push_back(res.cluster_to_mode[c]);
      res.test_windows.push_back(std::move(w));
    }
    res.test_mode_paths.push_back(std::move(path));
  }
  res.transitions = estimate_transitions(res.test_mode_paths);
  return res;
}

namespace {
std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

const std::uint8_t kModeColors[4][3] = {
    {214, 39, 40},   // HighCytotoxic: red
    {255, 127, 14},  // Motile: orange
    {31, 119, 180},  // LowCytotoxic: blue
    {127, 127, 127}, // Quiescent: gray
};
}  // namespace

void write_analysis_outputs(const AnalysisResult& res,
                            const std::vector<Episode>& test,
                            const AnalysisConfig& cfg,
                            const std::string& out_dir) {
  (void)test;
  fs::create_directories(out_dir);
  {
    std::ofstream out(out_dir + "/modes.csv");
    if (!out) throw std::runtime_error("cannot write modes.csv");
    out << "split,track_id,window_index,cluster,mode,mode_name,outcome,speed\r\n";
    for (std::size_t i = 0; i < res.train_windows.size(); ++i) {
      const auto& w = res.train_windows[i];
      int c = res.clustering.assignment[i];
      int m = res.cluster_to_mode[c];
      out << "train," << w.track_id << "," << w.window_index << "," << c
          << "," << m << "," << sim::mode_name(m) << "," << fmt(w.outcome)
          << "," << fmt(w.speed) << "\r\n";
    }
    for (std::size_t i = 0; i < res.test_windows.size(); ++i) {
      const auto& w = res.test_windows[i];
      int c = res.test_clusters[i];
      int m = res.cluster_to_mode[c];
      out << "test," << w.track_id << "," << w.window_index << "," << c << ","
          << m << "," << sim::mode_name(m) << "," << fmt(w.outcome) << ","
          << fmt(w.speed) << "\r\n";
    }
  }
  {
    std::ofstream out(out_dir + "/transition_matrix.csv");
    if (!out) throw std::runtime_error("cannot write transition_matrix.csv");
    out << "from,to_HighCytotoxic,to_Motile,to_LowCytotoxic,to_Quiescent,"
           "uniform_flag\r\n";
    for (int i = 0; i < 4; ++i) {
      out << sim::mode_name(i);
      for (int j = 0; j < 4; ++j) out << "," << fmt(res.transitions.m(i, j));
      out << "," << (res.transitions.uniform_row_flag[i] ? 1 : 0) << "\r\n";
    }
  }
  // 2D embedding scatter on the first two principal components.
  {
    int W = 640, H = 640;
    Canvas canvas(W, H);
    double minx = 1e300, maxx = -1e300, miny = 1e300, maxy = -1e300;
    std::vector<Eigen::Vector2d> pts;
    for (const auto& w : res.train_windows) {
      Eigen::VectorXd p = res.transform.apply(w.feature);
      double x = p(0), y = p.size() > 1 ? p(1) : 0.0;
      pts.emplace_back(x, y);
      minx = std::min(minx, x);
      maxx = std::max(maxx, x);
      miny = std::min(miny, y);
      maxy = std::max(maxy, y);
    }
    double sx = (maxx > minx) ? (W - 40) / (maxx - minx) : 1.0;
    double sy = (maxy > miny) ? (H - 40) / (maxy - miny) : 1.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      int m = res.train_modes[i];
      int x = 20 + static_cast<int>((pts[i](0) - minx) * sx);
      int y = H - 20 - static_cast<int>((pts[i](1) - miny) * sy);
      canvas.disc(x, y, 3, kModeColors[m][0], kModeColors[m][1],
                  kModeColors[m][2]);
    }
    canvas.save(out_dir + "/embedding.png");
  }
  // Transition-matrix heatmap.
  {
    int cell = 120, W = 4 * cell, H = 4 * cell;
    Canvas canvas(W, H);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        double v = res.transitions.m(i, j);
        auto shade = static_cast<std::uint8_t>(255 - v * 220);
        canvas.fill_rect(j * cell, i * cell, (j + 1) * cell - 2,
                         (i + 1) * cell - 2, shade, shade, 255);
      }
    canvas.save(out_dir + "/transitions.png");
  }
  (void)cfg;
}

}  // namespace blink::behavior
