#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

#include "blink/episode.hpp"
#include "blink/rng.hpp"
#include "blink/rssm.hpp"

namespace blink::behavior {

struct WindowEmbedding {
  std::string track_id;
  int window_index = 0;
  Eigen::VectorXd feature;  // [per-dim mean, per-dim temporal change]
  double outcome = 0.0;     // kills within the window
  double speed = 0.0;       // mean displacement magnitude, px/frame
};

// Non-overlapping windows (stride = length by default). Temporal change is
// the mean first difference per dimension; `last_minus_first` switches to
// the endpoint difference. `burn_in` frames at the start of the track are
// skipped: filtered latents carry an h_0 = 0 warm-up transient that would
// otherwise make every track's first window an outlier.
std::vector<WindowEmbedding> window_embed(
    const std::string& track_id,
    const std::vector<Eigen::VectorXd>& features, const Episode& ep,
    int length = 30, int stride = 30, bool last_minus_first = false,
    int burn_in = 0);

struct PcaTransform {
  Eigen::VectorXd mean, stddev;       // over kept dimensions
  std::vector<int> kept_dims;         // zero-variance dims are dropped
  Eigen::MatrixXd components;         // kept_dims.size() x n_components
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
};

// Z-scores each dimension on the training data and projects onto the top
// principal components (enough for `var_target` variance, capped). With
// `whiten` each retained component is scaled to unit variance, so the
// clustering metric is not dominated by the largest-variance directions.
PcaTransform standardize_pca(const std::vector<WindowEmbedding>& embeddings,
                             int max_components = 32,
                             double var_target = 0.95, bool whiten = true);

struct KMeansResult {
  Eigen::MatrixXd centroids;  // k x dim
  std::vector<int> assignment;
};

// Lloyd iteration with k-means++ style seeding; empty clusters reseed to
// the farthest point from its centroid.
KMeansResult kmeans(const std::vector<Eigen::VectorXd>& points, int k,
                    std::uint64_t seed, int max_iter = 300);
int nearest_centroid(const Eigen::MatrixXd& centroids,
                     const Eigen::VectorXd& x);

struct ClusterStats {
  double mean_outcome = 0.0;
  double mean_speed = 0.0;
  double fraction = 0.0;
};

std::vector<ClusterStats> cluster_stats(
    const std::vector<WindowEmbedding>& embeddings,
    const std::vector<int>& assignment, int k);

// Ranks clusters onto behavioral modes: highest outcome -> HighCytotoxic;
// of the rest, highest speed -> Motile; of the remaining two the higher
// outcome -> LowCytotoxic, the last -> Quiescent. Returns cluster -> mode.
std::array<int, 4> label_clusters(const std::vector<ClusterStats>& stats);

struct TransitionMatrix {
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  std::array<bool, 4> uniform_row_flag = {false, false, false, false};
};

// Row-stochastic counts over consecutive windows of the same track; rows
// with no outgoing transitions are set uniform and flagged.
TransitionMatrix estimate_transitions(
    const std::vector<std::vector<int>>& mode_paths_per_track);

// ---- full pipeline ----

struct AnalysisConfig {
  int window_length = 30;
  int window_stride = 30;
  bool last_minus_first = false;
  int burn_in = 30;  // frames dropped before windowing (filter warm-up)
  int max_components = 32;
  double var_target = 0.95;
  bool whiten = true;
  int k = 4;
  std::uint64_t seed = 0;
};

struct AnalysisResult {
  PcaTransform transform;
  KMeansResult clustering;
  std::vector<WindowEmbedding> train_windows;
  std::vector<int> train_modes;                  // per train window
  std::vector<ClusterStats> stats;               // per cluster
  std::array<int, 4> cluster_to_mode;
  std::vector<WindowEmbedding> test_windows;      // flattened over tracks
  std::vector<int> test_clusters;                 // per test window
  std::vector<std::vector<int>> test_mode_paths;  // per test track
  TransitionMatrix transitions;                   // over test tracks
};

AnalysisResult analyze(Blink& model, const std::vector<Episode>& train,
                       const std::vector<Episode>& test,
                       const AnalysisConfig& cfg);

// modes.csv, transition_matrix.csv, embedding.png, transitions.png
void write_analysis_outputs(const AnalysisResult& res,
                            const std::vector<Episode>& test,
                            const AnalysisConfig& cfg,
                            const std::string& out_dir);

}  // namespace blink::behavior
