#pragma once

#include <optional>
#include <string>
#include <vector>

#include "blink/model.hpp"

namespace blink {

// ---- scalar metrics over final outcomes across tracks ----
double metric_mae(const std::vector<double>& preds,
                  const std::vector<double>& trues);
double metric_rmse(const std::vector<double>& preds,
                   const std::vector<double>& trues);
// Degenerate variance on either side reports 0.
double metric_pearson(const std::vector<double>& preds,
                      const std::vector<double>& trues);
// Percentage of tracks with |pred - true| <= 1 (closed, no rounding).
double metric_within_pm1(const std::vector<double>& preds,
                         const std::vector<double>& trues);

struct TrackResult {
  std::string id;
  double final_pred = 0.0;
  double final_true = 0.0;
  double abs_err = 0.0;
  std::vector<double> forecast_errs;  // one per forecast start
};

struct EvalReport {
  std::vector<TrackResult> per_track;
  double mae = 0.0, rmse = 0.0, pearson = 0.0, within_pm1 = 0.0;
  std::optional<double> fmae30;  // absent for models without a forecast mode
};

// Full-track filtering predictions truncated to max_len.
std::vector<double> rollout_track(Model& model, const Episode& ep,
                                  int max_len = 600);

// Mean |pred - true| over a latent rollout of `horizon` frames from t_f,
// both series re-zeroed at t_f.
double forecast_error(Model& model, const Episode& ep, int t_f, int horizon,
                      bool zero_actions);

// Deterministic start grid: t_f = horizon, 2*horizon, ... needing a full
// horizon of frames after each start.
std::vector<int> forecast_starts(int track_len, int horizon);

EvalReport evaluate_model(Model& model, const std::vector<Episode>& eps,
                          int max_len = 600, int horizon = 30,
                          bool zero_actions = false);

// ---- aggregation across seeds / tracks ----
struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;  // population std
};
MeanStd aggregate_seeds(const std::vector<double>& per_seed);
// Bootstrap std of the MAE over tracks (resampling with replacement).
double bootstrap_std(const std::vector<double>& per_track_abs_err,
                     int n_boot, std::uint64_t seed);

void write_metrics_csv(const std::string& path,
                       const std::vector<std::string>& model_names,
                       const std::vector<std::uint64_t>& seeds,
                       const std::vector<EvalReport>& reports);
void write_per_track_csv(const std::string& path, const EvalReport& report);

}  // namespace blink
