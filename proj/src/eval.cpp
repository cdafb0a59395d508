#include "blink/eval.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "blink/rng.hpp"

namespace blink {

namespace {
void check_inputs(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || a.size() != b.size())
    throw std::runtime_error("metric inputs must be equal-length, non-empty");
}
}  // namespace

double metric_mae(const std::vector<double>& preds,
                  const std::vector<double>& trues) {
  check_inputs(preds, trues);
  double s = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i)
    s += std::abs(preds[i] - trues[i]);
  return s / static_cast<double>(preds.size());
}

double metric_rmse(const std::vector<double>& preds,
                   const std::vector<double>& trues) {
  check_inputs(preds, trues);
  double s = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    double e = preds[i] - trues[i];
    s += e * e;
  }
  return std::sqrt(s / static_cast<double>(preds.size()));
}

double metric_pearson(const std::vector<double>& preds,
                      const std::vector<double>& trues) {
  check_inputs(preds, trues);
  double n = static_cast<double>(preds.size());
  double mp = 0.0, mt = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    mp += preds[i];
    mt += trues[i];
  }
  mp /= n;
  mt /= n;
  double spp = 0.0, stt = 0.0, spt = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    double dp = preds[i] - mp, dt = trues[i] - mt;
    spp += dp * dp;
    stt += dt * dt;
    spt += dp * dt;
  }
  if (spp <= 0.0 || stt <= 0.0) return 0.0;  // constant-series convention
  return spt / std::sqrt(spp * stt);
}

double metric_within_pm1(const std::vector<double>& preds,
                         const std::vector<double>& trues) {
  check_inputs(preds, trues);
  std::size_t hit = 0;
  for (std::size_t i = 0; i < preds.size(); ++i)
    if (std::abs(preds[i] - trues[i]) <= 1.0) ++hit;
  return 100.0 * static_cast<double>(hit) / static_cast<double>(preds.size());
}

std::vector<double> rollout_track(Model& model, const Episode& ep,
                                  int max_len) {
  return model.predict_track(ep, max_len);
}

double forecast_error(Model& model, const Episode& ep, int t_f, int horizon,
                      bool zero_actions) {
  std::vector<double> pred = model.forecast(ep, t_f, horizon, zero_actions);
  double base = ep.frames[t_f].cum_kills;
  double s = 0.0;
  for (int i = 0; i < horizon; ++i) {
    double truth = ep.frames[t_f + 1 + i].cum_kills - base;
    s += std::abs(pred[i] - truth);
  }
  return s / horizon;
}

std::vector<int> forecast_starts(int track_len, int horizon) {
  std::vector<int> starts;
  for (int t_f = horizon; t_f + horizon < track_len; t_f += horizon)
    starts.push_back(t_f);
  return starts;
}

EvalReport evaluate_model(Model& model, const std::vector<Episode>& eps,
                          int max_len, int horizon, bool zero_actions) {
  EvalReport rep;
  std::vector<double> finals_pred, finals_true;
  double ferr_sum = 0.0;
  std::size_t ferr_n = 0;
  for (const Episode& ep : eps) {
    TrackResult tr;
    tr.id = ep.id;
    std::vector<double> pred = rollout_track(model, ep, max_len);
    int T = static_cast<int>(pred.size());
    tr.final_pred = pred.empty() ? 0.0 : pred.back();
    tr.final_true =
        T > 0 ? ep.frames[T - 1].cum_kills - ep.frames[0].cum_kills : 0.0;
    tr.abs_err = std::abs(tr.final_pred - tr.final_true);
    if (model.supports_forecast()) {
      for (int t_f : forecast_starts(std::min(ep.length(), max_len), horizon)) {
        double e = forecast_error(model, ep, t_f, horizon, zero_actions);
        tr.forecast_errs.push_back(e);
        ferr_sum += e;
        ++ferr_n;
      }
    }
    finals_pred.push_back(tr.final_pred);
    finals_true.push_back(tr.final_true);
    rep.per_track.push_back(std::move(tr));
  }
  rep.mae = metric_mae(finals_pred, finals_true);
  rep.rmse = metric_rmse(finals_pred, finals_true);
  rep.pearson = metric_pearson(finals_pred, finals_true);
  rep.within_pm1 = metric_within_pm1(finals_pred, finals_true);
  if (model.supports_forecast() && ferr_n > 0)
    rep.fmae30 = ferr_sum / static_cast<double>(ferr_n);
  else if (model.supports_forecast())
    rep.fmae30 = 0.0;
  return rep;
}

MeanStd aggregate_seeds(const std::vector<double>& per_seed) {
  MeanStd out;
  if (per_seed.empty()) return out;
  double n = static_cast<double>(per_seed.size());
  for (double v : per_seed) out.mean += v;
  out.mean /= n;
  double s = 0.0;
  for (double v : per_seed) s += (v - out.mean) * (v - out.mean);
  out.stddev = std::sqrt(s / n);
  return out;
}

double bootstrap_std(const std::vector<double>& per_track_abs_err, int n_boot,
                     std::uint64_t seed) {
  if (per_track_abs_err.empty()) return 0.0;
  Rng rng(seed, Rng::hash("bootstrap"));
  std::vector<double> maes;
  maes.reserve(n_boot);
  for (int b = 0; b < n_boot; ++b) {
    double s = 0.0;
    for (std::size_t i = 0; i < per_track_abs_err.size(); ++i)
      s += per_track_abs_err[rng.uniform_int(per_track_abs_err.size())];
    maes.push_back(s / static_cast<double>(per_track_abs_err.size()));
  }
  return aggregate_seeds(maes).stddev;
}

namespace {
std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}
}  // namespace

void write_metrics_csv(const std::string& path,
                       const std::vector<std::string>& model_names,
                       const std::vector<std::uint64_t>& seeds,
                       const std::vector<EvalReport>& reports) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  out << "model,seed,mae,rmse,pearson,within_pm1,fmae30\r\n";
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const EvalReport& r = reports[i];
    out << model_names[i] << "," << seeds[i] << "," << fmt(r.mae) << ","
        << fmt(r.rmse) << "," << fmt(r.pearson) << "," << fmt(r.within_pm1)
        << ",";
    if (r.fmae30) out << fmt(*r.fmae30);
    out << "\r\n";
  }
}

void write_per_track_csv(const std::string& path, const EvalReport& report) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  out << "id,final_pred,final_true,abs_err,n_forecast_starts,mean_forecast_err\r\n";
  for (const TrackResult& tr : report.per_track) {
    double fsum = 0.0;
    for (double e : tr.forecast_errs) fsum += e;
    out << tr.id << "," << fmt(tr.final_pred) << "," << fmt(tr.final_true)
        << "," << fmt(tr.abs_err) << "," << tr.forecast_errs.size() << ",";
    if (!tr.forecast_errs.empty())
      out << fmt(fsum / static_cast<double>(tr.forecast_errs.size()));
    out << "\r\n";
  }
}

}  // namespace blink
