#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "blink/baselines.hpp"
#include "blink/eval.hpp"
#include "blink/sim.hpp"

using namespace blink;
namespace fs = std::filesystem;

TEST_CASE("mae and rmse against brute force") {
  std::vector<double> p = {1.0, 2.0, 3.5};
  std::vector<double> t = {0.0, 4.0, 3.5};
  CHECK(metric_mae(p, t) == doctest::Approx((1.0 + 2.0 + 0.0) / 3.0));
  CHECK(metric_rmse(p, t) == doctest::Approx(std::sqrt((1.0 + 4.0) / 3.0)));
  CHECK_THROWS(metric_mae({}, {}));
  CHECK_THROWS(metric_mae({1.0}, {1.0, 2.0}));
}

TEST_CASE("pearson r on a known line and against brute force") {
  std::vector<double> x = {1, 2, 3, 4, 5};
  std::vector<double> y = {2, 4, 6, 8, 10};
  CHECK(metric_pearson(x, y) == doctest::Approx(1.0));
  std::vector<double> yneg = {10, 8, 6, 4, 2};
  CHECK(metric_pearson(x, yneg) == doctest::Approx(-1.0));

  std::vector<double> a = {1.0, -0.5, 2.0, 0.25};
  std::vector<double> b = {0.5, 1.5, -1.0, 2.0};
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= a.size();
  mb /= b.size();
  double saa = 0, sbb = 0, sab = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
    sab += (a[i] - ma) * (b[i] - mb);
  }
  CHECK(metric_pearson(a, b) == doctest::Approx(sab / std::sqrt(saa * sbb)));
}

TEST_CASE("degenerate variance reports zero correlation") {
  CHECK(metric_pearson({1, 1, 1}, {1, 2, 3}) == 0.0);
  CHECK(metric_pearson({1, 2, 3}, {5, 5, 5}) == 0.0);
}

TEST_CASE("within +/-1 uses a closed interval, no rounding") {
  std::vector<double> t = {0, 0, 0, 0};
  std::vector<double> p = {1.0, -1.0, 1.0001, 0.5};
  CHECK(metric_within_pm1(p, t) == doctest::Approx(75.0));
}

TEST_CASE("forecast start grid leaves a full horizon after each start") {
  CHECK(forecast_starts(100, 30) == std::vector<int>{30, 60});
  CHECK(forecast_starts(121, 30) == std::vector<int>{30, 60, 90});
  CHECK(forecast_starts(60, 30).empty());
  CHECK(forecast_starts(61, 30) == std::vector<int>{30});
}

TEST_CASE("seed aggregation uses the population standard deviation") {
  MeanStd ms = aggregate_seeds({1.0, 2.0, 3.0});
  CHECK(ms.mean == doctest::Approx(2.0));
  CHECK(ms.stddev == doctest::Approx(std::sqrt(2.0 / 3.0)));
  CHECK(aggregate_seeds({}).stddev == 0.0);
}

TEST_CASE("bootstrap std shrinks with sample size and is deterministic") {
  std::vector<double> small_errs = {0.0, 5.0, 1.0, 4.0};
  std::vector<double> big_errs;
  for (int i = 0; i < 16; ++i)
    big_errs.insert(big_errs.end(), small_errs.begin(), small_errs.end());
  double s_small = bootstrap_std(small_errs, 500, 9);
  double s_big = bootstrap_std(big_errs, 500, 9);
  CHECK(s_small > s_big);
  CHECK(bootstrap_std(small_errs, 500, 9) == s_small);
}

TEST_CASE("evaluating the zero model reproduces label statistics") {
  sim::SimConfig c;
  c.obs_size = 16;
  std::vector<Episode> eps;
  for (int i = 0; i < 8; ++i)
    eps.push_back(sim::generate_episode(c, 700 + i).episode);
  ModelConfig mc;
  mc.obs_size = 16;
  auto model = make_model("zero", mc, 1);
  EvalReport rep = evaluate_model(*model, eps, 600, 30, false);
  double mean_final = 0.0;
  for (const Episode& ep : eps)
    mean_final += ep.frames.back().cum_kills - ep.frames.front().cum_kills;
  mean_final /= eps.size();
  CHECK(rep.mae == doctest::Approx(mean_final));
  CHECK(rep.pearson == 0.0);  // constant predictions
  REQUIRE(rep.fmae30.has_value());
  CHECK(rep.per_track.size() == eps.size());
}

TEST_CASE("metrics csv is CRLF-terminated with the documented header") {
  EvalReport rep;
  rep.mae = 1.25;
  rep.fmae30 = 0.5;
  TrackResult tr;
  tr.id = "ep000001";
  tr.abs_err = 1.25;
  rep.per_track.push_back(tr);
  fs::path path = fs::temp_directory_path() / "blink_metrics_test.csv";
  write_metrics_csv(path.string(), {"blink"}, {3}, {rep});
  std::ifstream in(path, std::ios::binary);
  std::string content((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
  CHECK(content.rfind("model,seed,mae,rmse,pearson,within_pm1,fmae30\r\n",
                      0) == 0);
  CHECK(content.find("blink,3,1.25,") != std::string::npos);
  CHECK(content.find("\r\n") != std::string::npos);
  fs::remove(path);
}
