#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "blink/rng.hpp"

using blink::Rng;

TEST_CASE("same seed reproduces the same stream") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("different seeds and streams diverge") {
  Rng a(42), b(43), c(42, 1);
  CHECK(a.next_u64() != b.next_u64());
  Rng a2(42);
  CHECK(a2.next_u64() != c.next_u64());
}

TEST_CASE("fork does not advance the parent") {
  Rng a(7), b(7);
  (void)a.fork(3);
  (void)a.fork("label");
  CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("forked substreams are distinct from each other and the parent") {
  Rng a(7);
  std::set<std::uint64_t> first_draws;
  first_draws.insert(a.fork(0).next_u64());
  first_draws.insert(a.fork(1).next_u64());
  first_draws.insert(a.fork("x").next_u64());
  first_draws.insert(a.next_u64());
  CHECK(first_draws.size() == 4);
}

TEST_CASE("uniform lies in [0,1) with roughly correct moments") {
  Rng r(123);
  double sum = 0.0, sum2 = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    sum += u;
    sum2 += u * u;
  }
  double mean = sum / n;
  double var = sum2 / n - mean * mean;
  CHECK(mean == doctest::Approx(0.5).epsilon(0.01));
  CHECK(var == doctest::Approx(1.0 / 12.0).epsilon(0.05));
}

TEST_CASE("uniform_int covers the full range") {
  Rng r(5);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    std::uint64_t v = r.uniform_int(7);
    CHECK(v < 7);
    seen.insert(v);
  }
  CHECK(seen.size() == 7);
}

TEST_CASE("gaussian has unit moments") {
  Rng r(99);
  double sum = 0.0, sum2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    double g = r.gaussian();
    sum += g;
    sum2 += g * g;
  }
  CHECK(sum / n == doctest::Approx(0.0).epsilon(0.02));
  CHECK(sum2 / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("bernoulli frequency matches p") {
  Rng r(11);
  int hits = 0;
  const int n = 50000;
  for (int i = 0; i < n; ++i) hits += r.bernoulli(0.3);
  CHECK(static_cast<double>(hits) / n == doctest::Approx(0.3).epsilon(0.05));
}

TEST_CASE("categorical respects unnormalized weights") {
  Rng r(17);
  std::vector<double> w = {1.0, 0.0, 3.0};
  int counts[3] = {0, 0, 0};
  const int n = 40000;
  for (int i = 0; i < n; ++i) ++counts[r.categorical(w)];
  CHECK(counts[1] == 0);
  CHECK(static_cast<double>(counts[0]) / n ==
        doctest::Approx(0.25).epsilon(0.05));
  CHECK(static_cast<double>(counts[2]) / n ==
        doctest::Approx(0.75).epsilon(0.05));
}

TEST_CASE("string hash is stable and distinguishes labels") {
  CHECK(Rng::hash("abc") == Rng::hash("abc"));
  CHECK(Rng::hash("abc") != Rng::hash("abd"));
  // FNV-1a reference value for the empty string.
  CHECK(Rng::hash("") == 0xCBF29CE484222325ull);
}
