#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace blink {

// Counter-based deterministic generator. Every draw is a pure function of
// (key, counter), so substreams can be forked without sharing state and the
// same seed reproduces the same stream on any platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(mix(seed ^ mix(stream + 0x632BE59BD9B4E019ull))) {}

  // Derives an independent substream; does not advance this generator.
  Rng fork(std::uint64_t stream) const {
    return Rng(ForkTag{}, key_, stream + 1);
  }
  Rng fork(std::string_view label) const { return fork(hash(label)); }

  std::uint64_t next_u64() {
    return mix(key_ + 0x9E3779B97F4A7C15ull * ++counter_);
  }

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // One index in [0, n).
  std::uint64_t uniform_int(std::uint64_t n) {
    // 53-bit scaling keeps the draw reproducible; bias is < 2^-40 for any n
    // used here.
    return static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
  }

  // Standard normal via Box-Muller; consumes two uniforms per draw.
  double gaussian() {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(6.283185307179586476925286766559 * u2);
  }

  double gaussian(double mean, double stddev) {
    return mean + stddev * gaussian();
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Index drawn from an unnormalized nonnegative weight vector.
  template <typename Container>
  std::size_t categorical(const Container& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    double u = uniform() * total;
    double acc = 0.0;
    std::size_t last = 0;
    std::size_t i = 0;
    for (double w : weights) {
      acc += w;
      if (u < acc) return i;
      last = i;
      ++i;
    }
    return last;
  }

  static std::uint64_t hash(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (char c : s) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001B3ull;
    }
    return h;
  }

 private:
  struct ForkTag {};
  Rng(ForkTag, std::uint64_t key, std::uint64_t stream)
      : key_(mix(key + 0x9E3779B97F4A7C15ull * stream)) {}

  // SplitMix64 finalizer.
  static std::uint64_t mix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace blink
