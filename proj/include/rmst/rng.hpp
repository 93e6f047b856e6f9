#pragma once

#include <cstdint>

namespace rmst {

// Counter-based 64-bit generator built on the SplitMix64 finalizer
// (Steele, Lea & Flood 2014; Vigna's constants). Output i of a stream with
// key k is mix(k + (i+1) * GOLDEN_GAMMA), so any draw is a pure function of
// (key, counter). Streams are derived by hashing (master seed, s1, s2, s3)
// through the same mixer, which keeps replicate streams independent of
// worker scheduling.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Deterministic stream derivation: fold each index into the key.
  static CounterRng stream(std::uint64_t master, std::uint64_t s1 = 0,
                           std::uint64_t s2 = 0, std::uint64_t s3 = 0) {
    std::uint64_t k = mix(master ^ 0x8000000080003ADDULL);
    k = mix(k + 0x9E3779B97F4A7C15ULL * (s1 + 1));
    k = mix(k + 0xC2B2AE3D27D4EB4FULL * (s2 + 1));
    k = mix(k + 0x165667B19E3779F9ULL * (s3 + 1));
    return CounterRng(k);
  }

  std::uint64_t next_u64() {
    counter_ += 0x9E3779B97F4A7C15ULL;
    return mix_keyed(counter_);
  }

  // 53-bit uniform in the open interval (0, 1).
  double next_double() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  bool next_bernoulli(double p) { return next_double() < p; }

  // Unbiased-enough integer in [0, n) via 128-bit multiply-shift.
  std::uint64_t next_below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Standard normal via the inverse CDF; deterministic, no rejection.
  double next_normal();

  // Gamma(shape, scale=1), Marsaglia-Tsang; shape < 1 handled by boosting.
  double next_gamma(double shape);

  double next_chisq(double df) { return 2.0 * next_gamma(df / 2.0); }

  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t mix_keyed(std::uint64_t c) const {
    std::uint64_t z = key_ ^ c;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

// Standard normal quantile, Acklam's rational approximation refined with one
// Halley step against erfc; absolute error well under 1e-9 on (0,1).
double normal_quantile(double p);

}  // namespace rmst
