#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace evac {

// std::mt19937_64 output is pinned by the standard, but the distribution
// classes are not; every draw below is hand-rolled so that a seed produces
// the same stream on every platform.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next() { return engine_(); }

  /// Unbiased integer in [0, n), rejection sampled.
  uint64_t bounded(uint64_t n) {
    assert(n > 0);
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t r = engine_();
    while (r >= limit) r = engine_();
    return r % n;
  }

  /// Integer in [lo, hi], inclusive.
  int64_t range(int64_t lo, int64_t hi) {
    assert(lo <= hi);
    return lo + static_cast<int64_t>(bounded(static_cast<uint64_t>(hi - lo) + 1));
  }

  /// Uniform double in [0, 1).
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; the paired value is discarded so the
  /// stream consumption per call is fixed.
  double gaussian() {
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  /// First k entries of a uniformly random k-subset of {0, ..., n-1}
  /// (partial Fisher-Yates).
  std::vector<size_t> sample_without_replacement(size_t n, size_t k) {
    assert(k <= n);
    std::vector<size_t> pool(n);
    for (size_t i = 0; i < n; ++i) pool[i] = i;
    for (size_t i = 0; i < k; ++i) {
      const size_t j = i + static_cast<size_t>(bounded(n - i));
      std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace evac
