#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <vector>

namespace wbary {

/// Seeded 64-bit stream used by every randomized routine.
///
/// The engine is std::mt19937_64 seeded with the user seed; its output
/// sequence is fixed by the C++ standard. All derived draws are computed here
/// from raw 64-bit outputs (never through std:: distributions, whose algorithms
/// are implementation defined), so a seed reproduces the same stream on every
/// conforming toolchain:
///   uniform()      = (next() >> 11) * 2^-53                 in [0, 1)
///   below(n)       = next() % n, rejecting next() >= 2^64 - (2^64 mod n)
///   categorical(p) = first i with uniform() < p_0 + ... + p_i
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t reject_from = (0 - n) % n;  // 2^64 mod n
    while (true) {
      const std::uint64_t x = next();
      if (x >= reject_from) return x % n;
    }
  }

  /// Index drawn with probability proportional to p (p sums to 1).
  std::size_t categorical(std::span<const double> p) {
    const double u = uniform();
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (p[i] <= 0.0) continue;
      acc += p[i];
      last_positive = i;
      if (u < acc) return i;
    }
    return last_positive;
  }

  /// Standard exponential variate, -log(1 - U).
  double exponential() { return -std::log1p(-uniform()); }

  /// Uniform size-t subset of {0..k-1} by partial Fisher-Yates, returned sorted.
  std::vector<std::size_t> subset(std::size_t k, std::size_t t) {
    std::vector<std::size_t> items(k);
    std::iota(items.begin(), items.end(), std::size_t{0});
    for (std::size_t i = 0; i < t; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(below(k - i));
      std::swap(items[i], items[j]);
    }
    items.resize(t);
    std::sort(items.begin(), items.end());
    return items;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace wbary
