#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace ditras {

/// Seedable random stream. The engine is std::mt19937_64 (bit-exact across
/// standard libraries) and the floating draws are built from its raw output,
/// so sequences do not depend on the platform's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  /// Independent stream for the `index`-th consumer of a master seed.
  static Rng stream(std::uint64_t master_seed, std::uint64_t index) {
    return Rng(splitmix64(splitmix64(master_seed) ^ splitmix64(index + 0x9e3779b97f4a7c15ULL)));
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) {
    // Lemire-style rejection keeps the draw unbiased.
    const std::uint64_t limit = (~std::uint64_t{0}) - (~std::uint64_t{0}) % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  std::uint64_t next_u64() { return engine_(); }

  static std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

 private:
  std::mt19937_64 engine_;
};

/// Index of the bucket hit by `target` in [0, total) when walking `weights`
/// in order. Zero-weight buckets are never returned. Returns weights.size()
/// when every weight is zero.
inline std::size_t pick_weighted(std::span<const double> weights, double target) {
  double acc = 0.0;
  std::size_t last_positive = weights.size();
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    acc += weights[i];
    last_positive = i;
    if (target < acc) return i;
  }
  return last_positive;
}

/// Draws an index proportionally to `weights` (linear scan).
inline std::size_t sample_weighted(std::span<const double> weights, Rng& rng) {
  double total = 0.0;
  for (double w : weights) {
    if (w > 0.0) total += w;
  }
  if (!(total > 0.0)) return weights.size();
  return pick_weighted(weights, rng.uniform() * total);
}

/// Prebuilt cumulative table for repeated draws from a fixed discrete
/// distribution in O(log n). Produces the same index as sample_weighted for
/// the same uniform draw.
class CumulativeSampler {
 public:
  CumulativeSampler() = default;

  explicit CumulativeSampler(std::span<const double> weights) : cdf_(weights.size()) {
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (weights[i] > 0.0) {
        acc += weights[i];
        last_positive_ = i;
      }
      cdf_[i] = acc;
    }
  }

  double total() const { return cdf_.empty() ? 0.0 : cdf_.back(); }
  std::size_t size() const { return cdf_.size(); }

  /// Returns size() when the table carries no mass.
  std::size_t sample(Rng& rng) const {
    if (!(total() > 0.0)) return cdf_.size();
    return pick(rng.uniform() * total());
  }

  std::size_t pick(double target) const {
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), target);
    if (it == cdf_.end()) return last_positive_;
    return static_cast<std::size_t>(it - cdf_.begin());
  }

 private:
  std::vector<double> cdf_;
  std::size_t last_positive_ = 0;
};

}  // namespace ditras
