#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace sida {

/// Deterministic seeded generator. All randomness in a run flows from one
/// master seed; independent streams are derived by label so adding a consumer
/// does not shift the draws of existing ones. The gaussian and bounded-int
/// transforms are pinned here rather than taken from <random> distributions,
/// which keeps streams identical across standard libraries.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed);

  /// New independent stream keyed by (label, index).
  SeededRng derive(std::string_view label, std::uint64_t index = 0) const;

  std::uint64_t next_u64();
  double uniform();                        // [0, 1)
  double uniform(double lo, double hi);    // [lo, hi)
  std::size_t uniform_index(std::size_t n);  // unbiased draw from [0, n)
  double gaussian();                       // standard normal, Box-Muller

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace sida
