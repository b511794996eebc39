#pragma once

#include <cstdint>
#include <random>

namespace swirl {

/// Seedable generator with platform-independent output. std::mt19937_64 is
/// fully specified by the standard; the standard distributions are not, so
/// uniform and normal deviates are derived here from the raw engine output.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal deviate (Box-Muller, both variates used).
  double normal();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace swirl
