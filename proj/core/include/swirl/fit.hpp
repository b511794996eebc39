#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "swirl/model.hpp"

namespace swirl {

/// Azimuthally averaged tangential wind sample from the observable region.
struct VelocityObservation {
  double r = 0.0;
  double z = 0.0;
  double v_obs = 0.0;
  double sigma = 1.0;
};

/// Box constraints on (v_c, n_r, r_c, n_z, z_c).
struct ParameterBounds {
  std::array<double, 5> lower{};
  std::array<double, 5> upper{};

  bool contains(const ModelParams& p) const;
  /// v_c in (0, 10 max v_obs], exponents in [1.05, 20], r_c in (0, R],
  /// z_c in (0, H].
  static ParameterBounds defaults(std::span<const VelocityObservation> obs, double R, double H);
};

struct FitOptions {
  int restarts = 10;
  int max_iter = 4000;
  /// Relative half-width of the restart jitter around the initial guess.
  double jitter = 0.15;
  std::uint64_t seed = 12345;
};

struct FitResult {
  SeparableVortex model{ModelParams{}};
  double rms_misfit = 0.0;
  /// Weighted sum of squares sum ((v - v_obs) / sigma)^2 at the optimum.
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Thrown when the observations cannot constrain all five parameters
/// (e.g. every sample shares one radius or one height).
class RankDeficientError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inverse-variance weighted least-squares misfit of the model to obs.
double fit_objective(const ModelParams& params, std::span<const VelocityObservation> obs);

/// Minimises the weighted misfit over the five profile parameters inside
/// bounds: bounded Nelder-Mead from the initial guess plus `restarts - 1`
/// jittered starts, then a Levenberg-Marquardt polish of the best point.
/// Returns the best point found with converged = false when the iteration
/// budget runs out. Throws std::invalid_argument on fewer than five
/// observations or an initial guess outside bounds, and RankDeficientError
/// on degenerate sampling.
FitResult fit_model(std::span<const VelocityObservation> obs, const ModelParams& initial,
                    const ParameterBounds& bounds, const FitOptions& options = {});

}  // namespace swirl
