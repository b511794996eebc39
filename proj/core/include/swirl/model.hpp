#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace swirl {

/// Algebraic single-peak profile
///
///   phi(x) = n xc^(n-1) x / ((n-1) xc^n + x^n)
///
/// which rises linearly from zero, peaks at phi(xc) = 1 and decays like
/// x^(1-n). Used as both the radial and the vertical factor of the
/// tangential wind. All derivatives are closed form.
class PeakProfile {
 public:
  /// Throws std::invalid_argument unless exponent > 1 and peak > 0.
  PeakProfile(double exponent, double peak);

  double exponent() const { return n_; }
  double peak() const { return xc_; }

  double value(double x) const;
  /// phi(x)/x, finite at x = 0 where it equals slope(0).
  double value_over_x(double x) const;
  double slope(double x) const;
  double curvature(double x) const;
  /// d/dx of phi(x)/x.
  double value_over_x_slope(double x) const;

 private:
  double denominator(double x, double& xn) const;

  double n_;
  double xc_;
  double a_;  // n xc^(n-1)
  double b_;  // (n-1) xc^n
};

/// Steady axisymmetric tangential wind v(r, z) and the vorticity fields the
/// characteristic equations are built from:
///
///   zeta = (1/r) d(r v)/dr,   eta = -dv/dz,   Gamma = r v.
///
/// Implementations are immutable; every method is safe to call concurrently.
class VortexModel {
 public:
  virtual ~VortexModel() = default;

  virtual double speed(double r, double z) const = 0;
  virtual double zeta(double r, double z) const = 0;
  virtual double eta(double r, double z) const = 0;
  virtual double dzeta_dr(double r, double z) const = 0;
  virtual double deta_dz(double r, double z) const = 0;

  virtual double circulation(double r, double z) const { return r * speed(r, z); }

  /// Characteristic vorticity magnitude, used to scale stagnation tests.
  virtual double vorticity_scale() const { return 1.0; }
};

struct ModelParams {
  double v_c = 1.0;
  double n_r = 4.0;
  double r_c = 1.0;
  double n_z = 4.0;
  double z_c = 2.0;

  std::array<double, 5> to_array() const { return {v_c, n_r, r_c, n_z, z_c}; }
  static ModelParams from_array(const std::array<double, 5>& a) {
    return {a[0], a[1], a[2], a[3], a[4]};
  }
  bool operator==(const ModelParams&) const = default;
};

/// v(r, z) = v_c phi(r; n_r, r_c) psi(z; n_z, z_c).
class SeparableVortex final : public VortexModel {
 public:
  /// Throws std::invalid_argument on v_c <= 0 or an invalid profile.
  explicit SeparableVortex(const ModelParams& params);

  const ModelParams& params() const { return params_; }
  const PeakProfile& radial() const { return radial_; }
  const PeakProfile& vertical() const { return vertical_; }

  double speed(double r, double z) const override;
  double zeta(double r, double z) const override;
  double eta(double r, double z) const override;
  double dzeta_dr(double r, double z) const override;
  double deta_dz(double r, double z) const override;
  double circulation(double r, double z) const override;
  double vorticity_scale() const override;

  /// Zero of zeta in r (the radius of maximum circulation). This is not r_c,
  /// the radius of maximum wind: r_o = (2(n_r-1)/(n_r-2))^(1/n_r) r_c.
  /// Empty when n_r <= 2, where r*phi(r) increases without a maximum.
  std::optional<double> circulation_peak_radius() const;
  /// Height where d psi/dz vanishes; equal to z_c for this family.
  double vertical_peak_height() const { return params_.z_c; }

 private:
  ModelParams params_;
  PeakProfile radial_;
  PeakProfile vertical_;
};

/// Cylindrical problem domain [0, R] x [0, H] split by the minimum
/// observable height h; the surface layer is 0 <= z <= h_s.
struct Domain {
  double R = 4.0;
  double H = 6.0;
  double h = 2.5;
  double h_s = 2.0;
  double nu = 0.0;

  /// Throws std::invalid_argument when an invariant fails.
  void validate() const;
  bool operator==(const Domain&) const = default;
};

struct ClauseResult {
  bool passed = false;
  std::string detail;
};

/// Outcome of the numerical check of the single-maximum structural
/// assumptions: smoothness, no-slip, positivity, a single zero of zeta in r,
/// and a single vertical maximum.
struct StructureReport {
  ClauseResult smooth;
  ClauseResult no_slip;
  ClauseResult positive_interior;
  ClauseResult single_zeta_zero;
  ClauseResult single_vertical_max;
  std::optional<double> r_o;
  std::optional<double> z_o;

  bool ok() const {
    return smooth.passed && no_slip.passed && positive_interior.passed &&
           single_zeta_zero.passed && single_vertical_max.passed;
  }
};

/// Samples the model on a (samples x samples) grid of the domain. Never
/// throws on a failing model; failures are reported per clause.
StructureReport check_structure(const VortexModel& model, const Domain& domain,
                                       int samples = 241);

}  // namespace swirl
