#include "swirl/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "detail/roots.hpp"

namespace swirl {

PeakProfile::PeakProfile(double exponent, double peak) : n_(exponent), xc_(peak) {
  if (!(std::isfinite(exponent) && exponent > 1.0)) {
    throw std::invalid_argument("PeakProfile: exponent must be > 1");
  }
  if (!(std::isfinite(peak) && peak > 0.0)) {
    throw std::invalid_argument("PeakProfile: peak location must be > 0");
  }
  a_ = n_ * std::pow(xc_, n_ - 1.0);
  b_ = (n_ - 1.0) * std::pow(xc_, n_);
}

double PeakProfile::denominator(double x, double& xn) const {
  xn = std::pow(x, n_);
  return b_ + xn;
}

double PeakProfile::value(double x) const {
  double xn;
  const double d = denominator(x, xn);
  return a_ * x / d;
}

double PeakProfile::value_over_x(double x) const {
  double xn;
  return a_ / denominator(x, xn);
}

double PeakProfile::slope(double x) const {
  double xn;
  const double d = denominator(x, xn);
  return a_ * (b_ - (n_ - 1.0) * xn) / (d * d);
}

double PeakProfile::curvature(double x) const {
  double xn;
  const double d = denominator(x, xn);
  const double xn1 = std::pow(x, n_ - 1.0);
  return a_ * n_ * xn1 * ((n_ - 1.0) * xn - (n_ + 1.0) * b_) / (d * d * d);
}

double PeakProfile::value_over_x_slope(double x) const {
  double xn;
  const double d = denominator(x, xn);
  const double xn1 = std::pow(x, n_ - 1.0);
  return -a_ * n_ * xn1 / (d * d);
}

SeparableVortex::SeparableVortex(const ModelParams& params)
    : params_(params),
      radial_(params.n_r, params.r_c),
      vertical_(params.n_z, params.z_c) {
  if (!(std::isfinite(params.v_c) && params.v_c > 0.0)) {
    throw std::invalid_argument("SeparableVortex: v_c must be > 0");
  }
}

double SeparableVortex::speed(double r, double z) const {
  return params_.v_c * radial_.value(r) * vertical_.value(z);
}

double SeparableVortex::circulation(double r, double z) const {
  return params_.v_c * r * radial_.value(r) * vertical_.value(z);
}

// (1/r) d(r phi)/dr = phi/r + phi'; both terms are regular at r = 0.
double SeparableVortex::zeta(double r, double z) const {
  return params_.v_c * vertical_.value(z) * (radial_.value_over_x(r) + radial_.slope(r));
}

double SeparableVortex::eta(double r, double z) const {
  return -params_.v_c * radial_.value(r) * vertical_.slope(z);
}

double SeparableVortex::dzeta_dr(double r, double z) const {
  return params_.v_c * vertical_.value(z) *
         (radial_.value_over_x_slope(r) + radial_.curvature(r));
}

double SeparableVortex::deta_dz(double r, double z) const {
  return -params_.v_c * radial_.value(r) * vertical_.curvature(z);
}

double SeparableVortex::vorticity_scale() const {
  return 2.0 * params_.v_c * params_.n_r / ((params_.n_r - 1.0) * params_.r_c);
}

std::optional<double> SeparableVortex::circulation_peak_radius() const {
  const double n = params_.n_r;
  if (n <= 2.0) return std::nullopt;
  return std::pow(2.0 * (n - 1.0) / (n - 2.0), 1.0 / n) * params_.r_c;
}

void Domain::validate() const {
  auto fail = [](const std::string& what) {
    throw std::invalid_argument("Domain: " + what);
  };
  if (!(std::isfinite(R) && R > 0.0)) fail("R must be > 0");
  if (!(std::isfinite(H) && H > 0.0)) fail("H must be > 0");
  if (!(std::isfinite(h) && h > 0.0 && h < H)) fail("h must satisfy 0 < h < H");
  if (!(std::isfinite(h_s) && h_s > 0.0 && h_s <= H)) fail("h_s must satisfy 0 < h_s <= H");
  if (!(std::isfinite(nu) && nu >= 0.0)) fail("nu must be >= 0");
}

namespace {

std::string fmt_double(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

}  // namespace

StructureReport check_structure(const VortexModel& model, const Domain& domain,
                                       int samples) {
  StructureReport report;
  samples = std::max(samples, 9);
  const double R = domain.R;
  const double H = domain.H;
  auto rs = [&](int k) { return R * k / (samples - 1); };
  auto zs = [&](int k) { return H * k / (samples - 1); };

  double vmax = 0.0;
  bool finite = true;
  for (int j = 0; j < samples; ++j) {
    for (int i = 0; i < samples; ++i) {
      const double v = model.speed(rs(i), zs(j));
      if (!std::isfinite(v)) finite = false;
      vmax = std::max(vmax, std::abs(v));
    }
  }

  // (1) derivative fields finite and consistent with the speed field
  {
    double worst = 0.0;
    const double step = 1e-6 * std::max(R, H);
    for (int j = 1; j < samples - 1 && finite; j += 8) {
      for (int i = 1; i < samples - 1; i += 8) {
        const double r = rs(i);
        const double z = zs(j);
        const double zeta = model.zeta(r, z);
        const double eta = model.eta(r, z);
        if (!std::isfinite(zeta) || !std::isfinite(eta) ||
            !std::isfinite(model.dzeta_dr(r, z)) || !std::isfinite(model.deta_dz(r, z))) {
          finite = false;
          break;
        }
        const double fd_zeta = (model.circulation(r + step, z) - model.circulation(r - step, z)) /
                               (2.0 * step * r);
        const double fd_eta = -(model.speed(r, z + step) - model.speed(r, z - step)) / (2.0 * step);
        const double scale = std::max(model.vorticity_scale(), 1e-300);
        worst = std::max(worst, std::abs(fd_zeta - zeta) / scale);
        worst = std::max(worst, std::abs(fd_eta - eta) / scale);
      }
    }
    report.smooth.passed = finite && worst < 1e-4;
    report.smooth.detail = finite ? "max derivative mismatch " + fmt_double(worst)
                                  : "non-finite field values";
  }

  // (2) no-slip on both axes
  {
    double worst = 0.0;
    for (int k = 0; k < samples; ++k) {
      worst = std::max(worst, std::abs(model.speed(0.0, zs(k))));
      worst = std::max(worst, std::abs(model.speed(rs(k), 0.0)));
    }
    report.no_slip.passed = worst <= 1e-14 * std::max(vmax, 1e-300);
    report.no_slip.detail = "max |v| on axes " + fmt_double(worst);
  }

  // (3) positivity on the open interior
  {
    int bad = 0;
    for (int j = 1; j < samples; ++j) {
      for (int i = 1; i < samples; ++i) {
        if (!(model.speed(rs(i), zs(j)) > 0.0)) ++bad;
      }
    }
    report.positive_interior.passed = bad == 0;
    report.positive_interior.detail = std::to_string(bad) + " interior samples with v <= 0";
  }

  // (4) zeta changes sign exactly once along every row
  {
    int bad_rows = 0;
    int worst_count = 1;
    for (int j = 1; j < samples; ++j) {
      const double z = zs(j);
      const int c = detail::count_sign_changes([&](double r) { return model.zeta(r, z); },
                                               rs(1), R, samples - 1);
      if (c != 1) {
        ++bad_rows;
        if (std::abs(c - 1) > std::abs(worst_count - 1)) worst_count = c;
      }
    }
    const double zmid = zs(samples / 2);
    double lo = 0.0, hi = 0.0;
    const int c = detail::count_sign_changes([&](double r) { return model.zeta(r, zmid); }, rs(1),
                                             R, samples - 1, &lo, &hi);
    if (c >= 1) {
      report.r_o = detail::bisect([&](double r) { return model.zeta(r, zmid); }, lo, hi,
                                  1e-13 * R);
    }
    report.single_zeta_zero.passed = bad_rows == 0;
    report.single_zeta_zero.detail =
        bad_rows == 0 ? "one zero of zeta per row"
                      : std::to_string(bad_rows) + " rows without exactly one zero of zeta (" +
                            std::to_string(worst_count) + " found)";
  }

  // (5) dv/dz changes sign exactly once along every column
  {
    int bad_cols = 0;
    int worst_count = 1;
    for (int i = 1; i < samples; ++i) {
      const double r = rs(i);
      const int c = detail::count_sign_changes([&](double z) { return model.eta(r, z); }, zs(1),
                                               H, samples - 1);
      if (c != 1) {
        ++bad_cols;
        if (std::abs(c - 1) > std::abs(worst_count - 1)) worst_count = c;
      }
    }
    const double rmid = rs(samples / 2);
    double lo = 0.0, hi = 0.0;
    const int c = detail::count_sign_changes([&](double z) { return model.eta(rmid, z); }, zs(1),
                                             H, samples - 1, &lo, &hi);
    if (c >= 1) {
      report.z_o = detail::bisect([&](double z) { return model.eta(rmid, z); }, lo, hi,
                                  1e-13 * H);
    }
    report.single_vertical_max.passed = bad_cols == 0;
    report.single_vertical_max.detail =
        bad_cols == 0 ? "one vertical maximum per column"
                      : std::to_string(bad_cols) + " columns without exactly one vertical maximum (" +
                            std::to_string(worst_count) + " found)";
  }

  return report;
}

}  // namespace swirl
