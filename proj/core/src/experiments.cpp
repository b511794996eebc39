#include "swirl/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "swirl/parallel.hpp"
#include "swirl/random.hpp"

namespace swirl {

namespace {


bool carries_values(CellFlag f) { return f == CellFlag::Reachable || f == CellFlag::Observable; }

ModelParams perturbed(const ModelParams& p) {
  return {p.v_c * 1.2, p.n_r * 0.8, p.r_c * 1.2, p.n_z * 0.8, p.z_c * 1.2};
}

ModelParams clamp_into(const ModelParams& p, const ParameterBounds& b) {
  auto a = p.to_array();
  for (std::size_t k = 0; k < a.size(); ++k) a[k] = std::clamp(a[k], b.lower[k], b.upper[k]);
  return ModelParams::from_array(a);
}

Domain twin_domain(const TwinTruth& truth, const TwinSettings& s) {
  Domain d = truth.domain();
  d.h = s.h;
  d.h_s = s.h_s;
  d.validate();
  return d;
}

ScalarSpread spread(const std::vector<double>& xs, double truth) {
  ScalarSpread s;
  s.min = *std::min_element(xs.begin(), xs.end());
  s.max = *std::max_element(xs.begin(), xs.end());
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - s.mean) * (x - s.mean);
  s.std = xs.size() > 1 ? std::sqrt(ss / static_cast<double>(xs.size() - 1)) : 0.0;
  s.covered = s.min <= truth && truth <= s.max;
  return s;
}

}  // namespace

TwinTruth::TwinTruth(const SeparableVortex& model, const Domain& domain,
                     const TruthProfile& profile)
    : model_(model), domain_(domain), profile_(profile) {
  if (!(profile.inflow_speed >= 0.0) || !std::isfinite(profile.inflow_speed)) {
    throw std::invalid_argument("truth: inflow_speed must be finite and >= 0");
  }
  if (!(profile.circulation_fraction > 0.0) || !std::isfinite(profile.circulation_fraction)) {
    throw std::invalid_argument("truth: circulation_fraction must be finite and > 0");
  }
  const ModelParams& p = model.params();
  // Surface inflow is kappa * v_c * phi(r) * psi'(0), largest where phi is.
  const double r_best = std::min(p.r_c, domain.R);
  const double surface_eta = p.v_c * model.radial().value(r_best) * model.vertical().slope(0.0);
  kappa_ = profile.inflow_speed / surface_eta;

  const double r_peak = std::min(model.circulation_peak_radius().value_or(domain.R), domain.R);
  const double z_peak = std::min(p.z_c, domain.H);
  gamma_scale_ = profile.circulation_fraction * model.circulation(r_peak, z_peak);
}

double TwinTruth::slope(double gamma) const { return -kappa_ * std::exp(-gamma / gamma_scale_); }

double TwinTruth::psi(double r, double z) const {
  const double g = model_.circulation(r, z);
  return -kappa_ * gamma_scale_ * -std::expm1(-g / gamma_scale_);
}

double TwinTruth::u(double r, double z) const {
  return -slope(model_.circulation(r, z)) * model_.eta(r, z);
}

double TwinTruth::w(double r, double z) const {
  return -slope(model_.circulation(r, z)) * model_.zeta(r, z);
}

RadialProfile TwinTruth::u_at(double h) const {
  return [self = *this, h](double r) { return self.u(r, h); };
}

RadialField TwinTruth::u_field() const {
  return [self = *this](double r, double z) { return self.u(r, z); };
}

RetrievedField TwinTruth::field(const Grid& grid, const VoidMap* mask) const {
  RetrievedField f(grid);
  for (int j = 0; j < grid.nz; ++j) {
    for (int i = 0; i < grid.nr; ++i) {
      const std::size_t c = grid.index(i, j);
      f.flag[c] = mask ? mask->flags[c] : CellFlag::Observable;
      if (!carries_values(f.flag[c])) continue;
      const double r = grid.r(i);
      const double z = grid.z(j);
      f.psi[c] = psi(r, z);
      f.u[c] = u(r, z);
      f.v[c] = v(r, z);
      f.w[c] = w(r, z);
    }
  }
  return f;
}

TwinTruth generate_truth(const SeparableVortex& model, const Domain& domain,
                         const TruthProfile& profile) {
  domain.validate();
  const StructureReport report = check_structure(model, domain);
  if (!report.ok()) {
    std::string why;
    for (const ClauseResult* c : {&report.smooth, &report.no_slip, &report.positive_interior,
                                  &report.single_zeta_zero, &report.single_vertical_max}) {
      if (c->passed) continue;
      if (!why.empty()) why += "; ";
      why += c->detail;
    }
    throw std::invalid_argument("truth model violates the single-maximum assumption: " + why);
  }
  return TwinTruth(model, domain, profile);
}

std::vector<VelocityObservation> make_pseudo_obs(const TwinTruth& truth, const Grid& grid,
                                                 double h, double sigma, std::uint64_t seed) {
  grid.validate();
  if (!(sigma >= 0.0)) throw std::invalid_argument("pseudo-obs: sigma must be >= 0");
  Rng rng(seed);
  std::vector<VelocityObservation> obs;
  const double eps = 1e-12 * grid.top;
  for (int j = 0; j < grid.nz; ++j) {
    const double z = grid.z(j);
    if (z < h - eps) continue;
    for (int i = 0; i < grid.nr; ++i) {
      const double r = grid.r(i);
      const double v = truth.v(r, z) + (sigma > 0.0 ? sigma * rng.normal() : 0.0);
      obs.push_back({r, z, v, sigma > 0.0 ? sigma : 1.0});
    }
  }
  return obs;
}

SurfaceScalars surface_scalars(const RetrievedField& field, double h_s) {
  const Grid& g = field.grid;
  SurfaceScalars s;
  const double eps = 1e-12 * g.top;
  for (int j = 0; j < g.nz && g.z(j) <= h_s + eps; ++j) {
    for (int i = 0; i < g.nr; ++i) {
      const std::size_t c = g.index(i, j);
      if (!carries_values(field.flag[c])) continue;
      const double u = field.u[c];
      const double v = field.v[c];
      const double w = field.w[c];
      if (!std::isfinite(u) || !std::isfinite(v) || !std::isfinite(w)) continue;
      s.u_plus = std::max(s.u_plus, std::abs(u));
      s.w_plus = std::max(s.w_plus, w);
      s.v_max = std::max(s.v_max, std::sqrt(u * u + v * v + w * w));
      ++s.nodes;
    }
  }
  return s;
}

TwinOutcome run_twin(const TwinTruth& truth, const TwinSettings& settings) {
  settings.grid.validate();
  settings.obs_grid.validate();
  TwinOutcome out;
  out.domain = twin_domain(truth, settings);
  const Domain& d = out.domain;

  const auto obs = make_pseudo_obs(truth, settings.obs_grid, d.h, settings.sigma, settings.seed);
  const ParameterBounds bounds = settings.bounds.value_or(ParameterBounds::defaults(obs, d.R, d.H));
  const ModelParams initial =
      clamp_into(settings.initial.value_or(perturbed(truth.model().params())), bounds);
  FitOptions fo = settings.fit;
  fo.seed += settings.seed;
  out.fit = fit_model(obs, initial, bounds, fo);

  const SeparableVortex& fitted = out.fit.model;
  out.void_map = classify(fitted, d, settings.grid, settings.retrieve.rk_step);
  out.boundary = build_moh_boundary(fitted, d, truth.u_at(d.h), settings.quadrature_n);
  RetrieveOptions ro = settings.retrieve;
  if (!ro.observed_u) ro.observed_u = truth.u_field();
  out.field = differentiate(retrieve(fitted, d, out.boundary, out.void_map, ro));
  out.scalars = surface_scalars(out.field, d.h_s);
  out.surface_nodes = out.scalars.nodes;

  if (!settings.diagnostics) return out;
  out.residuals = residuals(fitted, d, out.field);

  const Grid& g = out.field.grid;
  double psi_err = 0.0, psi_ref = 0.0;
  double u_err = 0.0, u_ref = 0.0, w_err = 0.0, w_ref = 0.0;
  for (int j = 0; j < g.nz; ++j) {
    for (int i = 0; i < g.nr; ++i) {
      const std::size_t c = g.index(i, j);
      if (out.field.flag[c] != CellFlag::Reachable) continue;
      const double r = g.r(i);
      const double z = g.z(j);
      if (std::isfinite(out.field.psi[c])) {
        const double t = truth.psi(r, z);
        psi_err = std::max(psi_err, std::abs(out.field.psi[c] - t));
        psi_ref = std::max(psi_ref, std::abs(t));
      }
      if (!is_interior(out.field, i, j)) continue;
      if (std::isfinite(out.field.u[c])) {
        const double t = truth.u(r, z);
        u_err = std::max(u_err, std::abs(out.field.u[c] - t));
        u_ref = std::max(u_ref, std::abs(t));
      }
      if (std::isfinite(out.field.w[c])) {
        const double t = truth.w(r, z);
        w_err = std::max(w_err, std::abs(out.field.w[c] - t));
        w_ref = std::max(w_ref, std::abs(t));
      }
    }
  }
  out.psi_rel_error = psi_ref > 0.0 ? psi_err / psi_ref : psi_err;
  out.u_rel_error = u_ref > 0.0 ? u_err / u_ref : u_err;
  out.w_rel_error = w_ref > 0.0 ? w_err / w_ref : w_err;
  return out;
}

SurfaceScalars truth_scalars(const TwinTruth& truth, const TwinSettings& settings) {
  const Domain d = twin_domain(truth, settings);
  const VoidMap map = classify(truth.model(), d, settings.grid, settings.retrieve.rk_step);
  return surface_scalars(truth.field(settings.grid, &map), d.h_s);
}

EnsembleResult run_ensemble(const TwinTruth& truth, const TwinSettings& settings, int members,
                            std::uint64_t base_seed, const MemberCallback& on_member) {
  if (members < 2) throw std::invalid_argument("ensemble: need at least 2 members");
  EnsembleResult res;
  res.sigma = settings.sigma;
  res.h = settings.h;
  res.h_s = settings.h_s;
  res.truth = truth_scalars(truth, settings);
  res.members.resize(static_cast<std::size_t>(members));

  parallel_for(res.members.size(), [&](std::size_t k) {
    EnsembleMember& m = res.members[k];
    m.seed = base_seed + k;
    TwinSettings s = settings;
    s.seed = m.seed;
    s.diagnostics = false;
    try {
      const TwinOutcome out = run_twin(truth, s);
      m.ok = true;
      m.params = out.fit.model.params();
      m.rms_misfit = out.fit.rms_misfit;
      m.scalars = out.scalars;
      if (on_member) on_member(m, out);
    } catch (const std::exception& e) {
      m.ok = false;
      m.error = e.what();
    }
  });

  std::vector<double> up, wp, vm;
  for (const EnsembleMember& m : res.members) {
    if (!m.ok) continue;
    up.push_back(m.scalars.u_plus);
    wp.push_back(m.scalars.w_plus);
    vm.push_back(m.scalars.v_max);
  }
  res.successes = up.size();
  if (res.successes < 2) {
    throw std::runtime_error("ensemble: fewer than 2 members succeeded");
  }
  res.u_plus = spread(up, res.truth.u_plus);
  res.w_plus = spread(wp, res.truth.w_plus);
  res.v_max = spread(vm, res.truth.v_max);
  return res;
}

}  // namespace swirl
