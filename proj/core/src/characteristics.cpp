#include "swirl/characteristics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "detail/roots.hpp"
#include "swirl/parallel.hpp"

namespace swirl {

const char* to_string(Termination t) {
  switch (t) {
    case Termination::HitMoh: return "HitMOH";
    case Termination::HitOuterBoundary: return "HitOuterBoundary";
    case Termination::Closed: return "Closed";
    case Termination::MaxSteps: return "MaxSteps";
    case Termination::LeftDomain: return "LeftDomain";
  }
  return "?";
}

namespace {

using State = std::array<double, 3>;  // r, z, psi

struct Tangent {
  State d{};
  bool stagnant = false;
};

// d(r, z, psi)/ds for unit-speed travel along the characteristic.
Tangent tangent(const VortexModel& model, const State& s, double direction, double nu,
                double stagnation) {
  Tangent out;
  const double eta = model.eta(s[0], s[1]);
  const double zeta = model.zeta(s[0], s[1]);
  const double mag = std::hypot(eta, zeta);
  if (!(mag > stagnation)) {
    out.stagnant = true;
    return out;
  }
  out.d[0] = direction * eta / mag;
  out.d[1] = direction * zeta / mag;
  if (nu != 0.0) {
    const double source = nu * s[0] * (model.dzeta_dr(s[0], s[1]) - model.deta_dz(s[0], s[1]));
    out.d[2] = direction * source / mag;
  }
  return out;
}

State axpy(const State& s, double a, const State& d) {
  return {s[0] + a * d[0], s[1] + a * d[1], s[2] + a * d[2]};
}

bool inside_quadrant(const State& s) { return s[0] > 0.0 && s[1] > 0.0; }

// Newton steps along grad Gamma = (r zeta, -r eta), which is normal to the
// characteristic, so RK4 truncation error does not accumulate as drift.
void project(const VortexModel& m, State& s, double level, double tol) {
  for (int it = 0; it < 4; ++it) {
    const double miss = m.circulation(s[0], s[1]) - level;
    if (std::abs(miss) <= tol) return;
    const double gr = s[0] * m.zeta(s[0], s[1]);
    const double gz = -s[0] * m.eta(s[0], s[1]);
    const double g2 = gr * gr + gz * gz;
    if (!(g2 > 0.0)) return;
    const State p{s[0] - miss * gr / g2, s[1] - miss * gz / g2, s[2]};
    if (!inside_quadrant(p)) return;
    s = p;
  }
}

// Newton on x -> Gamma along a grid line, kept inside [lo, hi]; x0 when it
// does not settle.
template <class G, class D>
double refine_crossing(G&& gamma, D&& slope, double x0, double lo, double hi, double level,
                       double tol) {
  double x = x0;
  for (int it = 0; it < 8; ++it) {
    const double miss = gamma(x) - level;
    if (std::abs(miss) <= tol) return x;
    const double d = slope(x);
    if (!(std::abs(d) > 0.0)) break;
    x -= miss / d;
    if (!(x >= lo && x <= hi)) break;
  }
  return x0;
}

}  // namespace

CharCurve trace_rk(const VortexModel& model, const Domain& domain, Point start, int direction,
                   const TraceOptions& options) {
  if (direction != 1 && direction != -1) {
    throw std::invalid_argument("trace_rk: direction must be +1 or -1");
  }
  if (!(options.step > 0.0)) throw std::invalid_argument("trace_rk: step must be > 0");
  if (!(start.r > 0.0) || !(start.z > 0.0)) {
    throw std::invalid_argument("trace_rk: start lies on an axis where the field vanishes");
  }
  if (start.r > domain.R || start.z > domain.H) {
    throw std::invalid_argument("trace_rk: start lies outside the domain");
  }

  const double scale = model.vorticity_scale();
  const double stagnation = 1e-14 * scale;
  {
    const double mag = std::hypot(model.eta(start.r, start.z), model.zeta(start.r, start.z));
    if (mag < 1e-6 * scale) {
      throw std::invalid_argument("trace_rk: start is too close to a stagnation point");
    }
  }

  const double dir = direction;
  const double nu = options.integrate_psi ? domain.nu : 0.0;
  const double h = domain.h;

  CharCurve curve;
  curve.gamma_level = model.circulation(start.r, start.z);
  const double level = curve.gamma_level;
  const double tol = options.level_tol * std::abs(level);
  curve.samples.push_back({0.0, start.r, start.z});

  State s{start.r, start.z, 0.0};
  const Tangent t0 = tangent(model, s, dir, nu, stagnation);
  double t = 0.0;

  for (int k = 1; k <= options.max_steps; ++k) {
    const Tangent k1 = tangent(model, s, dir, nu, stagnation);
    if (k1.stagnant) {
      curve.stagnated = true;
      curve.termination = Termination::MaxSteps;
      return curve;
    }
    // Shrink the step where it would carry a stage across an axis.
    double ds = options.step;
    if (k1.d[0] < 0.0) ds = std::min(ds, 0.25 * s[0] / -k1.d[0]);
    if (k1.d[1] < 0.0) ds = std::min(ds, 0.25 * s[1] / -k1.d[1]);

    State next{};
    bool accepted = false;
    auto rk4 = [&](double step) {
      const State p2 = axpy(s, 0.5 * step, k1.d);
      if (!inside_quadrant(p2)) return false;
      const Tangent k2 = tangent(model, p2, dir, nu, stagnation);
      if (k2.stagnant) return false;
      const State p3 = axpy(s, 0.5 * step, k2.d);
      if (!inside_quadrant(p3)) return false;
      const Tangent k3 = tangent(model, p3, dir, nu, stagnation);
      if (k3.stagnant) return false;
      const State p4 = axpy(s, step, k3.d);
      if (!inside_quadrant(p4)) return false;
      const Tangent k4 = tangent(model, p4, dir, nu, stagnation);
      if (k4.stagnant) return false;
      for (int c = 0; c < 3; ++c) {
        next[c] = s[c] + step / 6.0 * (k1.d[c] + 2.0 * k2.d[c] + 2.0 * k3.d[c] + k4.d[c]);
      }
      return inside_quadrant(next);
    };
    for (int attempt = 0; attempt < 40; ++attempt) {
      if ((accepted = rk4(ds))) break;
      ds *= 0.5;
    }
    if (!accepted) {
      curve.stagnated = true;
      curve.termination = Termination::MaxSteps;
      return curve;
    }

    project(model, next, level, tol);
    const double t_next = t + dir * ds;

    if (next[0] >= domain.R) {
      const double f = (domain.R - s[0]) / (next[0] - s[0]);
      const double R = domain.R;
      curve.z_hit = refine_crossing([&](double z) { return model.circulation(R, z); },
                                    [&](double z) { return -R * model.eta(R, z); },
                                    s[1] + f * (next[1] - s[1]), std::min(s[1], next[1]) - ds,
                                    std::max(s[1], next[1]) + ds, level, tol);
      curve.psi_change = s[2] + f * (next[2] - s[2]);
      curve.samples.push_back({t + f * (t_next - t), domain.R, curve.z_hit});
      curve.termination = Termination::HitOuterBoundary;
      return curve;
    }
    if (options.stop_at_moh && ((s[1] < h && next[1] >= h) || (s[1] > h && next[1] <= h))) {
      const double f = (h - s[1]) / (next[1] - s[1]);
      curve.r_hit = refine_crossing([&](double r) { return model.circulation(r, h); },
                                    [&](double r) { return r * model.zeta(r, h); },
                                    s[0] + f * (next[0] - s[0]),
                                    std::max(std::min(s[0], next[0]) - ds, 0.0),
                                    std::max(s[0], next[0]) + ds, level, tol);
      curve.psi_change = s[2] + f * (next[2] - s[2]);
      curve.samples.push_back({t + f * (t_next - t), curve.r_hit, h});
      curve.termination = Termination::HitMoh;
      return curve;
    }
    if (next[1] >= domain.H) {
      curve.psi_change = next[2];
      curve.termination = Termination::LeftDomain;
      return curve;
    }

    s = next;
    t = t_next;
    curve.samples.push_back({t, s[0], s[1]});
    curve.psi_change = s[2];

    if (k >= 10) {
      const double dist = std::hypot(s[0] - start.r, s[1] - start.z);
      if (dist < 2.0 * options.step) {
        const Tangent kn = tangent(model, s, dir, nu, stagnation);
        const double heading = kn.d[0] * t0.d[0] + kn.d[1] * t0.d[1];
        if (!kn.stagnant && heading > 0.0) {
          curve.samples.push_back({t + dir * dist, start.r, start.z});
          curve.termination = Termination::Closed;
          return curve;
        }
      }
    }
  }
  curve.termination = Termination::MaxSteps;
  return curve;
}

CharCurve trace_full(const VortexModel& model, const Domain& domain, Point start,
                     const TraceOptions& options) {
  CharCurve forward = trace_rk(model, domain, start, +1, options);
  if (forward.termination == Termination::Closed) return forward;
  CharCurve backward = trace_rk(model, domain, start, -1, options);

  CharCurve full;
  full.gamma_level = forward.gamma_level;
  full.termination = forward.termination;
  full.start_termination = backward.termination;
  full.r_hit = forward.r_hit;
  full.z_hit = forward.z_hit;
  full.stagnated = forward.stagnated || backward.stagnated;
  full.psi_change = forward.psi_change - backward.psi_change;
  full.samples.reserve(forward.samples.size() + backward.samples.size());
  for (auto it = backward.samples.rbegin(); it != backward.samples.rend(); ++it) {
    full.samples.push_back(*it);
  }
  full.samples.insert(full.samples.end(), forward.samples.begin() + 1, forward.samples.end());
  return full;
}

double radial_circulation_peak(const VortexModel& model, const Domain& domain, double z) {
  const double R = domain.R;
  auto f = [&](double r) { return model.zeta(r, z); };
  double lo = 0.0, hi = 0.0;
  const int n = 4001;
  const int changes = detail::count_sign_changes(f, R / (n - 1), R, n - 1, &lo, &hi);
  if (changes == 0) return R;
  return detail::bisect(f, lo, hi, 1e-15 * R).value_or(0.5 * (lo + hi));
}

double vertical_peak_height(const VortexModel& model, const Domain& domain) {
  const double H = domain.H;
  const double r_ref = radial_circulation_peak(model, domain, domain.h);
  auto f = [&](double z) { return model.eta(r_ref, z); };
  double lo = 0.0, hi = 0.0;
  const int n = 4001;
  const int changes = detail::count_sign_changes(f, H / (n - 1), H, n - 1, &lo, &hi);
  if (changes == 0) return H;
  return detail::bisect(f, lo, hi, 1e-15 * H).value_or(0.5 * (lo + hi));
}

MohLine::MohLine(const VortexModel& model, const Domain& domain, double tol)
    : model_(&model), h_(domain.h), R_(domain.R), tol_(tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("MohLine: tol must be > 0");
  peak_r_ = radial_circulation_peak(model, domain, domain.h);
  peak_level_ = model.circulation(peak_r_, h_);
  outer_level_ = model.circulation(R_, h_);
  z_peak_ = vertical_peak_height(model, domain);
  wall_level_ = model.circulation(R_, std::min(z_peak_, h_));
}

bool MohLine::outer_side(Point p, double level) const {
  if (p.r <= peak_r_) return false;
  return p.z >= z_peak_ || level > wall_level_;
}

std::optional<MohHit> MohLine::locate(double level, bool prefer_outer) const {
  if (level > peak_level_) return std::nullopt;
  auto f = [&](double r) { return model_->circulation(r, h_) - level; };
  if (prefer_outer && peak_r_ < R_ && level >= outer_level_) {
    if (auto r = detail::bisect(f, peak_r_, R_, tol_)) return MohHit{*r, Branch::Outer};
  }
  if (auto r = detail::bisect(f, 0.0, peak_r_, tol_)) return MohHit{*r, Branch::Inner};
  return std::nullopt;
}

std::optional<MohHit> moh_intersection_bisect(const VortexModel& model, const Domain& domain,
                                              Point point, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("moh_intersection_bisect: tol must be > 0");
  if (domain.nu != 0.0) {
    throw std::invalid_argument(
        "moh_intersection_bisect: requires nu = 0; use trace_rk for viscous propagation");
  }
  const MohLine line(model, domain, tol);
  if (point.z == domain.h) {
    return MohHit{point.r, point.r > line.peak_radius() ? Branch::Outer : Branch::Inner};
  }
  const double level = model.circulation(point.r, point.z);
  return line.locate(level, line.outer_side(point, level));
}

std::size_t VoidMap::count(CellFlag f) const {
  return static_cast<std::size_t>(std::count(flags.begin(), flags.end(), f));
}

double min_unreachable_height(const VortexModel& model, const Domain& domain, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("min_unreachable_height: tol must be > 0");
  const double z_peak = vertical_peak_height(model, domain);
  const double h = domain.h;
  if (h - z_peak <= 1e-9 * domain.H) return h;
  const double r_ref = radial_circulation_peak(model, domain, h);
  const double target = model.circulation(r_ref, h);
  auto f = [&](double z) { return model.circulation(r_ref, z) - target; };
  return detail::bisect(f, 0.0, z_peak, tol).value_or(z_peak);
}

VoidMap classify(const VortexModel& model, const Domain& domain, const Grid& grid,
                 double rk_step) {
  grid.validate();
  VoidMap map;
  map.grid = grid;
  map.flags.assign(grid.size(), CellFlag::Reachable);

  const MohLine line(model, domain, 1e-13 * domain.R);
  map.gamma_threshold = line.peak_level();
  map.h_o = min_unreachable_height(model, domain, 1e-13 * domain.H);

  parallel_for(static_cast<std::size_t>(grid.nz), [&](std::size_t row) {
    const int j = static_cast<int>(row);
    const double z = grid.z(j);
    for (int i = 0; i < grid.nr; ++i) {
      const double r = grid.r(i);
      CellFlag& flag = map.flags[grid.index(i, j)];
      if (z >= domain.h) {
        flag = CellFlag::Observable;
      } else if (r == 0.0 || z == 0.0) {
        flag = CellFlag::Reachable;
      } else {
        flag = model.circulation(r, z) > map.gamma_threshold ? CellFlag::Void
                                                             : CellFlag::Reachable;
      }
    }
  });

  if (map.h_o < domain.h && line.peak_radius() < domain.R) {
    TraceOptions opts;
    opts.step = rk_step > 0.0 ? rk_step : 1e-3 * std::min(domain.R, domain.H);
    opts.stop_at_moh = false;
    try {
      const CharCurve boundary = trace_full(model, domain, {line.peak_radius(), domain.h}, opts);
      map.void_boundary.reserve(boundary.samples.size());
      for (const auto& s : boundary.samples) map.void_boundary.push_back({s.r, s.z});
    } catch (const std::invalid_argument&) {
      // MOH line through the stagnation point: the void is degenerate.
    }
  }
  return map;
}

int detect_multiple_moh_intersections(const VortexModel& /*model*/, const Domain& domain,
                                      const CharCurve& curve) {
  int crossings = 0;
  int last_sign = 0;
  for (const auto& s : curve.samples) {
    const double d = s.z - domain.h;
    const int sign = (d > 0.0) - (d < 0.0);
    if (sign == 0) continue;
    if (last_sign != 0 && sign != last_sign) ++crossings;
    last_sign = sign;
  }
  return crossings;
}

}  // namespace swirl
