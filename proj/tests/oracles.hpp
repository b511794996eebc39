#pragma once

// Independent reference computations for the tests. Nothing here calls the
// analytic derivatives or the level-set machinery under test.

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "swirl/characteristics.hpp"
#include "swirl/model.hpp"
#include "swirl/random.hpp"

namespace oracle {

// Fourth-order central difference of f at x with step s.
template <class F>
double diff5(F&& f, double x, double s) {
  return (-f(x + 2 * s) + 8 * f(x + s) - 8 * f(x - s) + f(x - 2 * s)) / (12 * s);
}

// Keeps the stencil inside x > 0.
inline double safe_step(double x, double scale) { return std::min(1e-3 * scale, x / 4); }

inline double zeta_fd(const swirl::VortexModel& m, double r, double z) {
  auto rv = [&](double s) { return s * m.speed(s, z); };
  return diff5(rv, r, safe_step(r, 1.0)) / r;
}

inline double eta_fd(const swirl::VortexModel& m, double r, double z) {
  auto v = [&](double s) { return m.speed(r, s); };
  return -diff5(v, z, safe_step(z, 1.0));
}

inline double dzeta_dr_fd(const swirl::VortexModel& m, double r, double z) {
  auto zr = [&](double s) { return zeta_fd(m, s, z); };
  return diff5(zr, r, safe_step(r, 1.0));
}

inline double deta_dz_fd(const swirl::VortexModel& m, double r, double z) {
  auto ez = [&](double s) { return eta_fd(m, r, s); };
  return diff5(ez, z, safe_step(z, 1.0));
}

// Brute-force reachability: trace the characteristic through (r, z) both
// ways with RK4 and report whether it ever meets the MOH line.
enum class Traced { Reachable, Closed, OuterBoundary, Other };

inline Traced trace_node(const swirl::VortexModel& m, const swirl::Domain& d, double r,
                         double z, double step) {
  if (r <= 0.0 || z <= 0.0) return Traced::Reachable;  // Psi = 0 on the axes
  if (z >= d.h) return Traced::Reachable;
  swirl::TraceOptions opt;
  opt.step = step;
  opt.max_steps = 2000000;
  bool closed = false;
  bool outer = false;
  for (int dir : {+1, -1}) {
    const swirl::CharCurve c = swirl::trace_rk(m, d, {r, z}, dir, opt);
    switch (c.termination) {
      case swirl::Termination::HitMoh: return Traced::Reachable;
      case swirl::Termination::Closed: closed = true; break;
      case swirl::Termination::HitOuterBoundary: outer = true; break;
      default: break;
    }
    if (closed) break;
  }
  if (closed) return Traced::Closed;
  return outer ? Traced::OuterBoundary : Traced::Other;
}

// Profile parameters with an interior circulation maximum (n_r > 2 and
// r_o inside R = 4).
inline swirl::ModelParams random_params(swirl::Rng& rng) {
  swirl::ModelParams p;
  p.v_c = rng.uniform(0.5, 2.0);
  p.n_r = rng.uniform(2.5, 8.0);
  p.r_c = rng.uniform(0.5, 1.5);
  p.n_z = rng.uniform(1.5, 8.0);
  p.z_c = rng.uniform(1.0, 3.0);
  return p;
}

}  // namespace oracle
