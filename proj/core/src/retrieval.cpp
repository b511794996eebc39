#include "swirl/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>

#include "swirl/parallel.hpp"

namespace swirl {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double viscous_source(const VortexModel& model, double nu, double r, double z) {
  if (nu == 0.0) return 0.0;
  return nu * (model.dzeta_dr(r, z) - model.deta_dz(r, z));
}

}  // namespace

double MohBoundary::psi_at(double radius) const {
  if (psi.empty()) return kNaN;
  if (radius <= 0.0) return psi.front();
  const double x = radius / spacing;
  const auto last = psi.size() - 1;
  if (x >= static_cast<double>(last)) return psi.back();
  const auto k = static_cast<std::size_t>(x);
  const double f = x - static_cast<double>(k);
  return (1.0 - f) * psi[k] + f * psi[k + 1];
}

MohBoundary build_moh_boundary(const VortexModel& model, const Domain& domain,
                               const RadialProfile& u_obs, int quadrature_n) {
  domain.validate();
  if (quadrature_n < 2) throw std::invalid_argument("build_moh_boundary: quadrature_n must be >= 2");
  const double h = domain.h;
  const double R = domain.R;
  const double nu = domain.nu;
  const double scale = model.vorticity_scale();

  {
    double eta_max = 0.0;
    for (int k = 1; k <= 64; ++k) eta_max = std::max(eta_max, std::abs(model.eta(R * k / 64.0, h)));
    if (eta_max <= 1e-12 * scale) {
      throw std::invalid_argument(
          "MOH line coincides with vertical profile maximum; eta vanishes identically");
    }
  }
  const double u0 = u_obs(0.0);
  if (u0 != 0.0) {
    throw std::invalid_argument("build_moh_boundary: observed u must vanish on the axis");
  }

  MohBoundary b;
  b.h = h;
  b.spacing = R / quadrature_n;
  const int n = quadrature_n;
  b.r.resize(n + 1);
  b.u.resize(n + 1);
  b.w.resize(n + 1);
  b.psi.resize(n + 1);

  auto w_at = [&](double r, double u) {
    return (model.zeta(r, h) * u - viscous_source(model, nu, r, h)) / model.eta(r, h);
  };

  for (int k = 0; k <= n; ++k) {
    const double r = k == n ? R : b.spacing * k;
    b.r[k] = r;
    b.u[k] = k == 0 ? 0.0 : u_obs(r);
    if (k > 0) b.w[k] = w_at(r, b.u[k]);
  }
  // Axis: u, eta and the viscous term vanish linearly (or faster), so
  // w(0,h) = zeta(0,h) * u'(0) / eta_r(0,h). u is odd in r, so u(r)/r has
  // an even expansion and one Richardson step gives u'(0) to fourth order.
  // eta_r(0,h) from eta(eps,h)/eps.
  {
    const double du0 = (8.0 * b.u[1] - b.u[2]) / (6.0 * b.spacing);
    const double eps = 1e-7 * b.spacing;
    const double deta0 = model.eta(eps, h) / eps;
    b.w[0] = model.zeta(0.0, h) * du0 / deta0;
  }
  // Composite midpoint rule for Psi(r,h) = -int_0^r s w(s,h) ds.
  b.psi[0] = 0.0;
  for (int k = 0; k < n; ++k) {
    const double m = 0.5 * (b.r[k] + b.r[k + 1]);
    const double dr = b.r[k + 1] - b.r[k];
    b.psi[k + 1] = b.psi[k] - dr * m * w_at(m, u_obs(m));
  }
  return b;
}

RetrievedField::RetrievedField(const Grid& g)
    : grid(g),
      psi(g.size(), kNaN),
      u(g.size(), kNaN),
      v(g.size(), kNaN),
      w(g.size(), kNaN),
      flag(g.size(), CellFlag::Reachable),
      branch(g.size(), Branch::None),
      low_order(g.size(), 0) {}

bool RetrievedField::has_psi(int i, int j) const {
  return std::isfinite(psi[grid.index(i, j)]);
}

std::size_t RetrievedField::count(CellFlag f) const {
  return static_cast<std::size_t>(std::count(flag.begin(), flag.end(), f));
}

RetrievedField retrieve(const VortexModel& model, const Domain& domain,
                        const MohBoundary& boundary, const VoidMap& void_map,
                        const RetrieveOptions& options) {
  const Grid& grid = void_map.grid;
  RetrievedField field(grid);
  field.flag = void_map.flags;

  const double h = domain.h;
  const bool viscous = domain.nu != 0.0;
  const bool trace = viscous || options.propagation == Propagation::Trace;
  const MohLine line(model, domain, options.bisect_tol);

  TraceOptions topts;
  topts.step = options.rk_step;
  topts.max_steps = options.max_steps;
  topts.level_tol = options.level_tol;
  topts.stop_at_moh = true;
  topts.integrate_psi = viscous;

  auto propagate = [&](double r, double z, std::size_t idx) {
    const double level = model.circulation(r, z);
    const bool outer = line.outer_side({r, z}, level);
    if (!trace) {
      const auto hit = line.locate(level, outer);
      if (!hit) {
        field.flag[idx] = CellFlag::BoundaryLimited;
        return;
      }
      field.psi[idx] = boundary.psi_at(hit->r_hit);
      field.branch[idx] = hit->branch;
      return;
    }
    std::optional<CharCurve> chosen;
    bool hit_outer_boundary = false;
    try {
      for (int dir : {+1, -1}) {
        CharCurve c = trace_rk(model, domain, {r, z}, dir, topts);
        if (c.termination == Termination::HitOuterBoundary) hit_outer_boundary = true;
        if (c.termination != Termination::HitMoh) continue;
        const bool same_side = (c.r_hit > line.peak_radius()) == outer;
        if (!chosen || same_side) chosen = std::move(c);
        if (same_side) break;
      }
    } catch (const std::invalid_argument&) {
      // start at the stagnation point; nothing reaches it
    }
    if (!chosen) {
      field.flag[idx] = hit_outer_boundary ? CellFlag::BoundaryLimited : CellFlag::Void;
      return;
    }
    field.psi[idx] = boundary.psi_at(chosen->r_hit) - chosen->psi_change;
    field.branch[idx] =
        chosen->r_hit > line.peak_radius() ? Branch::Outer : Branch::Inner;
  };

  parallel_for(static_cast<std::size_t>(grid.nz), [&](std::size_t row) {
    const int j = static_cast<int>(row);
    const double z = grid.z(j);
    for (int i = 0; i < grid.nr; ++i) {
      const double r = grid.r(i);
      const std::size_t idx = grid.index(i, j);
      switch (field.flag[idx]) {
        case CellFlag::Observable:
          if (z == h) field.psi[idx] = r == 0.0 ? 0.0 : boundary.psi_at(r);
          break;
        case CellFlag::Reachable:
          if (r == 0.0 || z == 0.0) {
            field.psi[idx] = 0.0;
          } else {
            propagate(r, z, idx);
          }
          break;
        case CellFlag::Void:
        case CellFlag::BoundaryLimited:
          break;
      }
    }
  });

  if (options.observed_u) {
    int j0 = 0;
    while (j0 < grid.nz && grid.z(j0) < h) ++j0;
    parallel_for(static_cast<std::size_t>(grid.nr), [&](std::size_t col) {
      const int i = static_cast<int>(col);
      const double r = grid.r(i);
      double psi = r == 0.0 ? 0.0 : boundary.psi_at(r);
      double z_prev = h;
      for (int j = j0; j < grid.nz; ++j) {
        const double z = grid.z(j);
        if (r > 0.0 && z > z_prev) {
          psi += r * boost::math::quadrature::gauss<double, 7>::integrate(
                         [&](double zz) { return options.observed_u(r, zz); }, z_prev, z);
        }
        z_prev = z;
        field.psi[grid.index(i, j)] = psi;
      }
    });
  }

  for (int j = 0; j < grid.nz; ++j) {
    for (int i = 0; i < grid.nr; ++i) {
      const std::size_t idx = grid.index(i, j);
      if (i == 0 || j == 0) {
        if (std::isfinite(field.psi[idx])) field.psi[idx] = 0.0;
      }
      if (std::isfinite(field.psi[idx])) field.v[idx] = model.speed(grid.r(i), grid.z(j));
    }
  }
  return field;
}

namespace {

bool branches_agree(Branch a, Branch b) {
  return a == Branch::None || b == Branch::None || a == b;
}

// Second-order derivative of values[] along (di, dj) at node (i, j), using
// only nodes with finite values whose branches agree with the stencil.
struct Derivative {
  double value = kNaN;
  bool low_order = false;
};

Derivative directional(const Grid& g, const std::vector<double>& values,
                       const std::vector<Branch>& branch, int i, int j, int di, int dj,
                       double delta) {
  const std::size_t c = g.index(i, j);
  auto usable = [&](int k) -> std::optional<std::size_t> {
    const int ii = i + k * di;
    const int jj = j + k * dj;
    if (ii < 0 || jj < 0 || ii >= g.nr || jj >= g.nz) return std::nullopt;
    const std::size_t n = g.index(ii, jj);
    if (!std::isfinite(values[n]) || !branches_agree(branch[c], branch[n])) return std::nullopt;
    return n;
  };
  auto agree = [&](std::size_t a, std::size_t b) { return branches_agree(branch[a], branch[b]); };

  const auto p1 = usable(1);
  const auto m1 = usable(-1);
  if (p1 && m1 && agree(*p1, *m1)) return {(values[*p1] - values[*m1]) / (2.0 * delta), false};
  if (p1) {
    const auto p2 = usable(2);
    if (p2 && agree(*p1, *p2)) {
      return {(-3.0 * values[c] + 4.0 * values[*p1] - values[*p2]) / (2.0 * delta), false};
    }
  }
  if (m1) {
    const auto m2 = usable(-2);
    if (m2 && agree(*m1, *m2)) {
      return {(3.0 * values[c] - 4.0 * values[*m1] + values[*m2]) / (2.0 * delta), false};
    }
  }
  if (p1) return {(values[*p1] - values[c]) / delta, true};
  if (m1) return {(values[c] - values[*m1]) / delta, true};
  return {kNaN, true};
}

}  // namespace

RetrievedField differentiate(const RetrievedField& field) {
  RetrievedField out = field;
  const Grid& g = field.grid;
  std::fill(out.u.begin(), out.u.end(), kNaN);
  std::fill(out.w.begin(), out.w.end(), kNaN);
  std::fill(out.low_order.begin(), out.low_order.end(), 0);
  const double dr = g.dr();
  const double dz = g.dz();

  parallel_for(static_cast<std::size_t>(g.nz), [&](std::size_t row) {
    const int j = static_cast<int>(row);
    for (int i = 0; i < g.nr; ++i) {
      const std::size_t c = g.index(i, j);
      if (!std::isfinite(field.psi[c])) continue;
      const double r = g.r(i);
      if (i == 0) {
        // Psi ~ f(z) r^2 near the axis: u -> 0 and w -> -Psi_rr.
        out.u[c] = 0.0;
        const std::size_t n1 = g.index(1, j);
        const std::size_t n2 = g.index(2, j);
        const bool ok1 = std::isfinite(field.psi[n1]);
        const bool ok2 = ok1 && std::isfinite(field.psi[n2]) &&
                         branches_agree(field.branch[n1], field.branch[n2]);
        if (ok2) {
          out.w[c] = -(field.psi[c] - 2.0 * field.psi[n1] + field.psi[n2]) / (dr * dr);
        } else if (ok1) {
          out.w[c] = -2.0 * (field.psi[n1] - field.psi[c]) / (dr * dr);
          out.low_order[c] = 1;
        } else {
          out.low_order[c] = 1;
        }
        continue;
      }
      const Derivative pz = directional(g, field.psi, field.branch, i, j, 0, 1, dz);
      const Derivative pr = directional(g, field.psi, field.branch, i, j, 1, 0, dr);
      out.u[c] = pz.value / r;
      out.w[c] = -pr.value / r;
      out.low_order[c] = (pz.low_order || pr.low_order) ? 1 : 0;
    }
  });
  return out;
}

namespace {

void accumulate(Norms& n, double x) {
  n.l2 += x * x;
  n.max = std::max(n.max, std::abs(x));
  ++n.count;
}

void finish(Norms& n) {
  n.l2 = n.count ? std::sqrt(n.l2 / static_cast<double>(n.count)) : 0.0;
}

bool interior_node(const RetrievedField& f, int i, int j) {
  const Grid& g = f.grid;
  if (i < 2 || j < 2 || i > g.nr - 3 || j > g.nz - 3) return false;
  const Branch own = f.branch[g.index(i, j)];
  Branch seen = own;
  for (int k = -2; k <= 2; ++k) {
    for (const auto& [ii, jj] : {std::pair{i + k, j}, std::pair{i, j + k}}) {
      const std::size_t n = g.index(ii, jj);
      if (!std::isfinite(f.psi[n])) return false;
      const Branch b = f.branch[n];
      if (b == Branch::None) continue;
      if (seen == Branch::None) seen = b;
      if (b != seen) return false;
    }
  }
  return true;
}

}  // namespace

Residuals residuals(const VortexModel& model, const Domain& domain,
                    const RetrievedField& field) {
  const Grid& g = field.grid;
  Residuals res;
  res.continuity.assign(g.size(), kNaN);
  res.momentum.assign(g.size(), kNaN);
  const double dr = g.dr();
  const double dz = g.dz();

  for (int j = 1; j < g.nz; ++j) {
    for (int i = 1; i < g.nr; ++i) {
      const std::size_t c = g.index(i, j);
      if (field.flag[c] != CellFlag::Reachable) continue;
      if (!std::isfinite(field.u[c]) || !std::isfinite(field.w[c])) continue;
      const double r = g.r(i);
      const double z = g.z(j);
      res.momentum[c] = model.zeta(r, z) * field.u[c] - model.eta(r, z) * field.w[c] -
                        viscous_source(model, domain.nu, r, z);
      const Derivative ur = directional(g, field.u, field.branch, i, j, 1, 0, dr);
      const Derivative wz = directional(g, field.w, field.branch, i, j, 0, 1, dz);
      if (std::isfinite(ur.value) && std::isfinite(wz.value)) {
        res.continuity[c] = field.u[c] / r + ur.value + wz.value;
      }
      const bool interior = interior_node(field, i, j);
      accumulate(res.momentum_all, res.momentum[c]);
      if (interior) accumulate(res.momentum_interior, res.momentum[c]);
      if (std::isfinite(res.continuity[c])) {
        accumulate(res.continuity_all, res.continuity[c]);
        if (interior) accumulate(res.continuity_interior, res.continuity[c]);
      }
    }
  }
  finish(res.continuity_all);
  finish(res.momentum_all);
  finish(res.continuity_interior);
  finish(res.momentum_interior);
  return res;
}

bool is_interior(const RetrievedField& field, int i, int j) { return interior_node(field, i, j); }

}  // namespace swirl
