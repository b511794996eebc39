#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "swirl/characteristics.hpp"
#include "swirl/grid.hpp"
#include "swirl/model.hpp"

namespace swirl {

/// Radial-velocity data as a function of radius (MOH line) or of (r, z).
using RadialProfile = std::function<double(double r)>;
using RadialField = std::function<double(double r, double z)>;

/// Boundary data on z = h: observed u, w from the tangential momentum
/// balance, and Psi(r, h) = -int_0^r s w(s, h) ds.
struct MohBoundary {
  double h = 0.0;
  double spacing = 0.0;
  std::vector<double> r;
  std::vector<double> u;
  std::vector<double> w;
  std::vector<double> psi;

  /// Piecewise-linear Psi(r, h); clamps outside [0, R].
  double psi_at(double radius) const;
};

/// Builds the MOH boundary from u observed along z = h on quadrature_n
/// uniform panels of [0, R]. For r > 0,
///
///   w = (zeta u - nu (zeta_r - eta_z)) / eta,
///
/// and on the axis the limit w(0, h) = zeta(0, h) u'(0) / eta_r(0, h)
/// (= -2 psi(h) u'(0) / psi'(h) for a separable model), obtained by
/// L'Hopital since u, eta and the viscous term all vanish there.
///
/// Throws std::invalid_argument when u_obs(0) != 0, when eta vanishes along
/// the whole MOH line (h at the vertical maximum), or quadrature_n < 2.
MohBoundary build_moh_boundary(const VortexModel& model, const Domain& domain,
                               const RadialProfile& u_obs, int quadrature_n);

enum class Propagation { Bisection, Trace };

struct RetrieveOptions {
  Propagation propagation = Propagation::Bisection;
  double bisect_tol = 1e-12;
  double rk_step = 0.004;
  int max_steps = 400000;
  /// Relative circulation tolerance for traced characteristics.
  double level_tol = 1e-12;
  /// Observed u above the MOH line; when set, Observable nodes get
  /// Psi(r, z) = Psi(r, h) + r int_h^z u dz'. Otherwise they stay unset
  /// apart from nodes exactly on z = h.
  RadialField observed_u;
};

/// Gridded retrieval result. Unset values are NaN.
struct RetrievedField {
  Grid grid;
  std::vector<double> psi;
  std::vector<double> u;
  std::vector<double> v;
  std::vector<double> w;
  std::vector<CellFlag> flag;
  /// MOH branch that supplied Psi; None for boundary and observed nodes.
  std::vector<Branch> branch;
  std::vector<std::uint8_t> low_order;

  explicit RetrievedField(const Grid& g = Grid{});

  std::size_t index(int i, int j) const { return grid.index(i, j); }
  bool has_psi(int i, int j) const;
  std::size_t count(CellFlag f) const;
};

/// Propagates boundary Psi into the unobservable layer along
/// characteristics. With nu = 0 and bisection, Psi is constant along each
/// level curve of Gamma; with the Trace option (or nu > 0) each node is
/// traced to the MOH line and dPsi/dt is integrated along the way. Void
/// nodes stay unset; nodes whose characteristic leaves through r = R are
/// flagged BoundaryLimited.
RetrievedField retrieve(const VortexModel& model, const Domain& domain,
                        const MohBoundary& boundary, const VoidMap& void_map,
                        const RetrieveOptions& options = {});

/// Fills u = (1/r) dPsi/dz and w = -(1/r) dPsi/dr with second-order
/// differences. Stencils never use unset nodes or nodes fed by a different
/// MOH branch. On the axis u = 0 and w = -Psi_rr from a parabola through the
/// first three radial nodes.
RetrievedField differentiate(const RetrievedField& field);

struct Norms {
  double l2 = 0.0;   // root mean square
  double max = 0.0;  // max absolute value
  std::size_t count = 0;
};

struct Residuals {
  /// u/r + du/dr + dw/dz, NaN where not evaluated.
  std::vector<double> continuity;
  /// zeta u - eta w - nu (zeta_r - eta_z), NaN where not evaluated.
  std::vector<double> momentum;
  /// Over all reachable off-axis nodes with the residual defined.
  Norms continuity_all;
  Norms momentum_all;
  /// Restricted to reachable nodes at least two cells from any region edge.
  Norms continuity_interior;
  Norms momentum_interior;
};

Residuals residuals(const VortexModel& model, const Domain& domain,
                    const RetrievedField& field);

/// True when the node and its +-1, +-2 neighbours along r and z all carry Psi
/// from a single MOH branch.
bool is_interior(const RetrievedField& field, int i, int j);

}  // namespace swirl
