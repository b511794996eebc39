#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "swirl/grid.hpp"
#include "swirl/model.hpp"

namespace swirl {

struct Point {
  double r = 0.0;
  double z = 0.0;
};

/// One accepted step of a traced characteristic; t is signed arc length.
struct CurveSample {
  double t = 0.0;
  double r = 0.0;
  double z = 0.0;
};

enum class Termination { HitMoh, HitOuterBoundary, Closed, MaxSteps, LeftDomain };

const char* to_string(Termination t);

/// A characteristic of zeta dPsi/dz + eta dPsi/dr = nu r (zeta_r - eta_z),
/// i.e. a trajectory of (dr/dt, dz/dt) = (eta, zeta). For nu = 0 it is a
/// level curve of the circulation.
struct CharCurve {
  std::vector<CurveSample> samples;
  double gamma_level = 0.0;
  Termination termination = Termination::MaxSteps;
  /// Termination at the first sample, set only for curves traced both ways.
  std::optional<Termination> start_termination;
  double r_hit = std::numeric_limits<double>::quiet_NaN();  // HitMoh
  double z_hit = std::numeric_limits<double>::quiet_NaN();  // HitOuterBoundary
  bool stagnated = false;
  /// Psi(end) - Psi(start) accumulated along the curve (zero when nu = 0).
  double psi_change = 0.0;
};

struct TraceOptions {
  double step = 0.004;
  int max_steps = 400000;
  bool stop_at_moh = true;
  bool integrate_psi = false;
  /// After every step the point is pulled back onto the starting level
  /// along grad Gamma until |Gamma - level| <= level_tol * |level|.
  double level_tol = 1e-12;
};

/// Fixed-step RK4 in arc length along (eta, zeta) / |(eta, zeta)|, started at
/// `start` and run forward (direction = +1) or backward (-1) in t.
///
/// Stops on crossing z = h (when options.stop_at_moh), on reaching r = R, on
/// returning within 2 steps of the start after at least 10 steps while
/// heading the same way (Closed), or after max_steps. Throws
/// std::invalid_argument when start is on an axis, outside the domain, or
/// within 1e-6 (relative) of a stagnation point.
CharCurve trace_rk(const VortexModel& model, const Domain& domain, Point start, int direction,
                   const TraceOptions& options);

/// Traces forward; unless the curve closes, also traces backward and joins
/// the two halves so that samples run from the backward end to the forward
/// end. start_termination then holds the backward termination.
CharCurve trace_full(const VortexModel& model, const Domain& domain, Point start,
                     const TraceOptions& options);

enum class Branch : std::uint8_t { None = 0, Inner = 1, Outer = 2 };

struct MohHit {
  double r_hit = 0.0;
  Branch branch = Branch::None;
};

/// Circulation along the MOH line z = h, which is unimodal on [0, R] with its
/// peak at the zero of zeta. Built once and queried per node.
class MohLine {
 public:
  MohLine(const VortexModel& model, const Domain& domain, double tol);

  double peak_radius() const { return peak_r_; }
  double peak_level() const { return peak_level_; }
  double outer_level() const { return outer_level_; }

  /// Radius on the MOH line carrying circulation `level`. The inner branch
  /// [0, r_peak] is searched unless prefer_outer, in which case [r_peak, R]
  /// is tried first and the inner branch is the fallback. Empty when
  /// level exceeds the peak.
  std::optional<MohHit> locate(double level, bool prefer_outer) const;

  /// Whether the characteristic through `p` (circulation `level`) meets the
  /// outer branch. Below the vertical peak a curve outside r_peak reaches
  /// the outer branch only when it turns back before r = R; otherwise it
  /// passes under the maximum to the inner branch.
  bool outer_side(Point p, double level) const;

 private:
  const VortexModel* model_;
  double h_;
  double R_;
  double tol_;
  double peak_r_ = 0.0;
  double peak_level_ = 0.0;
  double outer_level_ = 0.0;
  double z_peak_ = 0.0;
  double wall_level_ = 0.0;
};

/// Solves Gamma(r_hit, h) = Gamma(point) by bisection on the branch of the
/// MOH circulation that the point's characteristic reaches. Returns
/// nothing when the point lies in the information void. Requires nu = 0 and
/// tol > 0 (std::invalid_argument otherwise).
std::optional<MohHit> moh_intersection_bisect(const VortexModel& model, const Domain& domain,
                                              Point point, double tol);

/// Zero of zeta(., z) on (0, R], or R when zeta stays positive.
double radial_circulation_peak(const VortexModel& model, const Domain& domain, double z);

/// Zero of eta(r, .) on (0, H) for r at the radial circulation peak, or H
/// when v increases with height throughout.
double vertical_peak_height(const VortexModel& model, const Domain& domain);

enum class CellFlag : std::uint8_t { Observable = 0, Reachable = 1, Void = 2, BoundaryLimited = 3 };

struct VoidMap {
  Grid grid;
  std::vector<CellFlag> flags;
  double h_o = 0.0;
  /// Circulation Gamma(r_o, h); nodes below h with larger circulation are void.
  double gamma_threshold = 0.0;
  /// Traced C(r_o, h), empty when the void is empty.
  std::vector<Point> void_boundary;

  CellFlag at(int i, int j) const { return flags[grid.index(i, j)]; }
  std::size_t count(CellFlag f) const;
};

/// Flags every grid node: Observable at z >= h, Void where the circulation
/// exceeds the MOH-line maximum, Reachable otherwise (axes included).
VoidMap classify(const VortexModel& model, const Domain& domain, const Grid& grid,
                 double rk_step = 0.0);

/// Largest height below which every point is reachable: h itself when h is
/// at or below the vertical maximum, otherwise the smallest root of
/// psi(z) = psi(h).
double min_unreachable_height(const VortexModel& model, const Domain& domain, double tol);

/// Number of transversal crossings of z = h along the curve.
int detect_multiple_moh_intersections(const VortexModel& model, const Domain& domain,
                                      const CharCurve& curve);

}  // namespace swirl
