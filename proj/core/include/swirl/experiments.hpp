#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "swirl/characteristics.hpp"
#include "swirl/fit.hpp"
#include "swirl/grid.hpp"
#include "swirl/model.hpp"
#include "swirl/retrieval.hpp"

namespace swirl {

/// Shape of the synthetic truth streamfunction
///
///   Psi = F(Gamma),  F(G) = -kappa G_s (1 - exp(-G / G_s)),
///
/// which satisfies the inviscid tangential momentum balance exactly
/// everywhere, vanishes on both axes, and gives u = kappa e^(-G/G_s) eta
/// (inflow below the wind maximum) and w = kappa e^(-G/G_s) zeta (updraft
/// inside the radius of maximum circulation).
struct TruthProfile {
  /// Peak surface inflow speed |u|, which sets kappa.
  double inflow_speed = 0.25;
  /// G_s as a fraction of the peak circulation.
  double circulation_fraction = 0.5;

  bool operator==(const TruthProfile&) const = default;
};

class TwinTruth {
 public:
  TwinTruth(const SeparableVortex& model, const Domain& domain, const TruthProfile& profile);

  const SeparableVortex& model() const { return model_; }
  const Domain& domain() const { return domain_; }
  const TruthProfile& profile() const { return profile_; }
  double kappa() const { return kappa_; }
  double circulation_scale() const { return gamma_scale_; }

  double psi(double r, double z) const;
  double u(double r, double z) const;
  double v(double r, double z) const { return model_.speed(r, z); }
  double w(double r, double z) const;

  /// u along the line z = h, as observed on the MOH line.
  RadialProfile u_at(double h) const;
  RadialField u_field() const;

  /// Truth values at every node; flags and the set of filled nodes follow
  /// `mask` when given, otherwise every node is filled and Observable.
  RetrievedField field(const Grid& grid, const VoidMap* mask = nullptr) const;

 private:
  double slope(double gamma) const;

  SeparableVortex model_;
  Domain domain_;
  TruthProfile profile_;
  double kappa_ = 0.0;
  double gamma_scale_ = 1.0;
};

/// Validates the model (throws std::invalid_argument on a structural
/// failure or a negative inflow speed) and builds the truth.
TwinTruth generate_truth(const SeparableVortex& model, const Domain& domain,
                         const TruthProfile& profile);

/// v observations at every grid node with z >= h, perturbed by independent
/// N(0, sigma^2) noise drawn in node order from `seed`. A zero sigma records
/// a unit weight.
std::vector<VelocityObservation> make_pseudo_obs(const TwinTruth& truth, const Grid& grid,
                                                 double h, double sigma, std::uint64_t seed);

/// Peak surface-layer quantities over retrieved nodes with z <= h_s.
struct SurfaceScalars {
  double u_plus = 0.0;  // max |u|
  double w_plus = 0.0;  // max w
  double v_max = 0.0;   // max sqrt(u^2 + v^2 + w^2)
  std::size_t nodes = 0;
};

SurfaceScalars surface_scalars(const RetrievedField& field, double h_s);

struct TwinSettings {
  double h = 2.5;
  double sigma = 0.0;
  std::uint64_t seed = 1;
  double h_s = 2.0;
  Grid grid{};
  /// Observation grid over the whole domain; nodes below h are dropped.
  Grid obs_grid{41, 61, 4.0, 6.0};
  int quadrature_n = 20000;
  RetrieveOptions retrieve{};
  FitOptions fit{};
  std::optional<ParameterBounds> bounds;
  /// Fit starting point; defaults to the truth parameters perturbed by 20%.
  std::optional<ModelParams> initial;
  /// Residuals and error metrics against the truth.
  bool diagnostics = true;
};

struct TwinOutcome {
  Domain domain;
  FitResult fit;
  VoidMap void_map;
  MohBoundary boundary;
  RetrievedField field;
  Residuals residuals;
  SurfaceScalars scalars;
  /// max |Psi - Psi_true| / max |Psi_true| over reachable nodes below h.
  double psi_rel_error = 0.0;
  /// max |u - u_true| / max |u_true| (and likewise w) over interior
  /// reachable nodes.
  double u_rel_error = 0.0;
  double w_rel_error = 0.0;
  /// Nodes with z <= h_s carrying retrieved values.
  std::size_t surface_nodes = 0;
};

/// Pseudo-observations -> fit -> classify -> MOH boundary from the truth u
/// at z = h -> retrieve -> differentiate -> scalars.
TwinOutcome run_twin(const TwinTruth& truth, const TwinSettings& settings);

struct EnsembleMember {
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  ModelParams params{};
  double rms_misfit = 0.0;
  SurfaceScalars scalars{};
};

struct ScalarSpread {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double std = 0.0;
  bool covered = false;

  double range() const { return max - min; }
};

struct EnsembleResult {
  double sigma = 0.0;
  double h = 0.0;
  double h_s = 0.0;
  std::vector<EnsembleMember> members;
  SurfaceScalars truth{};
  ScalarSpread u_plus{};
  ScalarSpread w_plus{};
  ScalarSpread v_max{};
  std::size_t successes = 0;
};

/// Truth scalars over the surface-layer nodes the truth model can reach.
SurfaceScalars truth_scalars(const TwinTruth& truth, const TwinSettings& settings);

using MemberCallback = std::function<void(const EnsembleMember&, const TwinOutcome&)>;

/// Runs `members` twins with seeds base_seed, base_seed + 1, ... Failing
/// members are recorded and skipped; fewer than two successes throws
/// std::runtime_error. on_member may be called concurrently.
EnsembleResult run_ensemble(const TwinTruth& truth, const TwinSettings& settings, int members,
                            std::uint64_t base_seed, const MemberCallback& on_member = {});

}  // namespace swirl
