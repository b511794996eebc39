#include <gtest/gtest.h>

#include <cmath>
#include <mutex>

#include "oracles.hpp"
#include "swirl/experiments.hpp"

using namespace swirl;

namespace {

const SeparableVortex kModel{ModelParams{}};

TwinTruth default_truth() { return generate_truth(kModel, Domain{}, TruthProfile{}); }

}  // namespace

TEST(Truth, ZeroInflowIsStill) {
  const TwinTruth t = generate_truth(kModel, Domain{}, TruthProfile{0.0, 0.5});
  for (double r : {0.0, 0.5, 2.0}) {
    for (double z : {0.0, 1.0, 4.0}) {
      EXPECT_EQ(t.u(r, z), 0.0);
      EXPECT_EQ(t.w(r, z), 0.0);
      EXPECT_EQ(t.psi(r, z), 0.0);
    }
  }
}

TEST(Truth, InflowBelowUpdraftOnAxis) {
  const TwinTruth t = default_truth();
  double u_min = 0.0;
  for (int i = 1; i < 100; ++i) u_min = std::min(u_min, t.u(4.0 * i / 100, 0.2));
  EXPECT_LT(u_min, 0.0);
  EXPECT_GT(t.w(0.0, 1.0), 0.0);
  EXPECT_GT(t.w(0.1, 0.5), 0.0);
}

TEST(Truth, PeakSurfaceInflowMatchesProfile) {
  const TwinTruth t = generate_truth(kModel, Domain{}, TruthProfile{0.7, 0.5});
  // Near the ground u ~ -kappa eta, whose peak magnitude is the profile value.
  double peak = 0.0;
  for (int i = 1; i < 4000; ++i) peak = std::max(peak, std::abs(t.u(4.0 * i / 4000, 1e-9)));
  EXPECT_NEAR(peak, 0.7, 1e-6);
}

TEST(Truth, SatisfiesTheDynamics) {
  const TwinTruth t = default_truth();
  Rng rng(3);
  for (int k = 0; k < 200; ++k) {
    const double r = rng.uniform(0.01, 4.0);
    const double z = rng.uniform(0.01, 6.0);
    // Tangential momentum.
    EXPECT_NEAR(kModel.zeta(r, z) * t.u(r, z) - kModel.eta(r, z) * t.w(r, z), 0.0, 1e-15);
    // u, w from the streamfunction by independent differences.
    auto pz = [&](double s) { return t.psi(r, s); };
    auto pr = [&](double s) { return t.psi(s, z); };
    EXPECT_NEAR(t.u(r, z), oracle::diff5(pz, z, oracle::safe_step(z, 1.0)) / r, 1e-8);
    EXPECT_NEAR(t.w(r, z), -oracle::diff5(pr, r, oracle::safe_step(r, 1.0)) / r, 1e-7);
  }
}

TEST(Truth, RejectsModelsWithoutInteriorMaximum) {
  EXPECT_THROW(generate_truth(SeparableVortex(ModelParams{1, 2.0, 1, 4, 2}), Domain{}, {}),
               std::invalid_argument);
  EXPECT_THROW(generate_truth(kModel, Domain{}, TruthProfile{-1.0, 0.5}), std::invalid_argument);
}

TEST(PseudoObs, ExactWithoutNoise) {
  const TwinTruth t = default_truth();
  const Grid g{41, 61, 4.0, 6.0};
  const auto obs = make_pseudo_obs(t, g, 2.5, 0.0, 1);
  EXPECT_EQ(obs.size(), 41u * 36u);
  for (const auto& o : obs) {
    EXPECT_GE(o.z, 2.5);
    EXPECT_EQ(o.v_obs, kModel.speed(o.r, o.z));
    EXPECT_EQ(o.sigma, 1.0);
  }
}

TEST(PseudoObs, NoiseStatistics) {
  const TwinTruth t = default_truth();
  const auto obs = make_pseudo_obs(t, Grid{}, 0.5, 1.0, 42);
  ASSERT_GE(obs.size(), 10000u);
  double s = 0, ss = 0;
  for (const auto& o : obs) {
    const double e = o.v_obs - kModel.speed(o.r, o.z);
    s += e;
    ss += e * e;
    EXPECT_EQ(o.sigma, 1.0);
  }
  const double n = static_cast<double>(obs.size());
  const double sd = std::sqrt((ss - s * s / n) / (n - 1));
  EXPECT_GE(sd, 0.97);
  EXPECT_LE(sd, 1.03);
}

TEST(PseudoObs, DeterministicPerSeed) {
  const TwinTruth t = default_truth();
  const Grid g{41, 61, 4.0, 6.0};
  const auto a = make_pseudo_obs(t, g, 2.5, 0.3, 11);
  const auto b = make_pseudo_obs(t, g, 2.5, 0.3, 11);
  const auto c = make_pseudo_obs(t, g, 2.5, 0.3, 12);
  ASSERT_EQ(a.size(), b.size());
  bool differs = false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k].v_obs, b[k].v_obs);
    differs = differs || a[k].v_obs != c[k].v_obs;
  }
  EXPECT_TRUE(differs);
}

TEST(Twin, ZeroNoiseRecoversTruth) {
  const TwinTruth t = default_truth();
  TwinSettings s;
  s.h = 1.5;
  const TwinOutcome o = run_twin(t, s);
  const auto got = o.fit.model.params().to_array();
  const auto want = kModel.params().to_array();
  for (std::size_t k = 0; k < 5; ++k) EXPECT_NEAR(got[k], want[k], 1e-4 * want[k]);
  EXPECT_LT(o.psi_rel_error, 1e-3);
  EXPECT_LT(o.u_rel_error, 1e-2);
  EXPECT_LT(o.w_rel_error, 1e-2);
  EXPECT_EQ(o.void_map.count(CellFlag::Void), 0u);
}

TEST(Twin, SurfaceLayerShrinksWithMoh) {
  const TwinTruth t = default_truth();
  std::vector<TwinOutcome> runs;
  for (double h : {1.5, 2.5, 3.5}) {
    TwinSettings s;
    s.h = h;
    s.diagnostics = false;
    runs.push_back(run_twin(t, s));
  }
  for (const auto& r : runs) EXPECT_GT(r.surface_nodes, 0u);
  EXPECT_GT(runs[0].surface_nodes, runs[1].surface_nodes);
  EXPECT_GT(runs[1].surface_nodes, runs[2].surface_nodes);
  // Nested: whatever h = 3.5 retrieves near the surface, h = 1.5 does too.
  const Grid& g = runs[0].field.grid;
  for (int j = 0; j < g.nz && g.z(j) <= 2.0; ++j) {
    for (int i = 0; i < g.nr; ++i) {
      const std::size_t c = g.index(i, j);
      if (std::isfinite(runs[2].field.u[c])) {
        EXPECT_TRUE(std::isfinite(runs[0].field.u[c]));
        EXPECT_TRUE(std::isfinite(runs[1].field.u[c]));
      }
    }
  }
}

TEST(Twin, Deterministic) {
  const TwinTruth t = default_truth();
  TwinSettings s;
  s.sigma = 0.1;
  s.seed = 77;
  s.grid = Grid{51, 76, 4.0, 6.0};
  const TwinOutcome a = run_twin(t, s);
  const TwinOutcome b = run_twin(t, s);
  for (std::size_t c = 0; c < s.grid.size(); ++c) {
    EXPECT_EQ(std::isnan(a.field.psi[c]), std::isnan(b.field.psi[c]));
    if (!std::isnan(a.field.psi[c])) {
      EXPECT_EQ(a.field.psi[c], b.field.psi[c]);
      EXPECT_EQ(a.field.u[c], b.field.u[c]);
    }
  }
}

TEST(Ensemble, ZeroNoiseHasZeroSpread) {
  const TwinTruth t = default_truth();
  TwinSettings s;
  s.h = 1.5;
  const EnsembleResult e = run_ensemble(t, s, 3, 10);
  EXPECT_EQ(e.successes, 3u);
  for (const ScalarSpread* sp : {&e.u_plus, &e.w_plus, &e.v_max}) {
    EXPECT_NEAR(sp->range(), 0.0, 1e-6);
    EXPECT_NEAR(sp->std, 0.0, 1e-6);
  }
  EXPECT_NEAR(e.u_plus.mean, e.truth.u_plus, 1e-3 * e.truth.u_plus);
  EXPECT_NEAR(e.w_plus.mean, e.truth.w_plus, 1e-2 * e.truth.w_plus);
  EXPECT_NEAR(e.v_max.mean, e.truth.v_max, 1e-2 * e.truth.v_max);
}

TEST(Ensemble, Errors) {
  const TwinTruth t = default_truth();
  TwinSettings s;
  s.grid = Grid{21, 31, 4.0, 6.0};
  EXPECT_THROW(run_ensemble(t, s, 1, 1), std::invalid_argument);
  s.quadrature_n = 1;  // every member fails at the boundary stage
  EXPECT_THROW(run_ensemble(t, s, 3, 1), std::runtime_error);
}

TEST(Ensemble, RecordsMemberFailures) {
  const TwinTruth t = default_truth();
  TwinSettings s;
  s.grid = Grid{21, 31, 4.0, 6.0};
  s.h = 1.5;
  s.sigma = 0.1;
  int calls = 0;
  std::mutex mu;
  const EnsembleResult e = run_ensemble(t, s, 4, 100, [&](const EnsembleMember& m,
                                                         const TwinOutcome&) {
    std::lock_guard lock(mu);
    ++calls;
    if (m.seed == 101) throw std::runtime_error("writer failed");
  });
  EXPECT_EQ(calls, 4);
  EXPECT_EQ(e.successes, 3u);
  EXPECT_FALSE(e.members[1].ok);
  EXPECT_EQ(e.members[1].error, "writer failed");
}
