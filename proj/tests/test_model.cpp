#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "swirl/model.hpp"

using namespace swirl;

TEST(PeakProfile, PeaksAtOne) {
  for (double n : {1.5, 2.0, 4.0, 9.0}) {
    PeakProfile p(n, 1.7);
    EXPECT_NEAR(p.value(1.7), 1.0, 1e-15);
    EXPECT_NEAR(p.slope(1.7), 0.0, 1e-14);
    EXPECT_LT(p.curvature(1.7), 0.0);
  }
}

TEST(PeakProfile, HandValues) {
  PeakProfile p(2.0, 1.0);
  EXPECT_EQ(p.value(0.0), 0.0);
  EXPECT_NEAR(p.value(2.0), 0.8, 1e-15);
  // 2x/(1+x^2) has slope 2(1-x^2)/(1+x^2)^2
  EXPECT_NEAR(p.slope(2.0), 2.0 * (1 - 4) / 25.0, 1e-15);
  EXPECT_NEAR(p.value_over_x(0.0), p.slope(0.0), 1e-15);
}

TEST(PeakProfile, DerivativesMatchFiniteDifferences) {
  PeakProfile p(3.3, 0.8);
  for (double x : {1e-4, 0.1, 0.5, 0.8, 1.3, 3.0}) {
    auto f = [&](double s) { return p.value(s); };
    auto g = [&](double s) { return p.slope(s); };
    auto q = [&](double s) { return p.value_over_x(s); };
    const double h = oracle::safe_step(x, 1.0);
    EXPECT_NEAR(p.slope(x), oracle::diff5(f, x, h), 1e-9);
    EXPECT_NEAR(p.curvature(x), oracle::diff5(g, x, h), 1e-8);
    EXPECT_NEAR(p.value_over_x_slope(x), oracle::diff5(q, x, h), 1e-8);
  }
}

TEST(PeakProfile, RejectsBadShape) {
  EXPECT_THROW(PeakProfile(1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(PeakProfile(0.5, 1.0), std::invalid_argument);
  EXPECT_THROW(PeakProfile(3.0, 0.0), std::invalid_argument);
  EXPECT_THROW(SeparableVortex(ModelParams{1.0, 1.0, 1.0, 4.0, 2.0}), std::invalid_argument);
  EXPECT_THROW(SeparableVortex(ModelParams{0.0, 4.0, 1.0, 4.0, 2.0}), std::invalid_argument);
}

TEST(SeparableVortex, SpeedExamples) {
  SeparableVortex m(ModelParams{1.7, 2.0, 1.0, 4.0, 2.0});
  EXPECT_NEAR(m.speed(1.0, 2.0), 1.7, 1e-15);
  EXPECT_NEAR(m.speed(2.0, 2.0), 0.8 * 1.7, 1e-15);
  EXPECT_EQ(m.speed(0.0, 1.0), 0.0);
  EXPECT_EQ(m.speed(1.0, 0.0), 0.0);
}

TEST(SeparableVortex, Circulation) {
  SeparableVortex m(ModelParams{});
  EXPECT_EQ(m.circulation(0.0, 1.3), 0.0);
  EXPECT_NEAR(m.circulation(1.0, 2.0), 1.0, 1e-15);
  const double r_o = *m.circulation_peak_radius();
  EXPECT_NEAR(r_o, std::pow(3.0, 0.25), 1e-14);
  EXPECT_GT(r_o, 1.0);
  // Independent check: Gamma is maximal in r at r_o.
  for (double dr : {-1e-3, 1e-3}) EXPECT_LT(m.circulation(r_o + dr, 2.0), m.circulation(r_o, 2.0));
  EXPECT_FALSE(SeparableVortex(ModelParams{1, 2.0, 1, 4, 2}).circulation_peak_radius());
}

TEST(SeparableVortex, VorticityZeros) {
  SeparableVortex m(ModelParams{1.3, 5.0, 0.7, 3.0, 1.5});
  const double r_o = std::pow(2.0 * 4.0 / 3.0, 1.0 / 5.0) * 0.7;
  for (double z : {0.2, 1.5, 4.0}) {
    EXPECT_NEAR(m.zeta(r_o, z), 0.0, 1e-13);
    EXPECT_NEAR(m.eta(0.4 + z, 1.5), 0.0, 1e-14);
  }
}

TEST(SeparableVortex, AxisVorticityLimit) {
  const ModelParams p{1.3, 5.0, 0.7, 3.0, 1.5};
  SeparableVortex m(p);
  for (double z : {0.3, 1.5, 3.0}) {
    const double expect = 2 * p.v_c * m.vertical().value(z) * p.n_r / ((p.n_r - 1) * p.r_c);
    EXPECT_NEAR(m.zeta(0.0, z), expect, 1e-13 * expect);
    EXPECT_NEAR(oracle::zeta_fd(m, 1e-6, z), expect, 1e-8 * expect);
  }
}

TEST(SeparableVortex, SecondDerivativesMatchFiniteDifferences) {
  SeparableVortex m(ModelParams{1.3, 5.0, 0.7, 3.0, 1.5});
  Rng rng(7);
  for (int k = 0; k < 200; ++k) {
    const double r = rng.uniform(0.05, 4.0);
    const double z = rng.uniform(0.05, 6.0);
    const double scale = m.vorticity_scale();
    EXPECT_NEAR(m.dzeta_dr(r, z), oracle::dzeta_dr_fd(m, r, z), 1e-6 * scale) << r << "," << z;
    EXPECT_NEAR(m.deta_dz(r, z), oracle::deta_dz_fd(m, r, z), 1e-6 * scale) << r << "," << z;
  }
}

TEST(Domain, Validation) {
  Domain d;
  EXPECT_NO_THROW(d.validate());
  for (auto bad : {Domain{0, 6, 2.5, 2, 0}, Domain{4, 6, 6, 2, 0}, Domain{4, 6, 0, 2, 0},
                   Domain{4, 6, 2.5, 2, -1}, Domain{4, 6, 2.5, 0, 0}}) {
    EXPECT_THROW(bad.validate(), std::invalid_argument);
  }
}

TEST(Structure, StandardModelPasses) {
  const auto rep = check_structure(SeparableVortex(ModelParams{}), Domain{});
  EXPECT_TRUE(rep.ok()) << rep.smooth.detail << rep.single_zeta_zero.detail;
  ASSERT_TRUE(rep.r_o && rep.z_o);
  EXPECT_NEAR(*rep.r_o, std::pow(3.0, 0.25), 1e-8);
  EXPECT_NEAR(*rep.z_o, 2.0, 1e-8);
}

namespace {

// Two separable products with well separated maxima.
class TwoPeaks final : public VortexModel {
 public:
  double speed(double r, double z) const override { return a_.speed(r, z) + b_.speed(r, z); }
  double zeta(double r, double z) const override { return a_.zeta(r, z) + b_.zeta(r, z); }
  double eta(double r, double z) const override { return a_.eta(r, z) + b_.eta(r, z); }
  double dzeta_dr(double r, double z) const override {
    return a_.dzeta_dr(r, z) + b_.dzeta_dr(r, z);
  }
  double deta_dz(double r, double z) const override { return a_.deta_dz(r, z) + b_.deta_dz(r, z); }

 private:
  SeparableVortex a_{ModelParams{1.0, 8.0, 0.5, 8.0, 0.8}};
  SeparableVortex b_{ModelParams{1.0, 8.0, 2.5, 8.0, 4.0}};
};

}  // namespace

TEST(Structure, TwoMaximaDetected) {
  const auto rep = check_structure(TwoPeaks{}, Domain{});
  EXPECT_FALSE(rep.ok());
  EXPECT_TRUE(!rep.single_zeta_zero.passed || !rep.single_vertical_max.passed);
  EXPECT_TRUE(rep.no_slip.passed);
  EXPECT_TRUE(rep.positive_interior.passed);
}
