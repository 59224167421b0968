#include <gtest/gtest.h>

#include <cmath>

#include "macnet/simulation.hpp"
#include "test_support.hpp"

namespace macnet {
namespace {

TEST(BuildSigma, Examples) {
  EXPECT_EQ(build_sigma({0, 0, 0, 0}), Matrix::identity(4));
  const Matrix s = build_sigma({0.1, 0.2, 0.3, 0.1});
  EXPECT_EQ(s, testing::k2_sigma(0.1, 0.2, 0.3, 0.1));
  const auto want = testing::k2_sigma_eigen_formula(0.1, 0.2, 0.3, 0.1);
  const EigenResult e = sym_eigen(s);
  for (std::size_t l = 0; l < 4; ++l) EXPECT_NEAR(e.values[l], want[l], 1e-10);
  EXPECT_TRUE(is_positive_definite(s));
}

TEST(BuildSigma, BoundaryIsOutOfDomain) {
  const K2Params p{0.0, 0.0, 0.3, 0.1};
  try {
    build_sigma({0.0, p.a1(), 0.3, 0.1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::OutOfDomain);
  }
  EXPECT_THROW(build_sigma({0.9, 0.0, 0.3, 0.1}), Error);
}

TEST(SampleMvn, IdentityCorrelation) {
  const Matrix x = sample_mvn(Matrix::identity(4), 100000, 42);
  const Matrix c = corr_matrix(x);
  for (std::size_t a = 0; a < 4; ++a)
    for (std::size_t b = 0; b < 4; ++b) EXPECT_NEAR(c(a, b), a == b ? 1.0 : 0.0, 0.02);
}

TEST(SampleMvn, RecoversStructure) {
  const Matrix x = sample_mvn(build_sigma({0, 0, 0.3, 0.1}), 100000, 9);
  EXPECT_NEAR(pearson_corr(x.col(0), x.col(2)), 0.3, 0.01);
  EXPECT_NEAR(pearson_corr(x.col(1), x.col(3)), 0.1, 0.01);
}

TEST(SampleMvn, DeterministicForSeed) {
  const Matrix s = build_sigma({0.2, 0.1, 0.3, 0.1});
  EXPECT_EQ(sample_mvn(s, 500, 7), sample_mvn(s, 500, 7));
  EXPECT_NE(sample_mvn(s, 500, 7), sample_mvn(s, 500, 8));
  EXPECT_THROW(sample_mvn(Matrix{{1, 2}, {2, 1}}, 10, 1), Error);
}

TEST(Random, StandardNormalQuality) {
  Engine eng = substream(123, {1, 2});
  std::normal_distribution<double> nd;
  std::vector<double> xs(1000000);
  for (double& x : xs) x = nd(eng);
  EXPECT_GT(testing::ks_pvalue(xs, [](double x) { return normal_cdf(x); }), 0.01);
}

TEST(Random, SubstreamsDiffer) {
  EXPECT_NE(substream_seed(1, {0, 1}), substream_seed(1, {1, 0}));
  EXPECT_NE(substream_seed(1, {0}), substream_seed(2, {0}));
  EXPECT_EQ(substream_seed(5, {3, 4}), substream_seed(5, {3, 4}));
}

TEST(SliceGrid, StaysInsideDomain) {
  const auto g = slice_grid(SliceKind::RFromB, 0.2, 0.3, 0.1);
  EXPECT_FALSE(g.empty());
  for (const auto& p : g) {
    EXPECT_NEAR(p.r, 0.2 * p.b, 1e-15);
    EXPECT_TRUE((K2Params{p.r, p.b, 0.3, 0.1}.valid()));
  }
  EXPECT_NEAR(g.back().b, 0.95, 1e-12);
}

TEST(PowerStudy, ScenarioOneMatchesNormalApproximation) {
  PowerStudySpec spec;
  spec.grid = {{0.0, 0.0}};
  spec.seed = 7;
  const PowerResult r = power_study(spec);
  const double analytic = fisher_power_approx(0.3, 50, 0.05);
  EXPECT_NEAR(analytic, 0.68335663, 1e-6);
  EXPECT_NEAR(r.at(0, 1).power, analytic, 0.045);
  EXPECT_EQ(r.cells.size(), 5u);
}

TEST(PowerStudy, PureNullCalibration) {
  PowerStudySpec spec;
  spec.rho1 = spec.rho2 = 0.0;
  spec.grid = {{0.0, 0.0}};
  spec.sidedness = Sidedness::TwoSided;
  spec.seed = 11;
  const PowerResult r = power_study(spec);
  for (int sc = 1; sc <= 5; ++sc) EXPECT_NEAR(r.at(0, sc).power, 0.05, 0.03) << "scenario " << sc;
}

TEST(PowerStudy, MaxAtLeastMin) {
  PowerStudySpec spec;
  spec.grid = slice_grid(SliceKind::BFromR, 0.2, 0.3, 0.1, 0.25);
  spec.reps = 400;
  spec.scenarios = {3, 4};
  const PowerResult r = power_study(spec);
  for (std::size_t g = 0; g < spec.grid.size(); ++g) {
    const auto& mx = r.at(g, 3);
    const auto& mn = r.at(g, 4);
    EXPECT_GE(mx.power + 2.0 * std::hypot(mx.mc_se, mn.mc_se), mn.power);
  }
}

TEST(PowerStudy, ReproducibleAcrossThreadCounts) {
  PowerStudySpec spec;
  spec.grid = {{0.1, 0.2}, {0.0, 0.5}};
  spec.reps = 200;
  spec.seed = 3;
  const PowerResult a = power_study(spec, 1), b = power_study(spec, 5);
  ASSERT_EQ(a.cells.size(), b.cells.size());
  for (std::size_t c = 0; c < a.cells.size(); ++c) {
    EXPECT_EQ(a.cells[c].count, b.cells[c].count);
    EXPECT_EQ(a.cells[c].rho_z, b.cells[c].rho_z);
  }
}

TEST(PowerStudy, MonteCarloModeAgreesRoughly) {
  PowerStudySpec spec;
  spec.grid = {{0.0, 0.3}};
  spec.reps = 300;
  spec.scenarios = {3};
  const double f = power_study(spec).at(0, 3).power;
  spec.pvalue_mode = PValueMode::MonteCarlo;
  const double m = power_study(spec).at(0, 3).power;
  EXPECT_NEAR(f, m, 0.1);
}

TEST(PowerStudy, Validation) {
  PowerStudySpec spec;
  EXPECT_THROW(power_study(spec), Error);  // empty grid
  spec.grid = {{0.9, 0.0}};
  EXPECT_THROW(power_study(spec), Error);
  spec.grid = {{0.0, 0.0}};
  spec.alpha = 1.5;
  EXPECT_THROW(power_study(spec), Error);
  spec.alpha = 0.05;
  spec.scenarios = {6};
  EXPECT_THROW(power_study(spec), Error);
}

TEST(Calibration, MonteCarloMatchesIndependence) {
  const ExtremeTailSampler sampler;
  const auto rows = wformula_calibration(sampler);
  EXPECT_EQ(rows.size(), 9u);
  for (const auto& r : rows) {
    if (!r.independence) continue;
    EXPECT_NEAR(r.monte_carlo, *r.independence, 3.0 * r.mc_se);
  }
}

}  // namespace
}  // namespace macnet
