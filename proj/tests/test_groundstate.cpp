#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "dpnls/groundstate.hpp"
#include "dpnls/lemma_lab.hpp"
#include "support.hpp"

using namespace dpnls;
using support::ground_state;
using support::kind_of;

namespace {

void expect_certified(const GroundStateResult& gs) {
  EXPECT_TRUE(gs.certified());
  EXPECT_LE(gs.residual, 1e-8);
  EXPECT_LE(std::abs(gs.report.nehari), 1e-6 * gs.report.action);
  EXPECT_LE(std::abs(gs.report.virial), 1e-6 * gs.report.action);
  EXPECT_GT(gs.decay_rate, 0.0);
  const auto& v = gs.profile.values;
  for (std::size_t j = 1; j < v.size(); ++j) {
    ASSERT_GT(v[j], 0.0L) << j;
    ASSERT_LT(v[j], v[j - 1]) << j;
  }
  EXPECT_LT(v.back(), 1e-10L * v.front());
}

/// Exact single-power soliton of -φ'' + ωφ = bφ^q on the line.
double single_power_soliton(double x, double omega, double b, double q) {
  const double amp = std::pow((q + 1) * omega / (2 * b), 1 / (q - 1));
  return amp * std::pow(1 / std::cosh(0.5 * (q - 1) * std::sqrt(omega) * x), 2 / (q - 1));
}

}  // namespace

TEST(GroundState, AmplitudeMatchesCubicRootOracle) {
  // ω = 1, a = b = 1, p = 3, q = 7: φ(0)² = y with y³ + 2y - 4 = 0.
  double lo = 0, hi = 2;
  for (int i = 0; i < 200; ++i) {
    const double y = 0.5 * (lo + hi);
    (y * y * y + 2 * y - 4 < 0 ? lo : hi) = y;
  }
  const auto& gs = ground_state(1.0);
  EXPECT_NEAR(gs.amplitude(), std::sqrt(lo), 1e-5);
  EXPECT_NEAR(gs.amplitude(), 1.08606, 1e-5);
}

class GroundStateSweep : public ::testing::TestWithParam<double> {};

TEST_P(GroundStateSweep, CertifiedAndMatchesFirstIntegral) {
  const double omega = GetParam();
  const auto& gs = ground_state(omega);
  expect_certified(gs);
  EXPECT_NEAR(gs.amplitude(), support::first_integral_amplitude(omega), 1e-5);
  EXPECT_EQ(gs.bracket.scan_sign_changes, 1);
  EXPECT_LT(gs.bracket.lo, gs.amplitude());
  EXPECT_GT(gs.bracket.hi, gs.amplitude());
}

INSTANTIATE_TEST_SUITE_P(Omegas, GroundStateSweep, ::testing::Values(0.5, 1.0, 2.0, 10.0, 50.0));

TEST(GroundState, HigherDimensionsCertify) {
  expect_certified(ground_state(1.0, 2, 2.0, 4.0));
  expect_certified(ground_state(1.0, 3, 2.0, 4.0));
}

TEST(GroundState, DecayRateIsSqrtOmega) {
  EXPECT_GE(ground_state(1.0).decay_rate, 0.9);
  EXPECT_LE(ground_state(1.0).decay_rate, 1.1);
  EXPECT_NEAR(ground_state(4.0).decay_rate, 2.0, 0.2);
}

TEST(GroundState, ActionConvergesAtSecondOrder) {
  const auto prm = Params::make(1, 1, 1, 3, 7, 1.0);
  SolverConfig cfg;
  cfg.identity_tol = 1e-4;  // coarse grids miss the default certification bound
  std::vector<double> s;
  for (std::size_t n : {6251, 12501, 25001}) s.push_back(solve_ground_state(prm, RadialGrid(25.0, n), cfg).report.action);
  const double ratio = (s[0] - s[1]) / (s[1] - s[2]);
  EXPECT_NEAR(ratio, 4.0, 0.2);
}

TEST(GroundState, UnderResolvedGridIsRejected) {
  const auto prm = Params::make(1, 1, 1, 3, 7, 100.0);
  EXPECT_EQ(kind_of([&] { solve_ground_state(prm, RadialGrid(25.0, 101)); }), ErrorKind::resolution);
}

TEST(GroundState, MissingBracketIsReported) {
  SolverConfig cfg;
  cfg.bracket_scale = 1.0001;
  const auto prm = Params::make(1, 1, 1, 3, 7, 1.0);
  EXPECT_EQ(kind_of([&] { solve_ground_state(prm, RadialGrid::for_omega(1.0), cfg); }),
            ErrorKind::no_ground_state_bracket);
}

TEST(GroundState, RelaxedParametersAreRefused) {
  const auto prm = Params::relaxed(1, 0.0, 1.0, 3, 7, 1.0);
  EXPECT_EQ(kind_of([&] { solve_ground_state(prm); }), ErrorKind::validation);
}

TEST(Residual, ZeroProfileIsTrivialSolution) {
  const auto prm = Params::make(1, 1, 1, 3, 7, 1.0);
  const auto z = GroundProfile::zeros(RadialGrid(10.0, 101), 1);
  EXPECT_EQ(residual_norm(z, prm), 0.0);
  EXPECT_FALSE(is_nontrivial(z));
  EXPECT_TRUE(is_nontrivial(ground_state(1.0).profile));
}

TEST(Residual, SinglePowerSolitonConvergesAtSecondOrder) {
  const double omega = 1.0, b = 1.0, q = 5.0;
  const auto prm = Params::relaxed(1, 0.0, b, 3.0, q, omega);
  std::vector<double> res;
  for (std::size_t n : {1001, 2001, 4001}) {
    const auto prof = GroundProfile::sample(RadialGrid(20.0, n), 1, [&](double r) {
      return single_power_soliton(r, omega, b, q);
    });
    res.push_back(residual_norm(prof, prm));
  }
  EXPECT_NEAR(res[0] / res[1], 4.0, 0.1);
  EXPECT_NEAR(res[1] / res[2], 4.0, 0.1);
}

TEST(Residual, SolverOutputMeetsTolerance) {
  const auto& gs = ground_state(2.0);
  EXPECT_LE(residual_norm(gs.profile, gs.params), 1e-8);
}

TEST(DecayFit, ExactExponential) {
  const auto prof = GroundProfile::sample(RadialGrid(10.0, 1001), 1, [](double r) { return std::exp(-2 * r); });
  EXPECT_NEAR(decay_fit(prof, 4.0), 2.0, 1e-6);
}

TEST(DecayFit, NonPositiveTailIsContaminated) {
  auto prof = GroundProfile::sample(RadialGrid(10.0, 1001), 1, [](double r) { return std::exp(-2 * r); });
  prof.values[950] = -1e-12L;
  EXPECT_EQ(kind_of([&] { decay_fit(prof, 4.0); }), ErrorKind::tail_contaminated);
}

TEST(GroundState, MinimalAmongNehariNormalizedStates) {
  const auto& gs = ground_state(1.0);
  const auto& prm = gs.params;
  std::vector<GroundProfile> tests;
  for (double w : {0.5, 1.0, 2.0, 4.0})
    tests.push_back(GroundProfile::sample(gs.profile.grid, 1, [&](double r) { return std::exp(-r * r / (w * w)); }));
  for (double w : {0.7, 1.5, 3.0})
    tests.push_back(GroundProfile::sample(gs.profile.grid, 1, [&](double r) { return 1 / std::cosh(r / w); }));
  for (double l : {0.8, 1.3})
    tests.push_back(scale_field(gs.profile, l));
  for (const auto& t : tests) {
    const auto w = rescale_to_nehari(t, prm);
    const auto r = functionals(w, prm);
    EXPECT_LE(std::abs(r.nehari), 1e-10 * (r.grad + prm.omega() * r.mass));
    EXPECT_GE(0.5 * r.bigf, gs.report.action * (1 - 1e-9));
  }
}
