#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "dpnls/lemma_lab.hpp"
#include "support.hpp"

using namespace dpnls;
using support::ground_state;
using support::kind_of;

namespace {

const ExponentPair kUnitThree = ExponentPair::make(1.0, 3.0);

/// g1 straight from its defining quotient, no cancellation handling.
double g1_direct(double l, double al, double be) {
  const double num = al * (2 * std::pow(l, be) - be * l * l - 2 + be) * (al * be + 4 - 2 * al - al * be * std::pow(l, 2 - al));
  const double den = (al * l * l - 2 * std::pow(l, al) - al + 2) * std::pow(l, be - al);
  return num / den - be * (2 * be - al * be - 4) - al * be * be / std::pow(l, be - 2);
}

std::vector<ExponentPair> sample_pairs(std::size_t n, std::uint64_t seed) {
  UnitRng rng(seed);
  std::vector<ExponentPair> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(random_exponent_pair(rng));
  return out;
}

}  // namespace

TEST(Rng, DeterministicAndInUnitInterval) {
  UnitRng a(7), b(7), c(8);
  bool differs = false;
  for (int i = 0; i < 1000; ++i) {
    const double x = a.next();
    EXPECT_EQ(x, b.next());
    EXPECT_GE(x, 0.0);
    EXPECT_LT(x, 1.0);
    differs = differs || x != c.next();
  }
  EXPECT_TRUE(differs);
}

TEST(Rng, PairsStayInsideSamplingBox) {
  for (const auto& ep : sample_pairs(500, 3)) {
    EXPECT_GT(ep.alpha(), 0.05);
    EXPECT_LT(ep.alpha(), 1.95);
    EXPECT_GT(ep.beta(), 2.05);
    EXPECT_LT(ep.beta(), 6.0);
  }
}

TEST(AuxiliaryFunctions, VanishAtOne) {
  for (const auto& ep : sample_pairs(50, 11)) {
    EXPECT_NEAR(h_fn(1.0, ep), 0.0, 1e-12);
    EXPECT_NEAR(g2_fn(1.0, ep), 0.0, 1e-12);
    EXPECT_NEAR(g3_fn(1.0, ep), 0.0, 1e-12);
  }
}

TEST(AuxiliaryFunctions, HandValuesAtOneHalf) {
  EXPECT_NEAR(h_fn(0.5, kUnitThree), 9.0, 1e-12);
  EXPECT_NEAR(g2_fn(0.5, kUnitThree), -0.25, 1e-12);
  EXPECT_NEAR(g3_fn(0.5, kUnitThree), 0.25, 1e-12);
}

TEST(AuxiliaryFunctions, DomainChecks) {
  EXPECT_EQ(kind_of([] { h_fn(0.0, kUnitThree); }), ErrorKind::domain);
  EXPECT_EQ(kind_of([] { h_fn(-0.5, kUnitThree); }), ErrorKind::domain);
  EXPECT_EQ(kind_of([] { g2_fn(1.5, kUnitThree); }), ErrorKind::domain);
  EXPECT_EQ(kind_of([] { g3_fn(0.0, kUnitThree); }), ErrorKind::domain);
  EXPECT_EQ(kind_of([] { g1_fn(1.0, kUnitThree); }), ErrorKind::domain);
  EXPECT_EQ(kind_of([] { g1_fn(0.0, kUnitThree); }), ErrorKind::domain);
}

TEST(G1, RemovableLimitAtOne) {
  for (const auto& ep : sample_pairs(50, 5)) EXPECT_LT(std::abs(g1_fn(1 - 1e-6, ep)), 1e-3);
}

TEST(G1, NearSingularDenominatorIsReported) {
  EXPECT_EQ(kind_of([] { g1_fn(1 - 1e-9, kUnitThree); }), ErrorKind::near_singular);
}

TEST(G1, StabilizedFormAgreesWithDirectQuotientAwayFromOne) {
  for (const auto& ep : sample_pairs(30, 9)) {
    for (double l : {0.01, 0.1, 0.3, 0.5, 0.8}) {
      const double d = g1_direct(l, ep.alpha(), ep.beta());
      EXPECT_NEAR(g1_fn(l, ep), d, 1e-9 * std::max(1.0, std::abs(d))) << ep.alpha() << " " << ep.beta() << " " << l;
    }
  }
}

TEST(G1, StabilizedFormKeepsDigitsNearOne) {
  // The direct quotient loses most digits near λ = 1; the stabilized form
  // must stay smooth, so consecutive values differ by O(step).
  const auto ep = ExponentPair::make(0.7, 4.2);
  double prev = g1_fn(1 - 2e-6, ep);
  for (double l = 1 - 2e-6 + 1e-8; l < 1 - 1e-6; l += 1e-8) {
    const double v = g1_fn(l, ep);
    EXPECT_LT(std::abs(v - prev), 1e-6);
    prev = v;
  }
}

TEST(SignSuite, NoViolationsOnRandomPairs) {
  const auto grid = open_unit_grid(10000);
  ASSERT_EQ(grid.size(), 10000u);
  EXPECT_NEAR(grid.front(), 1e-6, 1e-15);
  EXPECT_NEAR(grid.back(), 1 - 1e-6, 1e-15);
  for (const auto& ep : sample_pairs(100, 2024)) {
    const auto row = sign_suite(ep, grid);
    EXPECT_EQ(row.total_violations(), 0) << ep.alpha() << " " << ep.beta();
    EXPECT_GE(row.min_h, -1e-9 * 100);
    EXPECT_LE(row.max_g2, 1e-9 * 100);
  }
}

TEST(SignSuite, DetectsPlantedViolation) {
  // Outside the admissible window (α > 2) the sign pattern breaks.
  const auto grid = open_unit_grid(200);
  ExponentPair fake = kUnitThree;
  const auto row = [&] {
    SignSuiteRow r;
    r.alpha = 2.5;
    r.beta = 3.0;
    for (double l : grid) {
      const auto g3 = detail::g3_terms(l, 2.5, 3.0);
      r.min_g3 = std::min(r.min_g3, g3.value);
    }
    return r;
  }();
  (void)fake;
  EXPECT_LT(row.min_g3, 0.0);
}

TEST(Lambda0, GroundStateGivesOne) {
  const auto& gs = ground_state(1.0);
  EXPECT_EQ(find_lambda0(gs.report, gs.params), 1.0);
}

TEST(Lambda0, ScaledAndDoubledStatesHitTheNehariManifold) {
  const auto& gs = ground_state(1.0);
  const auto& prm = gs.params;
  std::vector<FunctionalReport> states;
  for (double mu : {1.1, 1.5, 2.0, 3.0}) states.push_back(scaled_report(gs.report, prm, mu));
  const auto doubled = amplitude_report(gs.report, prm, 2.0);
  ASSERT_LT(doubled.nehari, 0.0);
  states.push_back(doubled);
  for (const auto& v : states) {
    const double l0 = find_lambda0(v, prm);
    EXPECT_GT(l0, 0.0);
    EXPECT_LT(l0, 1.0);
    EXPECT_LT(std::abs(nehari_along_scaling(v, prm, l0)), 1e-10 * prm.omega() * v.mass);
  }
  // The state form agrees with the report form.
  const auto phi2 = gs.profile.scaled_amplitude(2.0L);
  EXPECT_NEAR(find_lambda0(phi2, prm), find_lambda0(doubled, prm), 1e-9);
}

TEST(Lambda0, Preconditions) {
  const auto& gs = ground_state(1.0);
  const auto half = amplitude_report(gs.report, gs.params, 0.5);
  EXPECT_EQ(kind_of([&] { find_lambda0(half, gs.params); }), ErrorKind::precondition);
  EXPECT_EQ(kind_of([&] { find_lambda0(report_from_norms(0, 0, 0, 0, gs.params), gs.params); }), ErrorKind::domain);
  EXPECT_EQ(kind_of([&] { find_lambda0(GroundProfile::zeros(gs.profile.grid, 1), gs.params); }), ErrorKind::domain);
}

TEST(KeyEstimate, EqualityAtTheGroundState) {
  const auto& gs = ground_state(1.0);
  const auto k = key_estimate_check(gs.profile, gs);
  const double s = gs.report.action;
  EXPECT_EQ(k.lambda0, 1.0);
  EXPECT_LE(std::abs(k.lhs), 1e-6 * s);
  EXPECT_LE(std::abs(k.rhs), 1e-12 * s);
  EXPECT_LE(std::abs(k.margin), 1e-6 * s);
}

TEST(KeyEstimate, ScaledGroundStatesSatisfyTheEstimate) {
  for (double w : {1.0, 10.0, 50.0}) {
    const auto& gs = ground_state(w);
    for (double l : {1.1, 1.5, 2.0, 3.0}) {
      const auto k = key_estimate_check(scaled_report(gs.report, gs.params, l), gs);
      EXPECT_GE(k.margin, 0.0) << w << " " << l;
      EXPECT_LT(k.lambda0, 1.0);
    }
  }
}

TEST(KeyEstimate, ChainDecompositionIsConsistent) {
  const auto& gs = ground_state(1.0);
  UnitRng rng(42);
  for (const auto& s : admissible_samples(gs, rng, 40)) {
    const auto k = key_estimate_check(s.report, gs);
    const double scale = std::max(1.0, std::abs(k.rhs));
    EXPECT_NEAR(k.nehari_gap + k.virial_gap + k.f_gap, k.margin, 1e-12 * scale) << s.family;
    EXPECT_GE(k.nehari_gap, -1e-8 * scale) << s.family;
    EXPECT_GE(k.virial_gap, -1e-8 * scale) << s.family;
    EXPECT_GE(k.f_gap, -1e-8 * scale) << s.family;
    EXPECT_LE(k.aim_lhs, k.aim_rhs * (1 + 1e-10)) << s.family;
    EXPECT_LE(k.pq_lhs, k.pq_rhs * (1 + 1e-10)) << s.family;
    EXPECT_GE(k.margin, -1e-8 * std::abs(k.rhs)) << s.family;
  }
}

TEST(KeyEstimate, HypothesisFailuresAreNamed) {
  const auto& gs = ground_state(1.0);
  auto message = [&](const FunctionalReport& v) {
    try {
      key_estimate_check(v, gs);
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::precondition);
      return std::string(e.what());
    }
    return std::string();
  };
  const auto& prm = gs.params;
  EXPECT_NE(message(report_from_norms(0, 0, 0, 0, prm)).find("v != 0"), std::string::npos);
  EXPECT_NE(message(amplitude_report(scaled_report(gs.report, prm, 1.5), prm, 1.01)).find("||v||_2"), std::string::npos);
  EXPECT_NE(message(amplitude_report(gs.report, prm, 0.9)).find("K_omega"), std::string::npos);
  // Q > 0 with K < 0: a spread-out state at large amplitude.
  auto spread = amplitude_report(scaled_report(gs.report, prm, 0.7), prm, 1.0);
  spread = report_from_norms(spread.mass, spread.grad, spread.lp, spread.lq * 3.0, prm);
  if (spread.nehari <= 0 && spread.virial > 0) EXPECT_NE(message(spread).find("Q(v)"), std::string::npos);
}

TEST(KeyEstimate, RequiresCriterionGroundState) {
  const auto& gs = ground_state(0.5);
  EXPECT_EQ(kind_of([&] { key_estimate_check(gs.report, gs); }), ErrorKind::precondition);
}

TEST(FCurve, ValueAtOneAndOrdering) {
  const auto& gs = ground_state(1.0);
  const auto& prm = gs.params;
  UnitRng rng(5);
  for (const auto& s : admissible_samples(gs, rng, 20)) {
    const auto& v = s.report;
    EXPECT_NEAR(f_curve(v, prm, v.virial, 1.0), v.action - 0.5 * v.virial, 1e-12 * std::max(1.0, std::abs(v.action)));
    EXPECT_LE(f_curve(v, prm, v.virial, find_lambda0(v, prm, gs.identity_tol * gs.report.action)),
              f_curve(v, prm, v.virial, 1.0) + 1e-12);
  }
}

TEST(FCurve, CriticalAtOneForGroundState) {
  const auto& gs = ground_state(1.0);
  const double h = 1e-5;
  const double d = (f_curve(gs.report, gs.params, gs.report.virial, 1 + h) -
                    f_curve(gs.report, gs.params, gs.report.virial, 1 - h)) / (2 * h);
  EXPECT_LE(std::abs(d), 1e-6 * gs.report.action);
  EXPECT_EQ(kind_of([&] { f_curve(gs.report, gs.params, 0.0, 0.0); }), ErrorKind::domain);
}

TEST(Nehari, GroundStateNeedsNoRescaling) {
  const auto& gs = ground_state(1.0);
  EXPECT_NEAR(nehari_amplitude(gs.report, gs.params), 1.0, 1e-8);
}

TEST(Nehari, DoubledGroundStateReturnsToUnitAmplitude) {
  const auto& gs = ground_state(1.0);
  const auto doubled = gs.profile.scaled_amplitude(2.0L);
  const double mu = nehari_amplitude(functionals(doubled, gs.params), gs.params);
  EXPECT_NEAR(2 * mu, 1.0, 1e-8);
  const auto back = functionals(rescale_to_nehari(doubled, gs.params), gs.params);
  EXPECT_LE(std::abs(back.nehari), 1e-10 * (back.grad + gs.params.omega() * back.mass));
}

TEST(Nehari, GaussianSitsAboveTheGroundStateLevel) {
  const auto& gs = ground_state(1.0);
  const auto g = GroundProfile::sample(gs.profile.grid, 1, [](double r) { return std::exp(-r * r / 2); });
  const auto r = functionals(rescale_to_nehari(g, gs.params), gs.params);
  EXPECT_GE(0.5 * r.bigf, gs.report.action);
  const auto line = ComplexField(PeriodicGrid(40, 4096), std::vector<std::complex<double>>(4096, 0.0));
  EXPECT_EQ(kind_of([&] { rescale_to_nehari(line, gs.params); }), ErrorKind::domain);
  EXPECT_EQ(kind_of([&] { rescale_to_nehari(GroundProfile::zeros(gs.profile.grid, 1), gs.params); }), ErrorKind::domain);
}

TEST(Samples, AtLeastTwoHundredAdmissibleAcrossFamilies) {
  const auto& gs = ground_state(1.0);
  UnitRng rng(20240601);
  const auto samples = admissible_samples(gs, rng);
  EXPECT_GE(samples.size(), 200u);
  std::set<std::string> families;
  for (const auto& s : samples) {
    families.insert(s.family);
    EXPECT_TRUE(satisfies_key_hypotheses(s.report, gs));
  }
  EXPECT_EQ(families, (std::set<std::string>{"scaling", "amplitude", "bump"}));
}

TEST(Samples, SameSeedSameSamples) {
  const auto& gs = ground_state(1.0);
  UnitRng a(99), b(99);
  const auto x = admissible_samples(gs, a, 10), y = admissible_samples(gs, b, 10);
  ASSERT_EQ(x.size(), y.size());
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(x[i].report.fields(), y[i].report.fields());
}
