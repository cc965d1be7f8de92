#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "dpnls/error.hpp"
#include "dpnls/functionals.hpp"
#include "dpnls/groundstate.hpp"
#include "dpnls/params.hpp"
#include "dpnls/stability.hpp"

namespace dpnls {

/// Uniform doubles in [0, 1) from the top 53 bits of mt19937_64, so a seed
/// gives the same stream with every standard library.
class UnitRng {
 public:
  explicit UnitRng(std::uint64_t seed) : gen_(seed) {}
  double next() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * next(); }

 private:
  std::mt19937_64 gen_;
};

/// Value of one of the proof's auxiliary functions together with the largest
/// magnitude among its terms (the scale at which rounding is judged).
struct ScaledValue {
  double value;
  double scale;
};

namespace detail {

/// (e^x - 1 - x) / x^2, accurate near x = 0.
inline double phi2(double x) {
  if (std::abs(x) < 1e-2) {
    return 0.5 + x * (1.0 / 6 + x * (1.0 / 24 + x * (1.0 / 120 + x * (1.0 / 720 + x / 5040))));
  }
  return (std::expm1(x) - x) / (x * x);
}

inline void check_open_unit(double lambda, bool allow_one) {
  require(std::isfinite(lambda) && lambda > 0.0 && (allow_one ? lambda <= 1.0 : lambda < 1.0),
          ErrorKind::domain, allow_one ? "need 0 < lambda <= 1" : "need 0 < lambda < 1");
}

/// (2λ^β - βλ² - 2 + β) / (αλ² - 2λ^α - α + 2) with the common double zero at
/// λ = 1 divided out analytically; `den` receives the unfactored denominator.
inline double scaling_ratio(double lambda, double al, double be, double* den = nullptr) {
  const double e = std::log(lambda);
  const double num_core = be * phi2(be * e) - 2.0 * phi2(2.0 * e);
  const double den_core = 2.0 * phi2(2.0 * e) - al * phi2(al * e);
  if (den != nullptr) *den = 2.0 * al * e * e * den_core;
  return be * num_core / (al * den_core);
}

inline ScaledValue h_terms(double l, double al, double be) {
  const double t0 = (2.0 - al) * (be - 2.0);
  const double t1 = -2.0 * be * std::pow(l, -al);
  const double t2 = (al * be - 2.0 * al + 4.0) / (l * l);
  return {t0 + t1 + t2, std::max({std::abs(t0), std::abs(t1), std::abs(t2)})};
}

inline ScaledValue g2_terms(double l, double al, double be) {
  const double t0 = 2.0 * al * (2.0 - al) * std::pow(l, be);
  const double t1 = -al * be * (be - al) * l * l;
  const double t2 = 2.0 * be * (be - 2.0) * std::pow(l, al);
  const double t3 = -(2.0 - al) * (be - 2.0) * (be - al);
  return {t0 + t1 + t2 + t3, std::max({std::abs(t0), std::abs(t1), std::abs(t2), std::abs(t3)})};
}

inline ScaledValue g3_terms(double l, double al, double be) {
  const double t0 = (2.0 - al) * std::pow(l, be - al);
  const double t1 = -(be - al) * std::pow(l, 2.0 - al);
  const double t2 = be - 2.0;
  return {t0 + t1 + t2, std::max({std::abs(t0), std::abs(t1), std::abs(t2)})};
}

inline ScaledValue g1_terms(double l, double al, double be) {
  double den = 0.0;
  const double ratio = scaling_ratio(l, al, be, &den);
  require(den >= 1e-14, ErrorKind::near_singular, "g1 denominator below 1e-14");
  const double t0 = al * ratio * (al * be + 4.0 - 2.0 * al - al * be * std::pow(l, 2.0 - al)) *
                    std::pow(l, al - be);
  const double t1 = -be * (2.0 * be - al * be - 4.0);
  const double t2 = -al * be * be * std::pow(l, 2.0 - be);
  return {t0 + t1 + t2, std::max({std::abs(t0), std::abs(t1), std::abs(t2)})};
}

}  // namespace detail

/// h(λ) = (2-α)(β-2) - 2βλ^{-α} + (αβ-2α+4)λ^{-2}; nonnegative on (0, 1].
inline double h_fn(double lambda, const ExponentPair& ep) {
  detail::check_open_unit(lambda, true);
  return detail::h_terms(lambda, ep.alpha(), ep.beta()).value;
}

/// g2(λ) = 2α(2-α)λ^β - αβ(β-α)λ² + 2β(β-2)λ^α - (2-α)(β-2)(β-α); nonpositive on (0, 1].
inline double g2_fn(double lambda, const ExponentPair& ep) {
  detail::check_open_unit(lambda, true);
  return detail::g2_terms(lambda, ep.alpha(), ep.beta()).value;
}

/// g3(λ) = (2-α)λ^{β-α} - (β-α)λ^{2-α} + β - 2; nonnegative and non-increasing on (0, 1].
inline double g3_fn(double lambda, const ExponentPair& ep) {
  detail::check_open_unit(lambda, true);
  return detail::g3_terms(lambda, ep.alpha(), ep.beta()).value;
}

/// g1 on the open interval (0, 1), evaluated with the removable zero at
/// λ = 1 factored out. Throws near-singular if the raw denominator
/// αλ² - 2λ^α - α + 2 is below 1e-14.
inline double g1_fn(double lambda, const ExponentPair& ep) {
  detail::check_open_unit(lambda, false);
  return detail::g1_terms(lambda, ep.alpha(), ep.beta()).value;
}

/// λ grid on (0, 1) avoiding both endpoints by 1e-6.
inline std::vector<double> open_unit_grid(std::size_t points, double margin = 1e-6) {
  std::vector<double> out(points);
  const double span = 1.0 - 2.0 * margin;
  for (std::size_t i = 0; i < points; ++i)
    out[i] = margin + span * static_cast<double>(i) / static_cast<double>(points - 1);
  return out;
}

inline constexpr double kSignSlack = 1e-9;

/// Extremes of h, g1, g2, g3 over one λ grid, plus violation counts at slack
/// -1e-9 * max(1, term scale).
struct SignSuiteRow {
  double alpha = 0, beta = 0;
  double min_h = INFINITY, min_g1 = INFINITY, min_g2 = INFINITY, max_g2 = -INFINITY,
         min_g3 = INFINITY;
  int h_violations = 0, g1_violations = 0, g2_violations = 0, g3_violations = 0;
  int g3_monotone_violations = 0, g1_monotone_violations = 0;

  int total_violations() const {
    return h_violations + g1_violations + g2_violations + g3_violations + g3_monotone_violations +
           g1_monotone_violations;
  }
};

inline SignSuiteRow sign_suite(const ExponentPair& ep, std::span<const double> lambdas) {
  SignSuiteRow row;
  row.alpha = ep.alpha();
  row.beta = ep.beta();
  const double al = ep.alpha(), be = ep.beta();
  auto slack = [](const ScaledValue& v) { return kSignSlack * std::max(1.0, v.scale); };
  ScaledValue prev_g1{0, 0}, prev_g3{0, 0};
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    const double l = lambdas[i];
    const auto h = detail::h_terms(l, al, be);
    const auto g1 = detail::g1_terms(l, al, be);
    const auto g2 = detail::g2_terms(l, al, be);
    const auto g3 = detail::g3_terms(l, al, be);
    row.min_h = std::min(row.min_h, h.value);
    row.min_g1 = std::min(row.min_g1, g1.value);
    row.min_g2 = std::min(row.min_g2, g2.value);
    row.max_g2 = std::max(row.max_g2, g2.value);
    row.min_g3 = std::min(row.min_g3, g3.value);
    row.h_violations += h.value < -slack(h);
    row.g1_violations += g1.value < -slack(g1);
    row.g2_violations += g2.value > slack(g2);
    row.g3_violations += g3.value < -slack(g3);
    if (i > 0) {
      const double s3 = std::max(slack(g3), slack(prev_g3));
      const double s1 = std::max(slack(g1), slack(prev_g1));
      row.g3_monotone_violations += g3.value > prev_g3.value + s3;
      row.g1_monotone_violations += g1.value > prev_g1.value + s1;
    }
    prev_g1 = g1;
    prev_g3 = g3;
  }
  return row;
}

/// α uniform on (0.05, 1.95), β uniform on (2.05, 6).
inline ExponentPair random_exponent_pair(UnitRng& rng) {
  const double al = rng.uniform(0.05, 1.95);
  const double be = rng.uniform(2.05, 6.0);
  return ExponentPair::make(al, be);
}

/// K_ω(v^λ) from the exact λ-dependence of the norms.
inline double nehari_along_scaling(const FunctionalReport& v, const Params& prm, double lambda) {
  return lambda * lambda * v.grad + prm.omega() * v.mass -
         prm.a() * std::pow(lambda, prm.alpha()) * v.lp - prm.b() * std::pow(lambda, prm.beta()) * v.lq;
}

/// λ₀ in (0, 1] with K_ω(v^{λ₀}) = 0, by bisection. K_ω(v^λ) -> ω||v||² > 0
/// as λ -> 0, so a root exists whenever K_ω(v) <= 0.
inline double find_lambda0(const FunctionalReport& v, const Params& prm, double k_slack = 0.0) {
  require(v.mass > 0.0, ErrorKind::domain, "lambda0 needs a nonzero state");
  const double tol = 1e-10 * prm.omega() * v.mass;
  const double k1 = nehari_along_scaling(v, prm, 1.0);
  require(k1 <= std::max(k_slack, 0.0), ErrorKind::precondition, "lambda0 needs K_omega(v) <= 0");
  if (k1 >= -tol) return 1.0;
  double lo = 0.5;
  while (nehari_along_scaling(v, prm, lo) <= 0.0) lo *= 0.5;
  double hi = 1.0;
  for (int i = 0; i < 2000; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (nehari_along_scaling(v, prm, mid) > 0.0 ? lo : hi) = mid;
  }
  const double klo = std::abs(nehari_along_scaling(v, prm, lo));
  const double khi = std::abs(nehari_along_scaling(v, prm, hi));
  return klo < khi ? lo : hi;
}

template <class State>
double find_lambda0(const State& v, const Params& prm) {
  require(!v.is_zero(), ErrorKind::domain, "lambda0 needs a nonzero state");
  return find_lambda0(functionals(v, prm), prm);
}

/// f(λ) = S_ω(v^λ) - (λ²/2) Q(v).
inline double f_curve(const FunctionalReport& v, const Params& prm, double q_of_v, double lambda) {
  require(std::isfinite(lambda) && lambda > 0.0, ErrorKind::domain, "f needs lambda > 0");
  return scaled_report(v, prm, lambda).action - 0.5 * lambda * lambda * q_of_v;
}

/// Amplitude μ > 0 with K_ω(μv) = 0, i.e. ||∇v||² + ω||v||² = aμ^{p-1}||v||^{p+1}_{p+1} + bμ^{q-1}||v||^{q+1}_{q+1}.
inline double nehari_amplitude(const FunctionalReport& v, const Params& prm) {
  require(v.mass > 0.0, ErrorKind::domain, "Nehari rescaling needs a nonzero state");
  require(v.lp > 0.0 || v.lq > 0.0, ErrorKind::domain, "Nehari rescaling needs a positive power norm");
  const double lin = v.grad + prm.omega() * v.mass;
  auto gap = [&](double mu) {
    return prm.a() * std::pow(mu, prm.p() - 1.0) * v.lp + prm.b() * std::pow(mu, prm.q() - 1.0) * v.lq - lin;
  };
  double lo = 1.0, hi = 1.0;
  while (gap(lo) > 0.0) lo *= 0.5;
  while (gap(hi) < 0.0) hi *= 2.0;
  for (int i = 0; i < 2000; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (gap(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

template <std::floating_point Real>
RadialProfile<Real> rescale_to_nehari(const RadialProfile<Real>& v, const Params& prm) {
  require(!v.is_zero(), ErrorKind::domain, "Nehari rescaling needs a nonzero state");
  return v.scaled_amplitude(static_cast<Real>(nehari_amplitude(functionals(v, prm), prm)));
}

inline ComplexField rescale_to_nehari(const ComplexField& v, const Params& prm) {
  require(!v.is_zero(), ErrorKind::domain, "Nehari rescaling needs a nonzero state");
  return v.scaled_amplitude(nehari_amplitude(functionals(v, prm), prm));
}

/// Report of μv from the report of v.
inline FunctionalReport amplitude_report(const FunctionalReport& v, const Params& prm, double mu) {
  return report_from_norms(mu * mu * v.mass, mu * mu * v.grad, std::pow(mu, prm.p() + 1.0) * v.lp,
                           std::pow(mu, prm.q() + 1.0) * v.lq, prm);
}

struct KeyEstimateCheck {
  double lambda0 = 1;
  double lhs = 0;     ///< Q(v)/2
  double rhs = 0;     ///< S_ω(v) - S_ω(φ_ω)
  double margin = 0;  ///< rhs - lhs
  // margin = nehari_gap + virial_gap + f_gap
  double nehari_gap = 0;  ///< S_ω(v^{λ₀}) - S_ω(φ_ω) >= 0 (Nehari characterization)
  double virial_gap = 0;  ///< (λ₀²/2)(-Q(v)) >= 0
  double f_gap = 0;       ///< f(1) - f(λ₀) >= 0
  double aim_lhs = 0, aim_rhs = 0;  ///< a/(p+1)||v||^{p+1} <= b/(q+1) ratio(λ₀) ||v||^{q+1}
  double pq_lhs = 0, pq_rhs = 0;    ///< ω||v||² <= (...)λ₀^α||v||^{p+1} + (...)λ₀^β||v||^{q+1}
};

/// Q(v)/2 <= S_ω(v) - S_ω(φ_ω) for v != 0 with ||v|| <= ||φ_ω||, K_ω(v) <= 0,
/// Q(v) <= 0, at a ground state meeting ∂²_λ S_ω(φ_ω^λ) <= 0.
inline KeyEstimateCheck key_estimate_check(const FunctionalReport& v, const GroundStateResult& gs) {
  const Params& prm = gs.params;
  const FunctionalReport& g = gs.report;
  const double zero_slack = gs.identity_tol * g.action;
  require(classify(gs).criterion_met, ErrorKind::precondition,
          "key estimate needs a ground state with d2s <= 0");
  require(v.mass > 0.0, ErrorKind::precondition, "hypothesis failed: v != 0");
  require(v.mass <= g.mass * (1.0 + 1e-12), ErrorKind::precondition,
          "hypothesis failed: ||v||_2 <= ||phi||_2");
  require(v.nehari <= zero_slack, ErrorKind::precondition, "hypothesis failed: K_omega(v) <= 0");
  require(v.virial <= zero_slack, ErrorKind::precondition, "hypothesis failed: Q(v) <= 0");

  KeyEstimateCheck c;
  c.lambda0 = find_lambda0(v, prm, zero_slack);
  c.lhs = 0.5 * v.virial;
  c.rhs = v.action - g.action;
  c.margin = c.rhs - c.lhs;
  const double l0 = c.lambda0;
  c.nehari_gap = scaled_report(v, prm, l0).action - g.action;
  c.virial_gap = 0.5 * l0 * l0 * (-v.virial);
  c.f_gap = f_curve(v, prm, v.virial, 1.0) - f_curve(v, prm, v.virial, l0);

  const double al = prm.alpha(), be = prm.beta();
  const double ratio = l0 < 1.0 ? detail::scaling_ratio(l0, al, be) : be * (be - 2.0) / (al * (2.0 - al));
  c.aim_lhs = prm.a() / (prm.p() + 1.0) * v.lp;
  c.aim_rhs = prm.b() / (prm.q() + 1.0) * ratio * v.lq;
  c.pq_lhs = prm.omega() * v.mass;
  c.pq_rhs = (prm.a() + prm.a() / (prm.p() + 1.0) * (2.0 * al - al * be - 4.0) / be) * std::pow(l0, al) * v.lp +
             (prm.b() + prm.b() / (prm.q() + 1.0) * (2.0 * be - al * be - 4.0) / al) * std::pow(l0, be) * v.lq;
  return c;
}

template <class State>
KeyEstimateCheck key_estimate_check(const State& v, const GroundStateResult& gs) {
  return key_estimate_check(functionals(v, gs.params), gs);
}

/// Key-estimate hypotheses with the ground state's certification slack.
inline bool satisfies_key_hypotheses(const FunctionalReport& v, const GroundStateResult& gs) {
  const double zero_slack = gs.identity_tol * gs.report.action;
  return v.mass > 0.0 && v.mass <= gs.report.mass * (1.0 + 1e-12) && v.nehari <= zero_slack &&
         v.virial <= zero_slack;
}

struct AdmissibleSample {
  std::string family;  ///< "scaling", "amplitude" or "bump"
  FunctionalReport report;
};

/// Hypothesis-filtered test states around φ_ω: pure scalings φ^λ, amplitude
/// multiples cφ^λ, and bump perturbations ((1 + εG)φ)^λ with Gaussian G.
/// Candidates failing any hypothesis are discarded, never adjusted.
inline std::vector<AdmissibleSample> admissible_samples(const GroundStateResult& gs, UnitRng& rng,
                                                        std::size_t per_family = 80) {
  const Params& prm = gs.params;
  std::vector<AdmissibleSample> out;
  auto keep = [&](const char* fam, const FunctionalReport& r) {
    if (satisfies_key_hypotheses(r, gs)) out.push_back({fam, r});
  };
  for (std::size_t i = 1; i <= per_family; ++i) {
    const double l = 1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(per_family);
    keep("scaling", scaled_report(gs.report, prm, l));
  }
  for (std::size_t kept = 0, tries = 0; kept < per_family && tries < 50 * per_family; ++tries) {
    const double l = rng.uniform(1.0, 3.0);
    const double c = rng.uniform(0.8, 1.0);
    const auto before = out.size();
    keep("amplitude", amplitude_report(scaled_report(gs.report, prm, l), prm, c));
    kept += out.size() - before;
  }
  const double k = std::sqrt(prm.omega());
  for (std::size_t kept = 0, tries = 0; kept < per_family && tries < 20 * per_family; ++tries) {
    const double center = rng.uniform(0.0, 2.0) / k;
    const double width = rng.uniform(0.2, 1.0) / k;
    const double eps = rng.uniform(-0.1, 0.1);
    const double l = rng.uniform(1.0, 3.0);
    const auto& base = gs.profile;
    GroundProfile bumped = base;
    for (std::size_t j = 0; j < bumped.size(); ++j) {
      const double z = (base.radius(j) - center) / width;
      bumped.values[j] = base.values[j] * (1.0L + static_cast<long double>(eps * std::exp(-z * z)));
    }
    const auto before = out.size();
    keep("bump", scaled_report(functionals(bumped, prm), prm, l));
    kept += out.size() - before;
  }
  return out;
}

}  // namespace dpnls
