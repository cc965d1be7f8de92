#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <string_view>
#include <vector>

#include "dpnls/error.hpp"
#include "dpnls/functionals.hpp"
#include "dpnls/groundstate.hpp"
#include "dpnls/state.hpp"

namespace dpnls {

/// d2s <= criterion_band * S_ω(φ_ω) counts as d2s <= 0.
inline constexpr double kCriterionBand = 1e-8;
/// Margins of the B_ω conditions closer to zero than this (relative) are borderline.
inline constexpr double kBorderlineBand = 1e-10;

struct StabilityReport {
  double omega = 0;
  double d2s = 0;
  double energy = 0;
  bool criterion_met = false;
  bool remark13_consistent = false;
};

/// The three summands (α+1)Q, -2αE and -b(β-2)(β-α)/(q+1) ||v||_{q+1}^{q+1}.
/// Their sum is ∂²_λ S_ω(v^λ) at λ = 1 for every v; at a ground state Q = 0
/// and the remaining two are negative whenever E > 0.
inline std::array<double, 3> remark13_decomposition(const FunctionalReport& r, const Params& prm) {
  const double al = prm.alpha(), be = prm.beta();
  return {(al + 1.0) * r.virial, -2.0 * al * r.energy,
          -prm.b() * (be - 2.0) * (be - al) / (prm.q() + 1.0) * r.lq};
}

inline StabilityReport classify(const GroundStateResult& gs) {
  require(gs.certified(), ErrorKind::certification, "classification needs a certified ground state");
  const auto& r = gs.report;
  const double band = kCriterionBand * r.action;
  StabilityReport out;
  out.omega = gs.params.omega();
  out.d2s = r.d2s;
  out.energy = r.energy;
  out.criterion_met = r.d2s <= band;
  const auto parts = remark13_decomposition(r, gs.params);
  const double sum = parts[0] + parts[1] + parts[2];
  const bool identity_ok = std::abs(sum - r.d2s) <= 1e-8 * std::max(std::abs(r.d2s), r.action);
  out.remark13_consistent = identity_ok && (!(r.energy > band) || r.d2s < -band);
  return out;
}

enum class Condition { satisfied, violated, indeterminate };

constexpr std::string_view to_string(Condition c) {
  switch (c) {
    case Condition::satisfied: return "satisfied";
    case Condition::violated: return "violated";
    case Condition::indeterminate: return "indeterminate";
  }
  return "unknown";
}

/// Membership of v in B_ω = {S_ω(v) < S_ω(φ_ω), ||v|| <= ||φ_ω||, K_ω(v) < 0, Q(v) < 0}.
struct BOmegaVerdict {
  bool in_set = false;
  double action_gap = 0;  ///< S_ω(v) - S_ω(φ_ω), needs < 0
  double l2_gap = 0;      ///< ||v||_2 - ||φ_ω||_2, needs <= 0
  double nehari = 0;      ///< K_ω(v), needs < 0
  double virial = 0;      ///< Q(v), needs < 0
  std::array<Condition, 4> conditions{};
};

namespace detail {

inline Condition strict_negative(double margin, double scale) {
  if (std::abs(margin) < kBorderlineBand * std::max(1.0, scale)) return Condition::indeterminate;
  return margin < 0.0 ? Condition::satisfied : Condition::violated;
}

inline Condition weak_nonpositive(double margin, double scale) {
  if (std::abs(margin) < kBorderlineBand * std::max(1.0, scale)) return Condition::satisfied;
  return margin <= 0.0 ? Condition::satisfied : Condition::violated;
}

}  // namespace detail

inline BOmegaVerdict in_b_omega(const FunctionalReport& v, const FunctionalReport& ground) {
  BOmegaVerdict out;
  out.action_gap = v.action - ground.action;
  out.l2_gap = std::sqrt(v.mass) - std::sqrt(ground.mass);
  out.nehari = v.nehari;
  out.virial = v.virial;
  const double s = std::abs(ground.action);
  out.conditions = {detail::strict_negative(out.action_gap, s),
                    detail::weak_nonpositive(out.l2_gap, std::sqrt(ground.mass)),
                    detail::strict_negative(out.nehari, s), detail::strict_negative(out.virial, s)};
  out.in_set = true;
  for (auto c : out.conditions) out.in_set = out.in_set && c == Condition::satisfied;
  return out;
}

inline BOmegaVerdict in_b_omega(const ComplexField& v, const GroundStateResult& gs) {
  return in_b_omega(functionals(v, gs.params), gs.report);
}

template <std::floating_point Real>
BOmegaVerdict in_b_omega(const RadialProfile<Real>& v, const GroundStateResult& gs) {
  return in_b_omega(functionals(v, gs.params), gs.report);
}

/// λ^{1/2} φ(λ|x|) on the periodic line (even reflection of the radial
/// profile, cubic interpolation). λ = 1 embeds φ itself.
inline ComplexField embed_on_line(const GroundProfile& prof, const PeriodicGrid& g, double lambda = 1.0) {
  require(prof.dim == 1, ErrorKind::domain, "line embedding needs a one-dimensional profile");
  require(lambda > 0.0, ErrorKind::domain, "scaling factor must be > 0");
  const double amp = std::sqrt(lambda);
  std::vector<std::complex<double>> u(g.size());
  for (std::size_t j = 0; j < g.size(); ++j)
    u[j] = amp * static_cast<double>(prof.cubic_at(lambda * std::abs(g.x(j))));
  return ComplexField(g, std::move(u));
}

/// λ^{N/2} φ(λ r) on a radial evolution grid.
inline ComplexField embed_radial(const GroundProfile& prof, const RadialGrid& g, double lambda = 1.0) {
  require(lambda > 0.0, ErrorKind::domain, "scaling factor must be > 0");
  const double amp = std::pow(lambda, 0.5 * prof.dim);
  std::vector<std::complex<double>> u(g.size());
  for (std::size_t j = 0; j < g.size(); ++j)
    u[j] = amp * static_cast<double>(prof.cubic_at(lambda * g.node(j)));
  return ComplexField(g, prof.dim, std::move(u));
}

namespace detail {

inline void check_scaled_resolution(const GroundProfile& prof, double lambda, double spacing) {
  const double hw = half_width_nodes(std::span<const long double>(prof.values), 0, false) *
                    prof.grid.spacing() / lambda;
  require(hw / spacing >= kMinNodesAcrossHalfWidth, ErrorKind::resolution,
          "evolution grid does not resolve the compressed profile");
}

inline ComplexField checked_membership(ComplexField u, const GroundStateResult& gs) {
  const auto verdict = in_b_omega(u, gs);
  require(verdict.in_set, ErrorKind::membership, "scaled data failed the numerical B_omega check");
  return u;
}

inline void check_scaling(double lambda) {
  require(std::isfinite(lambda) && lambda > 1.0, ErrorKind::precondition,
          "scaled initial data needs lambda > 1");
}

}  // namespace detail

/// φ_ω^λ on the periodic line, verified to lie in B_ω.
inline ComplexField make_scaled_data(const GroundStateResult& gs, double lambda, const PeriodicGrid& g) {
  detail::check_scaling(lambda);
  detail::check_scaled_resolution(gs.profile, lambda, g.dx());
  return detail::checked_membership(embed_on_line(gs.profile, g, lambda), gs);
}

/// φ_ω^λ on a radial grid, verified to lie in B_ω.
inline ComplexField make_scaled_data(const GroundStateResult& gs, double lambda, const RadialGrid& g) {
  detail::check_scaling(lambda);
  detail::check_scaled_resolution(gs.profile, lambda, g.spacing());
  return detail::checked_membership(embed_radial(gs.profile, g, lambda), gs);
}

/// ||u - v||_{H^1} for fields on the same grid.
inline double h1_distance(const ComplexField& u, const ComplexField& v) {
  require(u.size() == v.size() && u.periodic() == v.periodic(), ErrorKind::domain,
          "H1 distance needs fields on the same grid");
  ComplexField d = u;
  for (std::size_t j = 0; j < d.size(); ++j) d.values[j] -= v.values[j];
  const auto r = functionals(d, Params::relaxed(d.dim, 0.0, 0.0, 1.0, 1.0, 1.0));
  return std::sqrt(r.mass + r.grad);
}

}  // namespace dpnls
