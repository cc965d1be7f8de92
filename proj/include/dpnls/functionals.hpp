#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <concepts>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "dpnls/error.hpp"
#include "dpnls/fft.hpp"
#include "dpnls/params.hpp"
#include "dpnls/quadrature.hpp"
#include "dpnls/state.hpp"

namespace dpnls {

/// Every scalar functional of one state. The first four fields are the raw
/// norms; the rest are derived from them and the equation parameters.
struct FunctionalReport {
  double mass = 0;    ///< ||v||_2^2
  double grad = 0;    ///< ||∇v||_2^2
  double lp = 0;      ///< ||v||_{p+1}^{p+1}
  double lq = 0;      ///< ||v||_{q+1}^{q+1}
  double energy = 0;  ///< E(v)
  double action = 0;  ///< S_ω(v) = E(v) + ω/2 ||v||_2^2
  double nehari = 0;  ///< K_ω(v) = ∂_μ S_ω(μv) at μ = 1
  double virial = 0;  ///< Q(v) = ∂_λ S_ω(v^λ) at λ = 1
  double bigf = 0;    ///< F(v), with S_ω = K_ω/2 + F/2
  double d2s = 0;     ///< ∂²_λ S_ω(v^λ) at λ = 1

  /// (name, value) pairs in declaration order, for flat exports.
  std::vector<std::pair<std::string_view, double>> fields() const {
    return {{"mass", mass},     {"grad", grad},     {"lp", lp},         {"lq", lq},
            {"energy", energy}, {"action", action}, {"nehari", nehari}, {"virial", virial},
            {"bigf", bigf},     {"d2s", d2s}};
  }
};

inline FunctionalReport report_from_norms(double mass, double grad, double lp, double lq,
                                          const Params& prm) {
  const double a = prm.a(), b = prm.b(), p = prm.p(), q = prm.q();
  const double al = prm.alpha(), be = prm.beta();
  const double cp = a / (p + 1.0), cq = b / (q + 1.0);
  FunctionalReport r;
  r.mass = mass;
  r.grad = grad;
  r.lp = lp;
  r.lq = lq;
  r.energy = 0.5 * grad - cp * lp - cq * lq;
  r.action = r.energy + 0.5 * prm.omega() * mass;
  r.nehari = grad + prm.omega() * mass - a * lp - b * lq;
  r.virial = grad - cp * al * lp - cq * be * lq;
  r.bigf = cp * (p - 1.0) * lp + cq * (q - 1.0) * lq;
  r.d2s = grad - cp * al * (al - 1.0) * lp - cq * be * (be - 1.0) * lq;
  for (auto [name, v] : r.fields()) {
    require(std::isfinite(v), ErrorKind::invalid_state,
            "non-finite functional value: " + std::string(name));
  }
  return r;
}

/// Report of v^λ(x) = λ^{N/2} v(λx) from the report of v, using the exact
/// λ-dependence of each norm (λ², λ^α, λ^β; the mass is invariant).
inline FunctionalReport scaled_report(const FunctionalReport& base, const Params& prm, double lambda) {
  require(std::isfinite(lambda) && lambda > 0.0, ErrorKind::domain, "scaling factor must be > 0");
  return report_from_norms(base.mass, lambda * lambda * base.grad,
                           std::pow(lambda, prm.alpha()) * base.lp,
                           std::pow(lambda, prm.beta()) * base.lq, prm);
}

namespace detail {

template <class T>
long double modulus(const T& v) {
  if constexpr (std::floating_point<T>) {
    return std::abs(static_cast<long double>(v));
  } else {
    return std::hypot(static_cast<long double>(v.real()), static_cast<long double>(v.imag()));
  }
}

template <class T>
long double diff_sq(const T& x, const T& y) {
  if constexpr (std::floating_point<T>) {
    const long double d = static_cast<long double>(x) - static_cast<long double>(y);
    return d * d;
  } else {
    const long double dr = static_cast<long double>(x.real()) - y.real();
    const long double di = static_cast<long double>(x.imag()) - y.imag();
    return dr * dr + di * di;
  }
}

struct Norms {
  long double mass = 0, grad = 0, lp = 0, lq = 0;
};

/// Norms on a radial grid: trapezoid rule for the L^r norms, face-centred
/// differences for the gradient (the summation-by-parts partner of the
/// conservative radial Laplacian used by the ground-state solver).
template <class T>
Norms radial_norms(const RadialGrid& g, int dim, std::span<const T> v, double p, double q) {
  Norms n;
  const long double sigma = unit_sphere_area(dim);
  const long double h = g.spacing();
  const long double lp_exp = p + 1.0L, lq_exp = q + 1.0L;
  for (std::size_t j = 0; j < v.size(); ++j) {
    const long double w = radial_weight(g, dim, j);
    const long double m = modulus(v[j]);
    n.mass += w * m * m;
    if (m > 0) {
      n.lp += w * std::pow(m, lp_exp);
      n.lq += w * std::pow(m, lq_exp);
    }
    if (j + 1 < v.size()) {
      const long double rf = (static_cast<long double>(j) + 0.5L) * h;
      const long double area = dim > 1 ? std::pow(rf, static_cast<long double>(dim - 1)) : 1.0L;
      n.grad += area * diff_sq(v[j + 1], v[j]) / h;
    }
  }
  n.grad *= sigma;
  return n;
}

/// Norms on the periodic line; the gradient is spectral.
inline Norms periodic_norms(const PeriodicGrid& g, std::span<const std::complex<double>> v, double p,
                            double q, Fft1d* fft = nullptr) {
  Norms n;
  const long double dx = g.dx();
  const long double lp_exp = p + 1.0L, lq_exp = q + 1.0L;
  for (auto z : v) {
    const long double m = modulus(z);
    n.mass += m * m;
    if (m > 0) {
      n.lp += std::pow(m, lp_exp);
      n.lq += std::pow(m, lq_exp);
    }
  }
  n.mass *= dx;
  n.lp *= dx;
  n.lq *= dx;

  std::vector<std::complex<double>> spec(v.begin(), v.end());
  if (fft != nullptr) {
    fft->forward(spec);
  } else {
    Fft1d local(v.size());
    local.forward(spec);
  }
  long double acc = 0;
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const long double kk = g.wavenumber(k);
    acc += kk * kk * std::norm(spec[k]);
  }
  n.grad = acc * dx / static_cast<long double>(v.size());
  return n;
}

}  // namespace detail

template <std::floating_point Real>
FunctionalReport functionals(const RadialProfile<Real>& v, const Params& prm) {
  v.validate();
  const auto n = detail::radial_norms(v.grid, v.dim, std::span<const Real>(v.values), prm.p(), prm.q());
  return report_from_norms(static_cast<double>(n.mass), static_cast<double>(n.grad),
                           static_cast<double>(n.lp), static_cast<double>(n.lq), prm);
}

inline FunctionalReport functionals(const ComplexField& v, const Params& prm, Fft1d* fft = nullptr) {
  v.validate();
  const std::span<const std::complex<double>> s(v.values);
  const auto n = v.periodic() ? detail::periodic_norms(v.line(), s, prm.p(), prm.q(), fft)
                              : detail::radial_norms(v.radial(), v.dim, s, prm.p(), prm.q());
  return report_from_norms(static_cast<double>(n.mass), static_cast<double>(n.grad),
                           static_cast<double>(n.lp), static_cast<double>(n.lq), prm);
}

/// One point of the curve λ -> (S_ω(v^λ), Q(v^λ)).
struct ScalingPoint {
  double lambda;
  double action;
  double virial;
};

/// Samples the scaling curve from one base report. Q(v^λ) = λ ∂_λ S_ω(v^λ)
/// holds by construction.
inline std::vector<ScalingPoint> s_along_scaling(const FunctionalReport& base, const Params& prm,
                                                 std::span<const double> lambdas) {
  require(!lambdas.empty(), ErrorKind::domain, "scaling curve needs at least one lambda");
  require(std::is_sorted(lambdas.begin(), lambdas.end()), ErrorKind::domain,
          "scaling factors must be sorted");
  std::vector<ScalingPoint> out;
  out.reserve(lambdas.size());
  for (double l : lambdas) {
    const auto r = scaled_report(base, prm, l);
    out.push_back({l, r.action, r.virial});
  }
  return out;
}

template <std::floating_point Real>
std::vector<ScalingPoint> s_along_scaling(const RadialProfile<Real>& v, const Params& prm,
                                          std::span<const double> lambdas) {
  return s_along_scaling(functionals(v, prm), prm, lambdas);
}

inline std::vector<ScalingPoint> s_along_scaling(const ComplexField& v, const Params& prm,
                                                 std::span<const double> lambdas) {
  return s_along_scaling(functionals(v, prm), prm, lambdas);
}

/// Minimum number of nodes required across the half-width of a rescaled state.
inline constexpr double kMinNodesAcrossHalfWidth = 8.0;

namespace detail {

/// Distance from the peak to the first point where |v| falls to half the peak.
template <class T>
double half_width_nodes(std::span<const T> v, std::size_t peak, bool both_sides) {
  const long double top = modulus(v[peak]);
  if (top == 0) return INFINITY;
  double best = INFINITY;
  for (std::size_t k = peak; k < v.size(); ++k) {
    if (modulus(v[k]) <= top / 2) {
      best = static_cast<double>(k - peak);
      break;
    }
  }
  if (both_sides) {
    for (std::size_t k = peak + 1; k-- > 0;) {
      if (modulus(v[k]) <= top / 2) {
        best = std::min(best, static_cast<double>(peak - k));
        break;
      }
    }
  }
  return best;
}

template <class T>
std::size_t argmax_modulus(std::span<const T> v) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < v.size(); ++k)
    if (modulus(v[k]) > modulus(v[best])) best = k;
  return best;
}

inline void check_lambda(double lambda) {
  require(std::isfinite(lambda) && lambda > 0.0, ErrorKind::domain, "scaling factor must be > 0");
}

}  // namespace detail

/// v^λ(x) = λ^{N/2} v(λx) resampled by linear interpolation (zero beyond the
/// grid). For λ < 1 the grid is extended at fixed spacing so the spread-out
/// support is kept.
template <std::floating_point Real>
RadialProfile<Real> scale_field(const RadialProfile<Real>& v, double lambda,
                                double min_nodes = kMinNodesAcrossHalfWidth) {
  v.validate();
  detail::check_lambda(lambda);
  if (lambda == 1.0) return v;
  RadialGrid g = v.grid;
  if (lambda < 1.0) {
    const auto extra = static_cast<std::size_t>(
        std::ceil(static_cast<double>(g.size() - 1) * (1.0 / lambda - 1.0)));
    g = g.extended(extra);
  }
  const Real amp = std::pow(static_cast<Real>(lambda), static_cast<Real>(v.dim) / 2);
  auto out = RadialProfile<Real>::sample(g, v.dim, [&](double r) { return amp * v.linear_at(lambda * r); });
  const double hw = detail::half_width_nodes(std::span<const Real>(v.values), 0, false) / lambda;
  require(!(hw < min_nodes), ErrorKind::resolution,
          "rescaled profile is unresolved: fewer than the minimum nodes across its half-width");
  return out;
}

inline ComplexField scale_field(const ComplexField& v, double lambda,
                                double min_nodes = kMinNodesAcrossHalfWidth) {
  v.validate();
  detail::check_lambda(lambda);
  if (lambda == 1.0) return v;
  const std::span<const std::complex<double>> src(v.values);
  const std::size_t peak = detail::argmax_modulus(src);
  const double hw = detail::half_width_nodes(src, peak, v.periodic()) / lambda;
  require(!(hw < min_nodes), ErrorKind::resolution,
          "rescaled field is unresolved: fewer than the minimum nodes across its half-width");

  if (v.periodic()) {
    const PeriodicGrid& g0 = v.line();
    std::size_t m = g0.size();
    if (lambda < 1.0) {
      m = static_cast<std::size_t>(std::ceil(static_cast<double>(m) / lambda));
      m += m % 2;
    }
    const PeriodicGrid g(g0.dx() * static_cast<double>(m), m);
    const double amp = std::sqrt(lambda);
    std::vector<std::complex<double>> out(m);
    for (std::size_t j = 0; j < m; ++j) {
      const double s = (lambda * g.x(j) + 0.5 * g0.length()) / g0.dx();
      const double fl = std::floor(s);
      if (fl < 0.0 || fl + 1.0 > static_cast<double>(g0.size() - 1)) continue;
      const auto k = static_cast<std::size_t>(fl);
      const double t = s - fl;
      out[j] = amp * ((1.0 - t) * v.values[k] + t * v.values[k + 1]);
    }
    return ComplexField(g, std::move(out));
  }

  RadialGrid g = v.radial();
  if (lambda < 1.0) {
    const auto extra = static_cast<std::size_t>(
        std::ceil(static_cast<double>(g.size() - 1) * (1.0 / lambda - 1.0)));
    g = g.extended(extra);
  }
  const double amp = std::pow(lambda, 0.5 * v.dim);
  const double h0 = v.radial().spacing();
  std::vector<std::complex<double>> out(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double s = lambda * g.node(j) / h0;
    const auto k = static_cast<std::size_t>(s);
    if (k + 1 >= v.size()) continue;
    const double t = s - static_cast<double>(k);
    out[j] = amp * ((1.0 - t) * v.values[k] + t * v.values[k + 1]);
  }
  return ComplexField(g, v.dim, std::move(out));
}

}  // namespace dpnls
