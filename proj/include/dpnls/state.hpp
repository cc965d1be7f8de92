#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <concepts>
#include <cstddef>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "dpnls/error.hpp"
#include "dpnls/grid.hpp"

namespace dpnls {

/// Real radial samples phi(r_j) of a radially symmetric function on R^dim.
template <std::floating_point Real = long double>
struct RadialProfile {
  using value_type = Real;

  RadialGrid grid;
  int dim = 1;
  std::vector<Real> values;

  RadialProfile(RadialGrid g, int d, std::vector<Real> v) : grid(g), dim(d), values(std::move(v)) {}

  static RadialProfile zeros(RadialGrid g, int d) {
    return RadialProfile(g, d, std::vector<Real>(g.size(), Real{0}));
  }

  /// Samples f(r_j).
  template <class F>
  static RadialProfile sample(RadialGrid g, int d, F&& f) {
    std::vector<Real> v(g.size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = static_cast<Real>(f(g.node(j)));
    return RadialProfile(g, d, std::move(v));
  }

  std::size_t size() const noexcept { return values.size(); }
  double radius(std::size_t j) const noexcept { return grid.node(j); }

  void validate() const {
    require(dim >= 1, ErrorKind::invalid_state, "radial profile needs dim >= 1");
    require(values.size() == grid.size(), ErrorKind::invalid_state,
            "radial profile node count does not match its grid");
    require(std::all_of(values.begin(), values.end(), [](Real x) { return std::isfinite(x); }),
            ErrorKind::invalid_state, "radial profile has non-finite samples");
  }

  bool is_zero() const {
    return std::all_of(values.begin(), values.end(), [](Real x) { return x == Real{0}; });
  }

  RadialProfile scaled_amplitude(Real mu) const {
    RadialProfile out = *this;
    for (auto& x : out.values) x *= mu;
    return out;
  }

  /// Piecewise-linear value at radius r; zero beyond rmax.
  Real linear_at(double r) const {
    r = std::abs(r);
    const double h = grid.spacing();
    const double s = r / h;
    const auto j = static_cast<std::size_t>(s);
    if (j + 1 >= values.size()) {
      return (j + 1 == values.size() && s == static_cast<double>(j)) ? values.back() : Real{0};
    }
    const Real t = static_cast<Real>(s - static_cast<double>(j));
    return (Real{1} - t) * values[j] + t * values[j + 1];
  }

  /// Four-point Lagrange value at radius r, using the even reflection across
  /// r = 0; zero beyond rmax.
  Real cubic_at(double r) const {
    r = std::abs(r);
    const double h = grid.spacing();
    const double s = r / h;
    const auto n = static_cast<long>(values.size());
    const auto j = static_cast<long>(std::floor(s));
    if (j >= n - 1) return j == n - 1 && s == static_cast<double>(j) ? values.back() : Real{0};
    auto at = [&](long k) -> Real {
      k = std::abs(k);
      return k < n ? values[static_cast<std::size_t>(k)] : Real{0};
    };
    const Real t = static_cast<Real>(s - static_cast<double>(j));
    const Real w0 = -t * (t - 1) * (t - 2) / 6;
    const Real w1 = (t + 1) * (t - 1) * (t - 2) / 2;
    const Real w2 = -(t + 1) * t * (t - 2) / 2;
    const Real w3 = (t + 1) * t * (t - 1) / 6;
    return w0 * at(j - 1) + w1 * at(j) + w2 * at(j + 1) + w3 * at(j + 2);
  }
};

/// Complex state used by the time evolution. Either a periodic 1D line or a
/// radial grid carrying its dimension.
struct ComplexField {
  std::variant<PeriodicGrid, RadialGrid> grid;
  int dim = 1;
  std::vector<std::complex<double>> values;

  ComplexField(PeriodicGrid g, std::vector<std::complex<double>> v)
      : grid(g), dim(1), values(std::move(v)) {}
  ComplexField(RadialGrid g, int d, std::vector<std::complex<double>> v)
      : grid(g), dim(d), values(std::move(v)) {}

  static ComplexField zeros(PeriodicGrid g) {
    return ComplexField(g, std::vector<std::complex<double>>(g.size()));
  }

  bool periodic() const noexcept { return std::holds_alternative<PeriodicGrid>(grid); }
  const PeriodicGrid& line() const { return std::get<PeriodicGrid>(grid); }
  const RadialGrid& radial() const { return std::get<RadialGrid>(grid); }
  std::size_t size() const noexcept { return values.size(); }

  std::size_t grid_size() const {
    return std::visit([](const auto& g) { return g.size(); }, grid);
  }

  void validate() const {
    require(dim >= 1, ErrorKind::invalid_state, "field needs dim >= 1");
    require(!periodic() || dim == 1, ErrorKind::invalid_state, "periodic fields are one-dimensional");
    require(values.size() == grid_size(), ErrorKind::invalid_state,
            "field node count does not match its grid");
    require(std::all_of(values.begin(), values.end(),
                        [](std::complex<double> z) {
                          return std::isfinite(z.real()) && std::isfinite(z.imag());
                        }),
            ErrorKind::invalid_state, "field has non-finite samples");
  }

  bool is_zero() const {
    return std::all_of(values.begin(), values.end(),
                       [](std::complex<double> z) { return z == std::complex<double>{}; });
  }

  ComplexField scaled_amplitude(double mu) const {
    ComplexField out = *this;
    for (auto& z : out.values) z *= mu;
    return out;
  }

  double sup_amplitude() const {
    double m = 0.0;
    for (auto z : values) m = std::max(m, std::abs(z));
    return m;
  }
};

}  // namespace dpnls
