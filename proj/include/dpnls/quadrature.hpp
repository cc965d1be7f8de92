#pragma once

#include <cmath>
#include <complex>
#include <concepts>
#include <span>

#include "dpnls/error.hpp"
#include "dpnls/grid.hpp"
#include "dpnls/state.hpp"

namespace dpnls {

/// Composite trapezoid weight of node j for sigma_N * int_0^rmax f(r) r^{N-1} dr.
inline long double radial_weight(const RadialGrid& g, int dim, std::size_t j) {
  const long double h = g.spacing();
  const long double r = static_cast<long double>(j) * h;
  long double w = (j == 0 || j + 1 == g.size()) ? h / 2 : h;
  if (dim > 1) w *= std::pow(r, static_cast<long double>(dim - 1));
  return w * static_cast<long double>(unit_sphere_area(dim));
}

/// int_{R^dim} f dx for a radial function sampled on g.
template <class T>
long double integrate(const RadialGrid& g, int dim, std::span<const T> f) {
  require(f.size() == g.size(), ErrorKind::invalid_state, "sample count does not match grid");
  long double acc = 0;
  for (std::size_t j = 0; j < f.size(); ++j) {
    const auto v = static_cast<long double>(f[j]);
    require(std::isfinite(v), ErrorKind::invalid_state, "non-finite sample in quadrature");
    acc += radial_weight(g, dim, j) * v;
  }
  return acc;
}

/// Uniform-weight rule on the periodic line (trapezoid for periodic data).
template <class T>
long double integrate(const PeriodicGrid& g, std::span<const T> f) {
  require(f.size() == g.size(), ErrorKind::invalid_state, "sample count does not match grid");
  long double acc = 0;
  for (const T& x : f) {
    const auto v = static_cast<long double>(x);
    require(std::isfinite(v), ErrorKind::invalid_state, "non-finite sample in quadrature");
    acc += v;
  }
  return acc * static_cast<long double>(g.dx());
}

template <std::floating_point Real>
Real quadrature(const RadialProfile<Real>& v) {
  v.validate();
  return static_cast<Real>(integrate(v.grid, v.dim, std::span<const Real>(v.values)));
}

/// Integral of a complex field (real and imaginary parts separately).
inline std::complex<double> quadrature(const ComplexField& v) {
  v.validate();
  std::vector<double> re(v.size()), im(v.size());
  for (std::size_t j = 0; j < v.size(); ++j) {
    re[j] = v.values[j].real();
    im[j] = v.values[j].imag();
  }
  if (v.periodic()) {
    return {static_cast<double>(integrate(v.line(), std::span<const double>(re))),
            static_cast<double>(integrate(v.line(), std::span<const double>(im)))};
  }
  return {static_cast<double>(integrate(v.radial(), v.dim, std::span<const double>(re))),
          static_cast<double>(integrate(v.radial(), v.dim, std::span<const double>(im)))};
}

}  // namespace dpnls
