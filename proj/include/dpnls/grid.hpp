#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>

#include "dpnls/error.hpp"

namespace dpnls {

/// Uniform radial nodes r_j = j * spacing, j = 0..n-1, spanning [0, rmax].
class RadialGrid {
 public:
  RadialGrid(double rmax, std::size_t n) : rmax_(rmax), n_(n) {
    require(std::isfinite(rmax) && rmax > 0.0, ErrorKind::domain, "radial grid needs rmax > 0");
    require(n >= 2, ErrorKind::domain, "radial grid needs at least 2 nodes");
  }

  /// Default ground-state grid: rmax = 25/sqrt(omega), spacing 5e-4/sqrt(omega).
  static RadialGrid for_omega(double omega, std::size_t n = 50001) {
    require(omega > 0.0, ErrorKind::domain, "omega must be positive");
    return RadialGrid(25.0 / std::sqrt(omega), n);
  }

  double rmax() const noexcept { return rmax_; }
  std::size_t size() const noexcept { return n_; }
  double spacing() const noexcept { return rmax_ / static_cast<double>(n_ - 1); }
  double node(std::size_t j) const noexcept { return static_cast<double>(j) * spacing(); }

  /// Same spacing, extra nodes appended.
  RadialGrid extended(std::size_t extra) const {
    return RadialGrid(spacing() * static_cast<double>(n_ - 1 + extra), n_ + extra);
  }

  friend bool operator==(const RadialGrid&, const RadialGrid&) = default;

 private:
  double rmax_;
  std::size_t n_;
};

/// Periodic line [-L/2, L/2) with m nodes; x_j = -L/2 + j*dx so x_{m/2} = 0.
class PeriodicGrid {
 public:
  PeriodicGrid(double length, std::size_t m) : length_(length), m_(m) {
    require(std::isfinite(length) && length > 0.0, ErrorKind::domain, "periodic grid needs L > 0");
    require(m >= 4 && m % 2 == 0, ErrorKind::domain, "periodic grid needs an even node count >= 4");
  }

  double length() const noexcept { return length_; }
  std::size_t size() const noexcept { return m_; }
  double dx() const noexcept { return length_ / static_cast<double>(m_); }
  double x(std::size_t j) const noexcept {
    return -0.5 * length_ + static_cast<double>(j) * dx();
  }

  /// Angular wavenumber of FFT bin j in standard (unshifted) ordering.
  double wavenumber(std::size_t j) const noexcept {
    const auto m = static_cast<long>(m_);
    long s = static_cast<long>(j);
    if (s >= m / 2) s -= m;
    return 2.0 * std::numbers::pi * static_cast<double>(s) / length_;
  }

  friend bool operator==(const PeriodicGrid&, const PeriodicGrid&) = default;

 private:
  double length_;
  std::size_t m_;
};

/// Surface area of the unit sphere S^{N-1}; 2 for N = 1 (the two points ±1).
inline double unit_sphere_area(int N) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * N) / std::tgamma(0.5 * N);
}

}  // namespace dpnls
