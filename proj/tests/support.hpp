#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <tuple>

#include "dpnls/error.hpp"
#include "dpnls/groundstate.hpp"

namespace dpnls::support {

/// Kind of the dpnls::Error thrown by f, or nullopt if none.
template <class F>
std::optional<ErrorKind> kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

/// Ground states are reused across tests in one binary.
inline const GroundStateResult& ground_state(double omega, int N = 1, double p = 3.0, double q = 7.0) {
  static std::map<std::tuple<double, int, double, double>, GroundStateResult> cache;
  const auto key = std::make_tuple(omega, N, p, q);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, solve_ground_state(Params::make(N, 1.0, 1.0, p, q, omega))).first;
  return it->second;
}

/// Root of ω s² = 2a/(p+1) s^{p+1} + 2b/(q+1) s^{q+1}: the 1D amplitude from
/// the first integral φ'² = ωφ² - 2a/(p+1) φ^{p+1} - 2b/(q+1) φ^{q+1}.
inline double first_integral_amplitude(double omega, double a = 1, double b = 1, double p = 3, double q = 7) {
  auto g = [&](double s) {
    return omega - 2 * a / (p + 1) * std::pow(s, p - 1) - 2 * b / (q + 1) * std::pow(s, q - 1);
  };
  double lo = 0.0, hi = 1.0;
  while (g(hi) > 0) hi *= 2;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) > 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace dpnls::support
