#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <sstream>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "dpnls/error.hpp"
#include "dpnls/functionals.hpp"
#include "dpnls/grid.hpp"
#include "dpnls/params.hpp"
#include "dpnls/state.hpp"

namespace dpnls {

using GroundProfile = RadialProfile<long double>;

struct SolverConfig {
  double tol = 1e-8;             ///< sup-norm residual accepted from the Newton polish
  double identity_tol = 1e-6;    ///< |K_ω|, |Q| <= identity_tol * S_ω
  double ode_rtol = 1e-10;       ///< shooting integrator relative tolerance
  double ode_atol = 1e-14;
  double bracket_scale = 16.0;   ///< amplitude scan covers (s0, bracket_scale * s0]
  int scan_points = 64;
  int max_bisections = 200;
  int max_newton = 60;
  double tail_ratio = 1e-10;     ///< required phi(rmax) / phi(0)
  int max_extensions = 20;       ///< 10% grid extensions allowed to reach tail_ratio
  double max_spacing_width = 0.1;  ///< spacing * sqrt(omega) must not exceed this
};

/// Amplitude interval of the scan containing the first undershoot -> overshoot
/// transition, and the number of transitions seen over the whole scan.
struct ShootingBracket {
  double lo = 0;
  double hi = 0;
  int scan_sign_changes = 0;
  double amplitude = 0;  ///< converged shooting amplitude
};

struct GroundStateResult {
  GroundProfile profile;
  Params params;
  FunctionalReport report;
  double residual = 0;
  double decay_rate = 0;
  double tol = 1e-8;
  double identity_tol = 1e-6;
  ShootingBracket bracket;

  double amplitude() const { return static_cast<double>(profile.values.front()); }

  bool certified() const {
    const double s = report.action;
    return residual <= tol && s > 0.0 && std::abs(report.nehari) <= identity_tol * s &&
           std::abs(report.virial) <= identity_tol * s && decay_rate > 0.0;
  }
};

namespace shooting {

/// Outcome of one shot: undershoot (+1, phi' turns positive while phi > 0)
/// or overshoot (-1, phi crosses zero).
enum class Shot { undershoot = 1, overshoot = -1 };

inline int sign(Shot s) { return static_cast<int>(s); }

using OdeState = std::array<double, 2>;

struct RadialOde {
  Params prm;
  void operator()(const OdeState& x, OdeState& dxdr, double r) const {
    const double phi = x[0];
    const double m = std::abs(phi);
    const double force = prm.omega() * phi - prm.a() * std::pow(m, prm.p() - 1.0) * phi -
                         prm.b() * std::pow(m, prm.q() - 1.0) * phi;
    dxdr[0] = x[1];
    dxdr[1] = force - (r > 0.0 ? (prm.N() - 1) / r * x[1] : 0.0);
  }
};

/// Smallest positive s with omega = a s^{p-1} + b s^{q-1}: below it the
/// potential force pushes the trajectory up, so shooting amplitudes start here.
inline double force_root(const Params& prm) {
  auto f = [&](double s) {
    return prm.a() * std::pow(s, prm.p() - 1.0) + prm.b() * std::pow(s, prm.q() - 1.0) - prm.omega();
  };
  double lo = 0.0, hi = 1.0;
  while (f(hi) < 0.0) hi *= 2.0;
  for (int i = 0; i < 200 && hi - lo > 1e-16 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Start of integration. N = 1 starts at r = 0; otherwise a short series step
/// phi = A + c r^2 / 2 with c = force(A) / N avoids the 1/r singularity.
inline std::pair<double, OdeState> initial_point(const Params& prm, double amplitude) {
  const double force = prm.omega() * amplitude - prm.a() * std::pow(amplitude, prm.p()) -
                       prm.b() * std::pow(amplitude, prm.q());
  if (prm.N() == 1) return {0.0, {amplitude, 0.0}};
  const double r0 = 1e-6 / std::sqrt(prm.omega());
  const double c = force / prm.N();
  return {r0, {amplitude + 0.5 * c * r0 * r0, c * r0}};
}

template <class Observer>
Shot integrate(const Params& prm, double amplitude, double rmax, const SolverConfig& cfg,
               Observer&& observe) {
  namespace ode = boost::numeric::odeint;
  auto stepper = ode::make_dense_output(cfg.ode_atol, cfg.ode_rtol, ode::runge_kutta_dopri5<OdeState>());
  auto [r0, x0] = initial_point(prm, amplitude);
  const double k = std::sqrt(prm.omega());
  stepper.initialize(x0, r0, 1e-3 / k);
  const RadialOde rhs{prm};
  while (true) {
    stepper.do_step(rhs);
    const OdeState& x = stepper.current_state();
    const double r = stepper.current_time();
    if (!observe(stepper)) {
      return x[1] + k * x[0] > 0.0 ? Shot::undershoot : Shot::overshoot;
    }
    if (x[0] <= 0.0) return Shot::overshoot;
    if (x[1] > 0.0) return Shot::undershoot;
    if (r >= rmax) {
      // Ran out of room without an event: the growing mode's sign decides.
      return x[1] + k * x[0] > 0.0 ? Shot::undershoot : Shot::overshoot;
    }
  }
}

inline Shot shoot(const Params& prm, double amplitude, double rmax, const SolverConfig& cfg) {
  return integrate(prm, amplitude, rmax, cfg, [](const auto&) { return true; });
}

struct ScanResult {
  double lo = 0, hi = 0;
  int sign_changes = 0;
  bool found = false;
};

inline ScanResult scan(const Params& prm, double rmax, const SolverConfig& cfg) {
  const double s0 = force_root(prm);
  const double top = cfg.bracket_scale * s0;
  ScanResult out;
  double prev_a = s0;
  int prev = sign(shoot(prm, s0, rmax, cfg));
  for (int i = 1; i <= cfg.scan_points; ++i) {
    const double amp = s0 + (top - s0) * static_cast<double>(i) / cfg.scan_points;
    const int s = sign(shoot(prm, amp, rmax, cfg));
    if (s != prev) {
      ++out.sign_changes;
      if (!out.found && prev > 0 && s < 0) {
        out.lo = prev_a;
        out.hi = amp;
        out.found = true;
      }
    }
    prev = s;
    prev_a = amp;
  }
  return out;
}

}  // namespace shooting

namespace detail {

inline long double nonlinear_force(long double phi, const Params& prm) {
  const long double m = std::abs(phi);
  return prm.omega() * phi - prm.a() * std::pow(m, static_cast<long double>(prm.p() - 1.0)) * phi -
         prm.b() * std::pow(m, static_cast<long double>(prm.q() - 1.0)) * phi;
}

inline long double nonlinear_force_derivative(long double phi, const Params& prm) {
  const long double m = std::abs(phi);
  return prm.omega() - prm.a() * prm.p() * std::pow(m, static_cast<long double>(prm.p() - 1.0)) -
         prm.b() * prm.q() * std::pow(m, static_cast<long double>(prm.q() - 1.0));
}

/// Face weights r_{j±1/2}^{N-1} / (h^2 r_j^{N-1}) of the conservative radial
/// Laplacian at node j >= 1.
struct Stencil {
  long double lower, upper;
};

inline Stencil laplacian_stencil(std::size_t j, long double h, int dim) {
  if (dim == 1) return {1 / (h * h), 1 / (h * h)};
  const long double r = static_cast<long double>(j) * h;
  const long double e = dim - 1;
  const long double scale = 1 / (h * h * std::pow(r, e));
  return {std::pow(r - h / 2, e) * scale, std::pow(r + h / 2, e) * scale};
}

/// Residual -Δ_r phi + omega phi - a phi^p - b phi^q at node j < n-1; node 0
/// uses the regularized form N * phi''(0) ~ 2N (phi_1 - phi_0) / h^2.
template <class Real>
long double stationary_residual(std::span<const Real> phi, std::size_t j, long double h, int dim,
                                const Params& prm) {
  const long double c = phi[j];
  long double lap;
  if (j == 0) {
    lap = 2.0L * dim * (static_cast<long double>(phi[1]) - c) / (h * h);
  } else {
    const auto st = laplacian_stencil(j, h, dim);
    lap = st.upper * (static_cast<long double>(phi[j + 1]) - c) -
          st.lower * (c - static_cast<long double>(phi[j - 1]));
  }
  return -lap + nonlinear_force(c, prm);
}

/// exp(-sqrt(omega) h) (r_{n-2}/r_{n-1})^{(N-1)/2}: ratio of consecutive
/// samples of the decaying far-field solution.
inline long double far_field_ratio(const RadialGrid& g, int dim, double omega) {
  const long double h = g.spacing();
  const long double r1 = static_cast<long double>(g.size() - 2) * h;
  const long double r2 = static_cast<long double>(g.size() - 1) * h;
  long double c = std::exp(-std::sqrt(static_cast<long double>(omega)) * h);
  if (dim > 1) c *= std::pow(r1 / r2, (dim - 1) / 2.0L);
  return c;
}

/// Solves the tridiagonal system in place (Thomas algorithm).
inline void solve_tridiagonal(std::vector<long double>& lower, std::vector<long double>& diag,
                              std::vector<long double>& upper, std::vector<long double>& rhs) {
  const std::size_t n = diag.size();
  for (std::size_t j = 1; j < n; ++j) {
    const long double w = lower[j] / diag[j - 1];
    diag[j] -= w * upper[j - 1];
    rhs[j] -= w * rhs[j - 1];
  }
  rhs[n - 1] /= diag[n - 1];
  for (std::size_t j = n - 1; j-- > 0;) rhs[j] = (rhs[j] - upper[j] * rhs[j + 1]) / diag[j];
}

struct NewtonOutcome {
  long double residual = 0;
  int iterations = 0;
};

/// Newton iteration on the discrete stationary equation with the far-field
/// closure row phi_{n-1} = c phi_{n-2}.
inline NewtonOutcome newton_polish(GroundProfile& prof, const Params& prm, const SolverConfig& cfg) {
  const std::size_t n = prof.size();
  const long double h = prof.grid.spacing();
  const int dim = prof.dim;
  const long double closure = far_field_ratio(prof.grid, dim, prm.omega());
  std::vector<long double> lower(n), diag(n), upper(n), rhs(n);
  auto& phi = prof.values;
  NewtonOutcome out;
  const long double target = static_cast<long double>(cfg.tol) * 1e-3L;
  for (int it = 0; it < cfg.max_newton; ++it) {
    long double res = 0;
    for (std::size_t j = 0; j + 1 < n; ++j) {
      rhs[j] = stationary_residual(std::span<const long double>(phi), j, h, dim, prm);
      res = std::max(res, std::abs(rhs[j]));
      const long double dg = nonlinear_force_derivative(phi[j], prm);
      if (j == 0) {
        lower[0] = 0;
        diag[0] = 2.0L * dim / (h * h) + dg;
        upper[0] = -2.0L * dim / (h * h);
      } else {
        const auto st = laplacian_stencil(j, h, dim);
        lower[j] = -st.lower;
        upper[j] = -st.upper;
        diag[j] = st.lower + st.upper + dg;
      }
    }
    rhs[n - 1] = phi[n - 1] - closure * phi[n - 2];
    lower[n - 1] = -closure;
    diag[n - 1] = 1;
    upper[n - 1] = 0;
    out.residual = res;
    out.iterations = it;
    solve_tridiagonal(lower, diag, upper, rhs);
    long double step = 0, scale = 0;
    for (std::size_t j = 0; j < n; ++j) {
      step = std::max(step, std::abs(rhs[j]));
      scale = std::max(scale, std::abs(phi[j]));
      phi[j] -= rhs[j];
    }
    if (!std::isfinite(step)) fail(ErrorKind::convergence, "Newton polish diverged");
    if (res <= target && step <= 1e-15L * scale) break;
  }
  long double res = 0;
  for (std::size_t j = 0; j + 1 < n; ++j)
    res = std::max(res, std::abs(stationary_residual(std::span<const long double>(phi), j, h, dim, prm)));
  out.residual = res;
  return out;
}

/// Samples the shooting trajectory at `amplitude` onto the grid down to
/// cut * amplitude, then continues with the decaying far-field form.
inline GroundProfile initial_profile(const Params& prm, const RadialGrid& g, double amplitude,
                                     const SolverConfig& cfg) {
  const std::size_t n = g.size();
  const int dim = prm.N();
  const double k = std::sqrt(prm.omega());
  const double cut = 1e-5 * amplitude;
  std::vector<long double> v(n, 0.0L);
  std::size_t next = 0;
  bool stop = false;
  auto [r0, x0] = shooting::initial_point(prm, amplitude);
  while (next < n && g.node(next) <= r0) v[next++] = x0[0];
  shooting::integrate(prm, amplitude, g.rmax(), cfg, [&](const auto& stepper) {
    shooting::OdeState x;
    while (!stop && next < n && g.node(next) <= stepper.current_time()) {
      stepper.calc_state(g.node(next), x);
      if (x[0] < cut || x[1] > 0.0) {
        stop = true;
        break;
      }
      v[next++] = x[0];
    }
    return !stop && next < n;
  });
  require(next >= 2, ErrorKind::convergence, "shooting trajectory too short to seed the profile");
  const double rc = g.node(next - 1);
  const long double vc = v[next - 1];
  for (std::size_t j = next; j < n; ++j) {
    const double r = g.node(j);
    long double val = vc * std::exp(-k * (r - rc));
    if (dim > 1) val *= std::pow(rc / r, (dim - 1) / 2.0);
    v[j] = val;
  }
  return GroundProfile(g, dim, std::move(v));
}

/// Appends nodes continuing the far-field decay from the current last sample.
inline GroundProfile extend_profile(const GroundProfile& prof, std::size_t extra, double omega) {
  const RadialGrid g = prof.grid.extended(extra);
  std::vector<long double> v = prof.values;
  const long double ratio = far_field_ratio(g, prof.dim, omega);
  v.reserve(g.size());
  for (std::size_t j = prof.size(); j < g.size(); ++j) v.push_back(v.back() * ratio);
  return GroundProfile(g, prof.dim, std::move(v));
}

}  // namespace detail

/// Sup over nodes j = 0..n-2 of the second-order finite-difference residual of
/// the stationary equation (the last node is the far-field boundary).
template <std::floating_point Real>
double residual_norm(const RadialProfile<Real>& prof, const Params& prm) {
  prof.validate();
  require(prof.size() >= 5, ErrorKind::invalid_state, "residual needs at least 5 nodes");
  long double res = 0;
  const long double h = prof.grid.spacing();
  for (std::size_t j = 0; j + 1 < prof.size(); ++j) {
    res = std::max(res, std::abs(detail::stationary_residual(std::span<const Real>(prof.values), j, h,
                                                             prof.dim, prm)));
  }
  return static_cast<double>(res);
}

template <std::floating_point Real>
bool is_nontrivial(const RadialProfile<Real>& prof) {
  return !prof.is_zero();
}

/// Negated least-squares slope of log(phi) over the last 20% of nodes.
template <std::floating_point Real>
double decay_fit(const RadialProfile<Real>& prof, double omega) {
  prof.validate();
  (void)omega;
  const std::size_t n = prof.size();
  const std::size_t start = n - std::max<std::size_t>(2, n / 5);
  long double sr = 0, sy = 0, srr = 0, sry = 0;
  long double cnt = 0;
  for (std::size_t j = start; j < n; ++j) {
    const long double v = prof.values[j];
    require(v > 0, ErrorKind::tail_contaminated, "tail window contains nonpositive values");
    const long double r = prof.radius(j);
    const long double y = std::log(v);
    sr += r;
    sy += y;
    srr += r * r;
    sry += r * y;
    cnt += 1;
  }
  const long double slope = (cnt * sry - sr * sy) / (cnt * srr - sr * sr);
  return static_cast<double>(-slope);
}

/// Radial positive ground state by amplitude shooting with bisection, then a
/// Newton polish of the discrete equation, then certification by K_ω = Q = 0.
inline GroundStateResult solve_ground_state(const Params& prm, const RadialGrid& grid,
                                            const SolverConfig& cfg) {
  require(prm.strict(), ErrorKind::validation, "ground-state solver needs validated parameters");
  const double k = std::sqrt(prm.omega());
  require(grid.spacing() * k <= cfg.max_spacing_width, ErrorKind::resolution,
          "radial grid spacing does not resolve the width scale 1/sqrt(omega)");
  require(grid.size() >= 5, ErrorKind::resolution, "radial grid needs at least 5 nodes");

  const auto sc = shooting::scan(prm, grid.rmax(), cfg);
  if (!sc.found) {
    std::ostringstream msg;
    msg << "no undershoot/overshoot transition for amplitudes in (" << shooting::force_root(prm)
        << ", " << cfg.bracket_scale * shooting::force_root(prm) << "]";
    fail(ErrorKind::no_ground_state_bracket, msg.str());
  }
  double lo = sc.lo, hi = sc.hi;
  for (int i = 0; i < cfg.max_bisections; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (shooting::shoot(prm, mid, grid.rmax(), cfg) == shooting::Shot::undershoot ? lo : hi) = mid;
  }

  GroundProfile prof = detail::initial_profile(prm, grid, lo, cfg);
  detail::NewtonOutcome nw = detail::newton_polish(prof, prm, cfg);
  for (int ext = 0; ext < cfg.max_extensions; ++ext) {
    if (prof.values.back() < static_cast<long double>(cfg.tail_ratio) * prof.values.front()) break;
    prof = detail::extend_profile(prof, std::max<std::size_t>(1, prof.size() / 10), prm.omega());
    nw = detail::newton_polish(prof, prm, cfg);
  }

  if (!(nw.residual <= cfg.tol)) {
    std::ostringstream msg;
    msg << "stationary residual " << static_cast<double>(nw.residual) << " above tolerance " << cfg.tol;
    fail(ErrorKind::convergence, msg.str());
  }
  const auto& v = prof.values;
  for (std::size_t j = 0; j < v.size(); ++j) {
    require(v[j] > 0 && (j == 0 || v[j] < v[j - 1]), ErrorKind::convergence,
            "polished profile is not positive and strictly decreasing");
  }
  require(v.back() < static_cast<long double>(cfg.tail_ratio) * v.front(), ErrorKind::convergence,
          "profile tail did not decay below the truncation tolerance");

  GroundStateResult out{prof, prm, functionals(prof, prm), static_cast<double>(nw.residual),
                        decay_fit(prof, prm.omega()), cfg.tol, cfg.identity_tol,
                        ShootingBracket{sc.lo, sc.hi, sc.sign_changes, 0.5 * (lo + hi)}};
  if (!out.certified()) {
    std::ostringstream msg;
    msg << "ground state failed certification: K=" << out.report.nehari << " Q=" << out.report.virial
        << " S=" << out.report.action << " decay=" << out.decay_rate;
    fail(ErrorKind::certification, msg.str());
  }
  return out;
}

inline GroundStateResult solve_ground_state(const Params& prm, const RadialGrid& grid, double tol = 1e-8) {
  SolverConfig cfg;
  cfg.tol = tol;
  return solve_ground_state(prm, grid, cfg);
}

inline GroundStateResult solve_ground_state(const Params& prm) {
  return solve_ground_state(prm, RadialGrid::for_omega(prm.omega()));
}

}  // namespace dpnls
