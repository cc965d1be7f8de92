#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dpnls/error.hpp"
#include "dpnls/fft.hpp"
#include "dpnls/functionals.hpp"
#include "dpnls/groundstate.hpp"
#include "dpnls/params.hpp"
#include "dpnls/stability.hpp"
#include "dpnls/state.hpp"

namespace dpnls {

struct EvolutionConfig {
  double dt = 1e-3;          ///< initial (and largest) step
  double t_max = 10.0;
  double blowup_grad_factor = 50.0;  ///< on ||∇u||², relative to t = 0
  double blowup_amp_factor = 20.0;   ///< on max|u|, relative to t = 0
  double cfl_shrink = 0.5;           ///< step factor applied when max|u| grows > 5% in one step
  double record_every = 1e-3;
  /// Cap on the nonlinear phase dt * (a|u|^{p-1} + b|u|^{q-1}) per step; 0 disables.
  double phase_cap = 2e-3;
  bool fixed_step = false;   ///< keep dt constant (convergence studies)
  double initial_tail = 1e-8;  ///< spectral tail allowed in the initial data
  double tail_limit = 1e-6;    ///< spectral tail that counts as resolution loss
  double min_dt = 1e-12;

  void validate() const {
    require(std::isfinite(dt) && dt > 0.0, ErrorKind::validation, "evolution dt must be > 0");
    require(std::isfinite(t_max) && t_max > 0.0, ErrorKind::validation, "evolution t_max must be > 0");
    require(blowup_grad_factor > 1.0 && blowup_amp_factor > 1.0, ErrorKind::validation,
            "blowup thresholds must exceed 1");
    require(cfl_shrink > 0.0 && cfl_shrink < 1.0, ErrorKind::validation, "cfl_shrink must lie in (0, 1)");
    require(std::isfinite(record_every) && record_every > 0.0, ErrorKind::validation,
            "record cadence must be > 0");
    require(phase_cap >= 0.0 && min_dt > 0.0, ErrorKind::validation, "invalid step controls");
  }
};

struct TraceRecord {
  double t = 0;
  FunctionalReport report;  ///< mass, energy, action, nehari, virial, grad
  double variance = 0;      ///< ||x u||², x measured from the box centre
  double sup_amp = 0;
  double boundary_fraction = 0;  ///< share of the mass in the outer tenth of the box
};

enum class Outcome { completed, blowup, inconclusive, numerical_failure };

constexpr std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::completed: return "completed";
    case Outcome::blowup: return "blowup";
    case Outcome::inconclusive: return "inconclusive";
    case Outcome::numerical_failure: return "numerical_failure";
  }
  return "unknown";
}

struct BlowupVerdict {
  bool blew_up = false;
  std::optional<double> t_detect;
  Outcome outcome = Outcome::completed;
  std::string reason = "horizon";
  std::vector<TraceRecord> trace;        ///< uniform cadence from t = 0
  std::optional<TraceRecord> detection;  ///< state at the stopping step, off cadence
  std::size_t steps = 0;
  double smallest_dt = 0;
};

/// Called with (t, u) at every cadence record.
using RecordObserver = std::function<void(double, const ComplexField&)>;

namespace detail {

/// m2^{e}, exact integer powers when 2e is an integer exponent of |u|.
inline double pow_mod2(double m2, double e) {
  if (e == std::floor(e) && e >= 0.0 && e <= 8.0) {
    double r = 1.0;
    for (int i = 0; i < static_cast<int>(e); ++i) r *= m2;
    return r;
  }
  return m2 > 0.0 ? std::pow(m2, e) : 0.0;
}

inline double potential(double m2, const Params& prm) {
  return prm.a() * pow_mod2(m2, 0.5 * (prm.p() - 1.0)) + prm.b() * pow_mod2(m2, 0.5 * (prm.q() - 1.0));
}

inline void nonlinear_phase(std::vector<std::complex<double>>& u, const Params& prm, double s) {
  for (auto& z : u) {
    const double ph = s * potential(std::norm(z), prm);
    z *= std::complex<double>(std::cos(ph), std::sin(ph));
  }
}

inline double sup_modulus(const std::vector<std::complex<double>>& u) {
  double m = 0.0;
  for (auto z : u) {
    const double a = std::abs(z);
    if (std::isnan(a)) return a;
    m = std::max(m, a);
  }
  return m;
}

/// Exact free propagator on the periodic line.
class SpectralStepper {
 public:
  explicit SpectralStepper(const PeriodicGrid& g) : g_(g), fft_(g.size()), spec_(g.size()) {}

  void linear(std::vector<std::complex<double>>& u, double s) {
    if (s != cached_s_) {
      prop_.resize(u.size());
      for (std::size_t k = 0; k < u.size(); ++k) {
        const double kk = g_.wavenumber(k);
        prop_[k] = std::polar(1.0, -kk * kk * s);
      }
      cached_s_ = s;
    }
    fft_.forward(u);
    for (std::size_t k = 0; k < u.size(); ++k) u[k] *= prop_[k];
    fft_.backward(u);
  }

  /// ||∇u||² and the spectral tail (largest coefficient in the upper quarter
  /// of the band over the largest coefficient).
  std::pair<double, double> gradient_and_tail(const std::vector<std::complex<double>>& u) {
    spec_ = u;
    fft_.forward(spec_);
    const std::size_t m = u.size();
    double acc = 0.0, peak = 0.0, tail = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      const double kk = g_.wavenumber(k);
      const double a2 = std::norm(spec_[k]);
      acc += kk * kk * a2;
      peak = std::max(peak, a2);
      const std::size_t off = k > m / 2 ? k - m / 2 : m / 2 - k;
      if (off < m / 8) tail = std::max(tail, a2);
    }
    return {acc * g_.dx() / static_cast<double>(m), peak > 0.0 ? std::sqrt(tail / peak) : 0.0};
  }

  Fft1d& fft() { return fft_; }

 private:
  PeriodicGrid g_;
  Fft1d fft_;
  std::vector<std::complex<double>> spec_, prop_;
  double cached_s_ = std::nan("");
};

/// Crank-Nicolson for u_t = iΔu with the finite-volume radial Laplacian
/// (symmetric in the cell-volume inner product, so the scheme is unitary);
/// u = 0 is imposed at the outer node.
class RadialCnStepper {
 public:
  RadialCnStepper(const RadialGrid& g, int dim) : n_(g.size()), lo_(n_), up_(n_) {
    const double h = g.spacing();
    const double e = dim - 1;
    auto vol = [&](std::size_t j) {
      const double r = g.node(j);
      const double inner = j == 0 ? 0.0 : std::pow(r - 0.5 * h, dim);
      return (std::pow(r + 0.5 * h, dim) - inner) / dim;
    };
    for (std::size_t j = 0; j + 1 < n_; ++j) {
      const double v = vol(j) * h;
      up_[j] = std::pow(g.node(j) + 0.5 * h, e) / v;
      lo_[j] = j == 0 ? 0.0 : std::pow(g.node(j) - 0.5 * h, e) / v;
    }
  }

  void linear(std::vector<std::complex<double>>& u, double s) {
    using C = std::complex<double>;
    const C c(0.0, 0.5 * s);
    std::vector<C> rhs(n_), diag(n_), lower(n_), upper(n_);
    for (std::size_t j = 0; j + 1 < n_; ++j) {
      C lap = up_[j] * (u[j + 1] - u[j]);
      if (j > 0) lap -= lo_[j] * (u[j] - u[j - 1]);
      rhs[j] = u[j] + c * lap;
      diag[j] = 1.0 + c * (up_[j] + lo_[j]);
      upper[j] = -c * up_[j];
      lower[j] = -c * lo_[j];
    }
    diag[n_ - 1] = 1.0;
    rhs[n_ - 1] = 0.0;
    for (std::size_t j = 1; j < n_; ++j) {
      const C w = lower[j] / diag[j - 1];
      diag[j] -= w * upper[j - 1];
      rhs[j] -= w * rhs[j - 1];
    }
    u[n_ - 1] = rhs[n_ - 1] / diag[n_ - 1];
    for (std::size_t j = n_ - 1; j-- > 0;) u[j] = (rhs[j] - upper[j] * u[j + 1]) / diag[j];
  }

 private:
  std::size_t n_;
  std::vector<double> lo_, up_;
};

inline double radial_gradient(const RadialGrid& g, int dim, const std::vector<std::complex<double>>& u) {
  const double h = g.spacing();
  double acc = 0.0;
  for (std::size_t j = 0; j + 1 < u.size(); ++j) {
    const double rf = (static_cast<double>(j) + 0.5) * h;
    acc += (dim > 1 ? std::pow(rf, dim - 1) : 1.0) * std::norm(u[j + 1] - u[j]) / h;
  }
  return acc * unit_sphere_area(dim);
}

}  // namespace detail

/// Conserved quantities, virial and second moment of u.
inline TraceRecord observe(const ComplexField& u, const Params& prm, double t, Fft1d* fft = nullptr) {
  TraceRecord rec;
  rec.t = t;
  rec.report = functionals(u, prm, fft);
  rec.sup_amp = u.sup_amplitude();
  double var = 0.0, outer = 0.0, total = 0.0;
  if (u.periodic()) {
    const auto& g = u.line();
    for (std::size_t j = 0; j < u.size(); ++j) {
      const double x = g.x(j), m2 = std::norm(u.values[j]);
      var += x * x * m2;
      total += m2;
      if (std::abs(x) > 0.4 * g.length()) outer += m2;
    }
    var *= g.dx();
  } else {
    const auto& g = u.radial();
    for (std::size_t j = 0; j < u.size(); ++j) {
      const double r = g.node(j), w = radial_weight(g, u.dim, j), m2 = std::norm(u.values[j]);
      var += w * r * r * m2;
      total += w * m2;
      if (r > 0.9 * g.rmax()) outer += w * m2;
    }
  }
  rec.variance = var;
  rec.boundary_fraction = total > 0.0 ? outer / total : 0.0;
  return rec;
}

/// Strang splitting N(dt/2) L(dt) N(dt/2) with exact nonlinear phase rotation.
/// Stops at t_max, at a gradient or amplitude threshold (blowup), on spectral
/// or grid resolution loss (inconclusive) or on non-finite values.
inline BlowupVerdict evolve(const ComplexField& u0, const Params& prm, const EvolutionConfig& cfg,
                            const RecordObserver& on_record = {}) {
  cfg.validate();
  u0.validate();
  require(u0.dim == prm.N(), ErrorKind::domain, "field and parameters disagree on dimension");
  require(!u0.periodic() || u0.dim == 1, ErrorKind::domain, "periodic evolution is one-dimensional");

  std::optional<detail::SpectralStepper> spectral;
  std::optional<detail::RadialCnStepper> radial;
  if (u0.periodic()) {
    spectral.emplace(u0.line());
  } else {
    radial.emplace(u0.radial(), u0.dim);
  }

  ComplexField u = u0;
  Fft1d* fft = spectral ? &spectral->fft() : nullptr;
  auto probe = [&](const ComplexField& f) -> std::pair<double, double> {
    if (spectral) return spectral->gradient_and_tail(f.values);
    const double hw = detail::half_width_nodes(std::span<const std::complex<double>>(f.values), 0, false);
    return {detail::radial_gradient(f.radial(), f.dim, f.values), hw};
  };
  auto resolution_lost = [&](double tail_or_width, double limit) {
    if (u.is_zero()) return false;
    return spectral ? tail_or_width > limit : tail_or_width < 0.5 * kMinNodesAcrossHalfWidth;
  };

  const auto [grad0, res0] = probe(u);
  require(!resolution_lost(res0, cfg.initial_tail), ErrorKind::resolution,
          "initial data is not resolved by the evolution grid");
  const double amp0 = u.sup_amplitude();

  BlowupVerdict out;
  out.smallest_dt = cfg.dt;
  double t = 0.0;
  double dt_base = cfg.dt;
  std::size_t next_index = 0;

  auto stop = [&](Outcome o, std::string reason) {
    out.outcome = o;
    out.reason = std::move(reason);
    out.blew_up = o == Outcome::blowup;
    if (o != Outcome::completed) out.t_detect = t;
    if (o != Outcome::numerical_failure) out.detection = observe(u, prm, t, fft);
  };

  while (true) {
    const double target = static_cast<double>(next_index) * cfg.record_every;
    if (target <= t && target <= cfg.t_max * (1.0 + 1e-12)) {
      out.trace.push_back(observe(u, prm, t, fft));
      if (on_record) on_record(t, u);
      ++next_index;
      continue;
    }
    if (t >= cfg.t_max * (1.0 - 1e-12)) break;

    const double amp_before = u.sup_amplitude();
    double step = dt_base;
    if (!cfg.fixed_step && cfg.phase_cap > 0.0) {
      const double v = detail::potential(amp_before * amp_before, prm);
      if (v > 0.0) step = std::min(step, cfg.phase_cap / v);
    }
    const double horizon = std::min(target, cfg.t_max);
    bool land = false;
    if (horizon - t <= step * (1.0 + 1e-9)) {
      step = horizon - t;
      land = true;
    }
    if (step < cfg.min_dt) {
      stop(Outcome::inconclusive, "step_underflow");
      break;
    }

    detail::nonlinear_phase(u.values, prm, 0.5 * step);
    if (spectral) {
      spectral->linear(u.values, step);
    } else {
      radial->linear(u.values, step);
    }
    detail::nonlinear_phase(u.values, prm, 0.5 * step);
    t = land ? horizon : t + step;
    ++out.steps;
    if (!land) out.smallest_dt = std::min(out.smallest_dt, step);

    const double amp = detail::sup_modulus(u.values);
    if (!std::isfinite(amp)) {
      stop(Outcome::numerical_failure, "non_finite");
      break;
    }
    const auto [grad, res] = probe(u);
    if (!std::isfinite(grad)) {
      stop(Outcome::numerical_failure, "non_finite");
      break;
    }
    if (grad0 > 0.0 && grad > cfg.blowup_grad_factor * grad0) {
      stop(Outcome::blowup, "gradient_threshold");
      break;
    }
    if (amp0 > 0.0 && amp > cfg.blowup_amp_factor * amp0) {
      stop(Outcome::blowup, "amplitude_threshold");
      break;
    }
    if (resolution_lost(res, cfg.tail_limit)) {
      stop(Outcome::inconclusive, "resolution_loss");
      break;
    }
    if (!cfg.fixed_step && amp > 1.05 * amp_before) dt_base *= cfg.cfl_shrink;
  }
  return out;
}

/// Leading records with ||∇u||² <= factor * ||∇u0||².
inline std::vector<TraceRecord> pre_blowup_window(const std::vector<TraceRecord>& trace, double factor = 5.0) {
  std::vector<TraceRecord> out;
  if (trace.empty()) return out;
  const double g0 = trace.front().report.grad;
  for (const auto& r : trace) {
    if (r.report.grad > factor * g0) break;
    out.push_back(r);
  }
  return out;
}

namespace detail {

inline constexpr double kBoundaryMassLimit = 1e-8;

/// Records usable for virial diagnostics: the uniform-cadence prefix with
/// boundary mass below the limit.
inline std::vector<TraceRecord> virial_window(const std::vector<TraceRecord>& trace) {
  require(trace.size() >= 5, ErrorKind::domain, "virial diagnostics need at least 5 records");
  const double h = trace[1].t - trace[0].t;
  for (std::size_t i = 1; i < trace.size(); ++i) {
    require(std::abs(trace[i].t - trace[i - 1].t - h) <= 1e-9 * std::max(h, 1.0), ErrorKind::domain,
            "virial diagnostics need a uniform record cadence");
  }
  std::vector<TraceRecord> out;
  for (const auto& r : trace) {
    if (r.boundary_fraction >= kBoundaryMassLimit) break;
    out.push_back(r);
  }
  require(out.size() >= 5, ErrorKind::domain, "fewer than 5 well-localized records");
  return out;
}

inline double second_difference(const std::vector<TraceRecord>& w, std::size_t i) {
  const double h = w[1].t - w[0].t;
  return (w[i + 1].variance - 2.0 * w[i].variance + w[i - 1].variance) / (h * h);
}

}  // namespace detail

/// max over interior records of |Δ²_t ||xu||² - 8Q| / max(1, |8Q|).
inline double virial_check(const std::vector<TraceRecord>& trace) {
  const auto w = detail::virial_window(trace);
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < w.size(); ++i) {
    const double q8 = 8.0 * w[i].report.virial;
    worst = std::max(worst, std::abs(detail::second_difference(w, i) - q8) / std::max(1.0, std::abs(q8)));
  }
  return worst;
}

/// Largest |third difference| of the variance divided by the step cubed.
inline double variance_third_difference(const std::vector<TraceRecord>& trace) {
  const auto w = detail::virial_window(trace);
  const double h = w[1].t - w[0].t;
  double worst = 0.0;
  for (std::size_t i = 0; i + 3 < w.size(); ++i) {
    const double d3 = w[i + 3].variance - 3.0 * w[i + 2].variance + 3.0 * w[i + 1].variance - w[i].variance;
    worst = std::max(worst, std::abs(d3) / (h * h * h));
  }
  return worst;
}

/// Second differences of the variance stay below 16 (S_ω(u0) - S_ω(φ_ω)) up
/// to the finite-difference tolerance 1e-2 max(1, |8Q|).
inline bool concavity_audit(const std::vector<TraceRecord>& trace, double ground_action) {
  const auto w = detail::virial_window(trace);
  const double bound = 16.0 * (w.front().report.action - ground_action);
  for (std::size_t i = 1; i + 1 < w.size(); ++i) {
    const double tol = 1e-2 * std::max(1.0, std::abs(8.0 * w[i].report.virial));
    if (detail::second_difference(w, i) > bound + tol) return false;
  }
  return true;
}

/// Variance strictly decreasing after the first record.
inline bool variance_decreasing(const std::vector<TraceRecord>& trace) {
  for (std::size_t i = 1; i < trace.size(); ++i)
    if (!(trace[i].variance < trace[i - 1].variance)) return false;
  return trace.size() >= 2;
}

/// Every record lies in B_ω and satisfies 8Q(u(t)) <= 16 (S_ω(u0) - S_ω(φ_ω)).
/// Throws precondition if the initial record is not in B_ω.
inline bool b_omega_invariance_audit(const BlowupVerdict& v, const GroundStateResult& gs) {
  require(!v.trace.empty() && in_b_omega(v.trace.front().report, gs.report).in_set, ErrorKind::precondition,
          "invariance audit needs initial data in B_omega");
  const double s0 = v.trace.front().report.action;
  const double gap = s0 - gs.report.action;
  for (const auto& r : v.trace) {
    if (!in_b_omega(r.report, gs.report).in_set) return false;
    const double drift = std::abs(r.report.action - s0);
    const double tol = 1e-6 * std::abs(gs.report.action) + 16.0 * drift;
    if (8.0 * r.report.virial > 16.0 * gap + tol) return false;
  }
  return true;
}

}  // namespace dpnls
