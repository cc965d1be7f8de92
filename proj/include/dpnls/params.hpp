#pragma once

#include <cmath>
#include <limits>
#include <sstream>

#include "dpnls/error.hpp"

namespace dpnls {

/// Scaling exponents of the two power terms under v -> lambda^{N/2} v(lambda x):
/// the L^{p+1} term scales as lambda^alpha, the L^{q+1} term as lambda^beta.
class ExponentPair {
 public:
  static ExponentPair make(double alpha, double beta) {
    std::ostringstream msg;
    msg << "exponent pair requires 0 < alpha < 2 < beta, got alpha=" << alpha << " beta=" << beta;
    require(std::isfinite(alpha) && std::isfinite(beta) && alpha > 0.0 && alpha < 2.0 && beta > 2.0,
            ErrorKind::validation, msg.str());
    return ExponentPair(alpha, beta);
  }

  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }

 private:
  ExponentPair(double alpha, double beta) : alpha_(alpha), beta_(beta) {}
  double alpha_;
  double beta_;
};

/// Coefficients of i u_t = -Δu - a|u|^{p-1}u - b|u|^{q-1}u together with the
/// standing-wave frequency omega.
class Params {
 public:
  /// Validated construction: N >= 1, a, b, omega > 0 and
  /// 1 < p < 1 + 4/N < q (< 1 + 4/(N-2) when N >= 3).
  static Params make(int N, double a, double b, double p, double q, double omega) {
    Params out(N, a, b, p, q, omega);
    out.validate();
    return out;
  }

  /// Skips the focusing and exponent-window checks. Used for linear (a = b = 0)
  /// and single-power reference configurations in tests; every other entry
  /// point should go through make().
  static Params relaxed(int N, double a, double b, double p, double q, double omega) {
    require(N >= 1, ErrorKind::validation, "dimension must be >= 1");
    require(std::isfinite(a) && std::isfinite(b) && std::isfinite(p) && std::isfinite(q) &&
                std::isfinite(omega),
            ErrorKind::validation, "parameters must be finite");
    require(p >= 1.0 && q >= 1.0, ErrorKind::validation, "exponents must be >= 1");
    return Params(N, a, b, p, q, omega);
  }

  Params with_omega(double omega) const {
    Params out = *this;
    out.omega_ = omega;
    if (strict_) out.validate();
    return out;
  }

  int N() const noexcept { return N_; }
  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }
  double p() const noexcept { return p_; }
  double q() const noexcept { return q_; }
  double omega() const noexcept { return omega_; }

  double alpha() const noexcept { return N_ * (p_ - 1.0) / 2.0; }
  double beta() const noexcept { return N_ * (q_ - 1.0) / 2.0; }

  bool strict() const noexcept { return strict_; }

  ExponentPair exponents() const { return ExponentPair::make(alpha(), beta()); }

 private:
  Params(int N, double a, double b, double p, double q, double omega)
      : N_(N), a_(a), b_(b), p_(p), q_(q), omega_(omega) {}

  void validate() {
    std::ostringstream msg;
    msg << "N=" << N_ << " a=" << a_ << " b=" << b_ << " p=" << p_ << " q=" << q_
        << " omega=" << omega_;
    const std::string ctx = msg.str();
    require(N_ >= 1, ErrorKind::validation, "dimension must be >= 1 (" + ctx + ")");
    require(std::isfinite(a_) && a_ > 0.0, ErrorKind::validation, "a must be > 0 (" + ctx + ")");
    require(std::isfinite(b_) && b_ > 0.0, ErrorKind::validation, "b must be > 0 (" + ctx + ")");
    require(std::isfinite(omega_) && omega_ > 0.0, ErrorKind::validation,
            "omega must be > 0 (" + ctx + ")");
    const double crit = 1.0 + 4.0 / N_;
    require(std::isfinite(p_) && p_ > 1.0 && p_ < crit, ErrorKind::validation,
            "need 1 < p < 1 + 4/N (" + ctx + ")");
    require(std::isfinite(q_) && q_ > crit, ErrorKind::validation, "need q > 1 + 4/N (" + ctx + ")");
    if (N_ >= 3) {
      require(q_ < 1.0 + 4.0 / (N_ - 2), ErrorKind::validation,
              "need q < 1 + 4/(N-2) for N >= 3 (" + ctx + ")");
    }
    require(alpha() > 0.0 && alpha() < 2.0 && beta() > 2.0, ErrorKind::validation,
            "derived exponents violate 0 < alpha < 2 < beta (" + ctx + ")");
    strict_ = true;
  }

  int N_;
  double a_;
  double b_;
  double p_;
  double q_;
  double omega_;
  bool strict_ = false;
};

}  // namespace dpnls
