#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dpnls {

enum class ErrorKind {
  invalid_state,
  domain,
  resolution,
  no_ground_state_bracket,
  convergence,
  certification,
  precondition,
  near_singular,
  membership,
  tail_contaminated,
  validation,
};

constexpr std::string_view to_string(ErrorKind k) noexcept {
  switch (k) {
    case ErrorKind::invalid_state: return "invalid-state";
    case ErrorKind::domain: return "domain";
    case ErrorKind::resolution: return "resolution";
    case ErrorKind::no_ground_state_bracket: return "no-ground-state-bracket";
    case ErrorKind::convergence: return "convergence";
    case ErrorKind::certification: return "certification";
    case ErrorKind::precondition: return "precondition";
    case ErrorKind::near_singular: return "near-singular";
    case ErrorKind::membership: return "membership";
    case ErrorKind::tail_contaminated: return "tail-contaminated";
    case ErrorKind::validation: return "validation";
  }
  return "unknown";
}

/// Single exception type for the library; `kind()` tells callers which
/// contract was broken.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool ok, ErrorKind kind, const std::string& what) {
  if (!ok) fail(kind, what);
}

}  // namespace dpnls
