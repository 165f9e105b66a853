#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace vacuum {

/// Invalid parameter or precondition violation in library calls.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised by the time integrators. Carries the simulation time of failure
/// when known so callers can report where a run broke down.
class SolverError : public std::runtime_error {
 public:
  enum class Kind { ParticleCrossing, CflViolation, NonFinite };

  SolverError(Kind kind, const std::string& what,
              std::optional<double> time = std::nullopt)
      : std::runtime_error(what), kind_(kind), time_(time) {}

  Kind kind() const noexcept { return kind_; }
  std::optional<double> time() const noexcept { return time_; }

  SolverError at_time(double t) const { return SolverError(kind_, what(), t); }

  static const char* kind_name(Kind k) {
    switch (k) {
      case Kind::ParticleCrossing: return "particle_crossing";
      case Kind::CflViolation: return "cfl_violation";
      case Kind::NonFinite: return "non_finite";
    }
    return "unknown";
  }

 private:
  Kind kind_;
  std::optional<double> time_;
};

}  // namespace vacuum
