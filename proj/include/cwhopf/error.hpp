#pragma once

#include <stdexcept>
#include <string>

namespace cwhopf {

// Invalid parameters or run configuration. Surfaces as exit code 1 in the CLI.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Parameters that fail the Hopf criticality conditions where they are required.
class NotCriticalError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

// A caller asked for something the current state cannot do (e.g. flipping a
// spin of a sign that has no representatives).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, double time)
      : std::runtime_error(what + " (t = " + std::to_string(time) + ")"), time_(time) {}

  double time() const noexcept { return time_; }

 private:
  double time_;
};

// The polar phase is undefined because the radius came too close to the origin.
class PhaseUndefinedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cwhopf
