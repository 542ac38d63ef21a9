#pragma once

#include <stdexcept>
#include <string>

namespace lcmavg {

// Bad function name, unsupported k, parameters outside documented ranges.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Argument outside the mathematical domain of an operation (s <= 1 for
// zeta, r <= -1 for the lcm kernel, n = 0 for factorization, ...).
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

// A requested tolerance could not be reached within the configured caps.
// Carries the best value obtained and its estimated error.
class ToleranceNotMet : public std::runtime_error {
 public:
  ToleranceNotMet(const std::string& what, double best_value,
                  double error_estimate)
      : std::runtime_error(what),
        best_value(best_value),
        error_estimate(error_estimate) {}
  double best_value;
  double error_estimate;
};

// A size/feasibility cap was exceeded; the message states the cap.
class ResourceCapError : public std::runtime_error {
 public:
  explicit ResourceCapError(const std::string& what)
      : std::runtime_error(what) {}
};

// Fixed-width integer arithmetic would wrap; detected, never silent.
class OverflowError : public std::overflow_error {
 public:
  explicit OverflowError(const std::string& what)
      : std::overflow_error(what) {}
};

// An internal consistency check failed.
class InvariantError : public std::logic_error {
 public:
  explicit InvariantError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace lcmavg
