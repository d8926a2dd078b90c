#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace neuromod {

// Invalid user-supplied configuration: unknown identifiers, out-of-range
// parameters, malformed files.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller broke an API precondition (dimension mismatch, wrong gate kind).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A state derivative became non-finite during integration.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(double t, std::size_t component, const std::string& context = {});

  double time() const noexcept { return t_; }
  std::size_t component() const noexcept { return component_; }

 private:
  double t_;
  std::size_t component_;
};

// Covariance lost symmetry or positive definiteness.
class NumericalDegradation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Not enough events in a trace to compute a metric.
class InsufficientData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Reading or writing a file failed; the message names the path.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace neuromod
