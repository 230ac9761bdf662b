#pragma once

#include <stdexcept>
#include <string>

namespace svgd {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller broke a documented precondition (dimension mismatch, mass mismatch,
// invalid KernelSpec or TargetSpec fields).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

// Non-finite or out-of-domain numeric input.
class DomainError : public Error {
 public:
  using Error::Error;
};

// A computed kernel constant was exceeded by a sampled derivative.
class ConstantViolation : public Error {
 public:
  using Error::Error;
};

// Iterative procedure (root finding, fixed point, solver) failed to converge.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// Non-finite value produced inside the SVGD update.
class NumericOverflow : public Error {
 public:
  NumericOverflow(const std::string& what, long round, long particle)
      : Error(what + " (round " + std::to_string(round) + ", particle " +
              std::to_string(particle) + ")"),
        round_(round),
        particle_(particle) {}

  long round() const { return round_; }
  long particle() const { return particle_; }

 private:
  long round_;
  long particle_;
};

// Quadratic form that must be nonnegative came out clearly negative.
class NumericalInconsistency : public Error {
 public:
  using Error::Error;
};

// Step size breaks invertibility of the 1-D transport map.
class StepTooLarge : public Error {
 public:
  using Error::Error;
};

// Quadrature grid too coarse for the requested quantity.
class DiscretizationFailure : public Error {
 public:
  using Error::Error;
};

// Precondition of a bound (step cap, positivity) does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace svgd
