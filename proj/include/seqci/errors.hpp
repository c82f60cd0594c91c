#pragma once

#include <stdexcept>
#include <string>

namespace seqci {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Root bracket without a sign change.
class NoSignChange : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonConvergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operation that only exists for Beta priors was called with a tabulated one.
class UnsupportedPrior : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Posterior normalizer vanished under quadrature.
class QuadratureFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A sampling region that is not an integer interval.
class NonIntervalRegion : public std::runtime_error {
 public:
  explicit NonIntervalRegion(int t)
      : std::runtime_error("sampling region at t=" + std::to_string(t) +
                           " is not an integer interval"),
        t_(t) {}
  int time() const noexcept { return t_; }

 private:
  int t_;
};

class OutOfLattice : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Calibration search whose endpoints do not straddle the target.
class BracketFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or incompatible policy / state file.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace seqci
