#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace bargmann {

/// Input outside the mathematical domain of an operation (nonpositive
/// exponent, inadmissible matrix, degenerate coordinates, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Shape mismatch: odd dimension where 2n is required, wrong vector length.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Matrix too close to singular for a stable factorization.
class SingularityError : public std::runtime_error {
 public:
  SingularityError(const std::string& what, double abs_det)
      : std::runtime_error(what), abs_det_(abs_det) {}
  double abs_det() const noexcept { return abs_det_; }

 private:
  double abs_det_;
};

/// Quadrature or optimizer failed to reach its tolerance within budget.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Quadrature requested on more axes than the oracle supports.
class UnsupportedDimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Polynomial degree above the representation cap.
class DegreeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A sampled value beat the claimed global maximum. Carries the offending
/// point serialized as text so that the case can be replayed.
class CounterexampleError : public std::runtime_error {
 public:
  CounterexampleError(const std::string& what, std::string witness)
      : std::runtime_error(what), witness_(std::move(witness)) {}
  const std::string& witness() const noexcept { return witness_; }

 private:
  std::string witness_;
};

}  // namespace bargmann
