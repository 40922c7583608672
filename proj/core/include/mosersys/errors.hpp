#pragma once

#include <stdexcept>
#include <string>

namespace mosersys {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid input: bad sizes, out-of-range parameters, violated preconditions.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A field was passed together with a grid it does not belong to.
class GridMismatchError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// An exponent argument exceeded the overflow cap.
class OverflowError : public Error {
 public:
  OverflowError(const std::string& what, double argument)
      : Error(what), argument_(argument) {}
  double argument() const noexcept { return argument_; }

 private:
  double argument_;
};

/// An existence hypothesis (lambda > -Lambda1, sign/size of beta) is violated.
class HypothesisError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// An iterative method stopped without meeting its tolerance.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, double residual, int iterations)
      : Error(what), residual_(residual), iterations_(iterations) {}
  double residual() const noexcept { return residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

/// Fiber projection onto the two-constraint set failed.
class ProjectionError : public SolverError {
 public:
  using SolverError::SolverError;
};

/// One component of a vector iterate vanished (semitrivial limit).
class CollapseError : public SolverError {
 public:
  using SolverError::SolverError;
};

/// The iterate left the region in which the regime's method is valid.
class RegimeError : public SolverError {
 public:
  using SolverError::SolverError;
};

/// Overlap integral of the two scalar ground states vanished.
class DegenerateOverlapError : public DomainError {
 public:
  using DomainError::DomainError;
};

}  // namespace mosersys
