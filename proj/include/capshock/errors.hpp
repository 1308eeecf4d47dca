#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace capshock {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input outside the mathematical domain of an operation (v <= 0, non-Lax data, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed to reach its tolerance.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// The truncated profile domain is too short for the requested endpoint accuracy.
class TruncationError : public NumericError {
 public:
  TruncationError(const std::string& what, double left_error, double right_error)
      : NumericError(what), left_error(left_error), right_error(right_error) {}
  double left_error;
  double right_error;
};

/// Two independent routes to the same fact disagree.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

/// Eigenvalue collision or loss of consistent splitting at a frequency.
class DegeneracyError : public NumericError {
 public:
  DegeneracyError(const std::string& what, std::complex<double> lambda)
      : NumericError(what), lambda(lambda) {}
  std::complex<double> lambda;
};

/// Rescaled Evans trajectory left its norm window.
class RescalingError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Winding refinement could not resolve the phase along a segment.
class UnresolvedPhaseError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// |D| dropped below the near-zero threshold at a contour sample.
class NearZeroError : public NumericError {
 public:
  NearZeroError(const std::string& what, std::complex<double> lambda)
      : NumericError(what), lambda(lambda) {}
  std::complex<double> lambda;
};

}  // namespace capshock
