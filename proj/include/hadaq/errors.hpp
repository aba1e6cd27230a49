#pragma once

#include <stdexcept>
#include <string>

namespace hadaq {

/// Base class for all errors thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// An API precondition was violated (mismatched manifolds, bad arguments,
/// incompatible options). Indicates a caller bug rather than bad data.
struct ContractViolation : Error {
  using Error::Error;
};

/// Input data failed validation (malformed files, points off the manifold).
struct ValidationError : Error {
  using Error::Error;
};

/// A numerical procedure failed or did not converge; carries the offending
/// residual when one is available.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what, double residual = 0.0)
      : Error(what), residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Thrown when an operation requires two distinct points but they coincide
/// within the degeneracy threshold.
struct DegeneratePairError : NumericalError {
  using NumericalError::NumericalError;
};

}  // namespace hadaq
