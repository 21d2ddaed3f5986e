#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lls {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Hilbert-space dimension out of the supported range or mismatched operands.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Invalid input: bad indices, non-Hermitian operators, schema violations.
/// Carries the offending keys when raised from config validation.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what, std::vector<std::string> keys = {})
      : Error(what), keys_(std::move(keys)) {}

  const std::vector<std::string>& keys() const noexcept { return keys_; }

 private:
  std::vector<std::string> keys_;
};

/// Linear-algebra or simulation failure (eigensolver did not converge, NaNs).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Fidelity requested for a state with vanishing Frobenius norm.
class UndefinedFidelityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Exponential decay fit could not be performed on the supplied data.
class FitError : public Error {
 public:
  using Error::Error;
};

}  // namespace lls
