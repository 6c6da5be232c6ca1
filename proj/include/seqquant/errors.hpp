#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace seqquant {

/// Invalid input: a violated precondition on a model, grid, or configuration.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Base class of failures that come out of the numerics rather than the inputs.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Candidate enumeration would exceed the configured budget; coarsen the grid.
class BudgetExceeded : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class NonConvergence : public NumericalError {
 public:
  NonConvergence(const std::string& what, std::vector<double> residuals)
      : NumericalError(what), residuals_(std::move(residuals)) {}

  /// Sup-norm residual after each recorded iteration.
  const std::vector<double>& residuals() const noexcept { return residuals_; }

 private:
  std::vector<double> residuals_;
};

/// Stopping at z = 1 is optimal, so there is no continuation region to tabulate.
class DegeneratePolicy : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NoInformativeQuantizer : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace seqquant
