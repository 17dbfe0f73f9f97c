#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace cqed {

/// Bad input: out-of-domain parameters, malformed files, schema violations.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical method failed (no convergence, trace drift, solver failure).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A fit that did not converge. Carries the best parameters seen so far.
class FitError : public NumericalError {
 public:
  FitError(const std::string& what, std::vector<double> best_params, double best_residual)
      : NumericalError(what), best_params_(std::move(best_params)), best_residual_(best_residual) {}

  const std::vector<double>& best_params() const { return best_params_; }
  double best_residual() const { return best_residual_; }

 private:
  std::vector<double> best_params_;
  double best_residual_;
};

}  // namespace cqed
