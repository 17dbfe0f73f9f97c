#pragma once

#include <Eigen/Dense>
#include <functional>

namespace cqed {

/// Residual callback: fill `residuals` (already sized) for parameters `x`.
using ResidualFn = std::function<void(const Eigen::VectorXd& x, Eigen::VectorXd& residuals)>;

struct LeastSquaresOptions {
  double xtol = 1e-9;           // relative step tolerance
  double ftol = 1e-12;
  int max_iterations = 200;
  double diff_step = 1e-7;      // relative finite-difference step for the Jacobian
};

struct LeastSquaresResult {
  Eigen::VectorXd params;
  Eigen::VectorXd residuals;
  double residual_norm = 0.0;   // Euclidean norm of the residual vector
  double initial_norm = 0.0;
  Eigen::MatrixXd covariance;   // s^2 (J^T J)^-1, s^2 = |r|^2 / (m - n)
  int iterations = 0;
  bool converged = false;
};

/// Damped Gauss-Newton (Levenberg-Marquardt) minimisation of |r(x)|^2.
/// Backed by Eigen's MINPACK port with a central-difference Jacobian.
/// Never throws on non-convergence; callers decide via `converged`.
LeastSquaresResult solve_least_squares(const ResidualFn& fn, int n_residuals, Eigen::VectorXd x0,
                                       const LeastSquaresOptions& opts = {});

/// Central-difference Jacobian of `fn` at `x`.
Eigen::MatrixXd numerical_jacobian(const ResidualFn& fn, int n_residuals, const Eigen::VectorXd& x,
                                   double rel_step = 1e-7);

}  // namespace cqed
