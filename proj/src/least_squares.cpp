#include "cqed/least_squares.hpp"

#include <cmath>
#include <unsupported/Eigen/LevenbergMarquardt>

namespace cqed {

namespace {

struct Functor : Eigen::DenseFunctor<double> {
  Functor(const ResidualFn& fn, int n_params, int n_residuals, double step)
      : Eigen::DenseFunctor<double>(n_params, n_residuals), fn_(fn), step_(step) {}

  int operator()(const InputType& x, ValueType& fvec) const {
    fn_(x, fvec);
    return 0;
  }

  int df(const InputType& x, JacobianType& fjac) const {
    fjac = numerical_jacobian(fn_, static_cast<int>(values()), x, step_);
    return 0;
  }

  const ResidualFn& fn_;
  double step_;
};

}  // namespace

Eigen::MatrixXd numerical_jacobian(const ResidualFn& fn, int n_residuals, const Eigen::VectorXd& x,
                                   double rel_step) {
  const auto n = x.size();
  Eigen::MatrixXd jac(n_residuals, n);
  Eigen::VectorXd xp = x;
  Eigen::VectorXd rp(n_residuals), rm(n_residuals);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double h = rel_step * std::max(1.0, std::abs(x[j]));
    xp[j] = x[j] + h;
    fn(xp, rp);
    xp[j] = x[j] - h;
    fn(xp, rm);
    xp[j] = x[j];
    jac.col(j) = (rp - rm) / (2.0 * h);
  }
  return jac;
}

LeastSquaresResult solve_least_squares(const ResidualFn& fn, int n_residuals, Eigen::VectorXd x0,
                                       const LeastSquaresOptions& opts) {
  const int n = static_cast<int>(x0.size());
  LeastSquaresResult out;

  Eigen::VectorXd r0(n_residuals);
  fn(x0, r0);
  out.initial_norm = r0.norm();

  Functor functor(fn, n, n_residuals, opts.diff_step);
  Eigen::LevenbergMarquardt<Functor> lm(functor);
  lm.setXtol(opts.xtol);
  lm.setFtol(opts.ftol);
  lm.setGtol(0.0);
  // Each iteration costs one Jacobian plus ~1-2 function evaluations.
  lm.setMaxfev(opts.max_iterations * 2);

  Eigen::VectorXd x = x0;
  auto status = lm.minimize(x);
  out.iterations = static_cast<int>(lm.iterations());
  using S = Eigen::LevenbergMarquardtSpace::Status;
  out.converged = status == S::RelativeReductionTooSmall || status == S::RelativeErrorTooSmall ||
                  status == S::RelativeErrorAndReductionTooSmall || status == S::CosinusTooSmall ||
                  status == S::XtolTooSmall || status == S::FtolTooSmall;

  out.residuals.resize(n_residuals);
  fn(x, out.residuals);
  out.residual_norm = out.residuals.norm();
  // LM only accepts steps that reduce the cost, but guard against a bad start.
  if (!(out.residual_norm <= out.initial_norm) && std::isfinite(out.initial_norm)) {
    x = x0;
    out.residuals = r0;
    out.residual_norm = out.initial_norm;
  }
  out.params = x;

  const Eigen::MatrixXd jac = numerical_jacobian(fn, n_residuals, x, opts.diff_step);
  const Eigen::MatrixXd jtj = jac.transpose() * jac;
  const int dof = std::max(1, n_residuals - n);
  const double s2 = out.residual_norm * out.residual_norm / dof;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(jtj);
  out.covariance = s2 * cod.pseudoInverse();
  return out;
}

}  // namespace cqed
