#pragma once

#include <Eigen/Dense>

namespace auvfleet {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Smooth nonlinear program in the standard form
///   min f(x)  s.t.  h(x) = 0,  g(x) <= 0,  lb <= x <= ub.
/// Implementations are immutable after construction and may be evaluated
/// concurrently from several threads.
class NlpProblem {
 public:
  virtual ~NlpProblem() = default;

  virtual int num_vars() const = 0;
  virtual int num_equalities() const { return 0; }
  virtual int num_inequalities() const { return 0; }

  /// Bounds may contain +-infinity for one-sided or free variables.
  virtual VectorXd lower_bounds() const;
  virtual VectorXd upper_bounds() const;

  virtual double objective(const VectorXd& x) const = 0;
  virtual VectorXd objective_gradient(const VectorXd& x) const = 0;

  virtual VectorXd equalities(const VectorXd& x) const;
  virtual VectorXd inequalities(const VectorXd& x) const;
  virtual MatrixXd equality_jacobian(const VectorXd& x) const;
  virtual MatrixXd inequality_jacobian(const VectorXd& x) const;

  /// sigma * d2f + sum_i lambda_i d2h_i + sum_j mu_j d2g_j. A positive
  /// semidefinite approximation (e.g. dropping constraint curvature) is
  /// acceptable; the solver regularizes as needed.
  virtual MatrixXd lagrangian_hessian(const VectorXd& x, double sigma,
                                      const VectorXd& lambda,
                                      const VectorXd& mu) const = 0;
};

}  // namespace auvfleet
