#pragma once

#include <iosfwd>
#include <string>

#include "auvfleet/nlp.hpp"

namespace auvfleet {

enum class SolverStatus {
  kConverged,
  kMaxIterations,
  kInfeasibleDetected,
  kNumericalFailure,
};

const char* to_string(SolverStatus status);
SolverStatus solver_status_from_string(const std::string& name);

struct SolverConfig {
  double kkt_tolerance{1e-6};
  int max_iterations{200};
  double initial_barrier{0.1};
  double barrier_decrease{0.2};   // kappa_mu, multiplicative factor in (0,1)
  double barrier_exponent{1.5};   // theta_mu, superlinear decrease power
  double armijo_coefficient{1e-4};
  double step_shrink{0.5};
  double min_step{1e-12};
  double bound_push{1e-3};        // relative interior clip for the start point
  std::ostream* trace{nullptr};   // optional line-per-iteration trace
};

struct KktResiduals {
  double stationarity{0.0};
  double primal_feasibility{0.0};
  double complementarity{0.0};

  double max() const;
};

/// Duals returned by the solver: equality multipliers are free-sign,
/// inequality and bound multipliers are nonnegative. Bound vectors have one
/// entry per variable and are zero where the bound is infinite.
struct Multipliers {
  VectorXd equality;
  VectorXd inequality;
  VectorXd bound_lower;
  VectorXd bound_upper;
};

struct SolverResult {
  SolverStatus status{SolverStatus::kNumericalFailure};
  VectorXd solution;
  Multipliers multipliers;
  KktResiduals kkt;
  int iterations{0};
  double solve_time{0.0};  // wall seconds
};

/// Primal-dual interior-point method: slack-augmented inequalities, monotone
/// (Fiacco-McCormick) barrier reduction, backtracking line search on an l1
/// merit function, dense symmetric-indefinite KKT factorization with
/// inertia-corrgected diagonal regularization.
SolverResult solve(const NlpProblem& problem, const VectorXd& initial_guess,
                   const SolverConfig& config = {});

/// First-order optimality residuals at an arbitrary point:
///   stationarity    = || grad f + Jh' lambda + Jg' mu - z_lo + z_up ||_inf
///   primal          = max(||h||_inf, max(g, 0), bound violations)
///   complementarity = max over |mu .* g| and bound-gap products.
/// Missing multiplier blocks are treated as zero.
KktResiduals kkt_residuals(const NlpProblem& problem, const VectorXd& point,
                           const Multipliers& multipliers);

struct DerivativeReport {
  double objective_gradient_error{0.0};
  double equality_jacobian_error{0.0};
  double inequality_jacobian_error{0.0};

  double max() const;
};

/// Central finite-difference check of the analytic first derivatives,
/// reporting the max relative error per block. The point must be strictly
/// inside the bounds.
DerivativeReport check_derivatives(const NlpProblem& problem, const VectorXd& point,
                                   double relative_step = 1e-6);

}  // namespace auvfleet
