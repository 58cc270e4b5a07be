#include "auvfleet/safety.hpp"

#include <Eigen/Cholesky>

#include "auvfleet/errors.hpp"

namespace auvfleet {

void QuadraticClfWeights::validate() const {
  if ((W - W.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw ConfigError("CLF weight matrix must be symmetric");
  Eigen::LLT<Mat12> llt(W);
  if (llt.info() != Eigen::Success)
    throw ConfigError("CLF weight matrix must be positive definite");
}

void RateParams::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw ConfigError("CLF rate alpha must lie in (0, 1)");
  if (!(gamma >= 0.0 && gamma <= 1.0))
    throw ConfigError("CBF rate gamma must lie in [0, 1]");
  if (!(robot_radius > 0.0)) throw ConfigError("robot radius must be positive");
}

double clf_value(const RigidBodyState& state, const RigidBodyState& target,
                 const QuadraticClfWeights& weights) {
  const Vec12 e = state.flatten() - target.flatten();
  return e.dot(weights.W * e);
}

double clf_constraint_residual(double v_next, double v_curr, double alpha, double s_v) {
  return (1.0 - alpha) * v_curr + s_v - v_next;
}

double barrier_value(const Vec3& position, const SphereObstacle& obstacle,
                     double robot_radius) {
  const double r = robot_radius + obstacle.radius;
  return (position - obstacle.center).squaredNorm() - r * r;
}

double cbf_constraint_residual(double b_next, double b_curr, double gamma, double s_h) {
  return b_next - s_h * (1.0 - gamma) * b_curr;
}

}  // namespace auvfleet
