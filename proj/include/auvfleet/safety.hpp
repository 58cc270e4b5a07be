#pragma once

#include "auvfleet/types.hpp"

namespace auvfleet {

/// Symmetric positive-definite weight of the quadratic Lyapunov function
/// V(e) = e' W e over the 12-dim tracking error.
struct QuadraticClfWeights {
  Mat12 W{Mat12::Identity()};

  /// Throws ConfigError unless W is symmetric (1e-12) and positive definite
  /// (checked by Cholesky).
  void validate() const;
};

/// Static or constant-velocity sphere obstacle.
struct SphereObstacle {
  Vec3 center{Vec3::Zero()};  // [m]
  double radius{1.0};         // [m]
  Vec3 velocity{Vec3::Zero()};  // [m/s], zero for static

  /// Center extrapolated dt seconds ahead at constant velocity.
  Vec3 center_at(double dt) const { return center + dt * velocity; }
};

/// Scalar decrease rates for the stability and safety constraints plus the
/// vehicle's own safety-sphere radius.
struct RateParams {
  double alpha{0.1};        // Lyapunov decrease rate, in (0, 1)
  double gamma{0.2};        // barrier decay rate, in [0, 1]
  double robot_radius{0.5}; // r_rb [m]

  void validate() const;
};

/// V = (x - x_t)' W (x - x_t); zero iff state equals target.
double clf_value(const RigidBodyState& state, const RigidBodyState& target,
                 const QuadraticClfWeights& weights);

/// Residual of the relaxed decrease condition
///   (1 - alpha) V_curr + s_v - V_next >= 0.
/// Nonnegative iff the constraint is satisfied.
double clf_constraint_residual(double v_next, double v_curr, double alpha, double s_v);

/// B = ||p - center||^2 - (r_rb + r_ob)^2. Nonnegative iff p is in the safe
/// set of this obstacle.
double barrier_value(const Vec3& position, const SphereObstacle& obstacle,
                     double robot_radius);

/// Residual of the decay-rate-relaxed barrier condition
///   B_next - s_h (1 - gamma) B_curr >= 0.
/// With s_h = 1 this is the plain discrete barrier condition.
double cbf_constraint_residual(double b_next, double b_curr, double gamma, double s_h);

}  // namespace auvfleet
