#pragma once

#include <random>

#include "auvfleet/vehicle.hpp"

namespace auvfleet::testing {

/// Independent fine-step explicit-Euler integrator used as the ground truth
/// for the RK4 map. Deliberately avoids rk4_step.
inline RigidBodyState euler_oracle(const RigidBodyState& state, const ControlInput& input,
                                   const VehicleParams& params, double horizon,
                                   double substep) {
  Vec12 x = state.flatten();
  const long long steps = std::llround(horizon / substep);
  for (long long i = 0; i < steps; ++i)
    x += substep * continuous_dynamics(RigidBodyState::unflatten(x), input, params);
  return RigidBodyState::unflatten(x);
}

/// Random states away from the Euler singularity and with moderate rates,
/// so that a 1e-4 s Euler reference stays within 1e-4 of the truth over 1 s.
inline RigidBodyState random_state(std::mt19937& rng) {
  std::uniform_real_distribution<double> pos(-10.0, 10.0);
  std::uniform_real_distribution<double> att(-0.2, 0.2);
  std::uniform_real_distribution<double> lin(-0.3, 0.3);
  std::uniform_real_distribution<double> ang(-0.25, 0.25);
  RigidBodyState s;
  for (int i = 0; i < 3; ++i) {
    s.pose.position(i) = pos(rng);
    s.pose.orientation(i) = att(rng);
    s.velocity.linear(i) = lin(rng);
    s.velocity.angular(i) = ang(rng);
  }
  return s;
}

inline ControlInput random_input(std::mt19937& rng) {
  std::uniform_real_distribution<double> force(-5.0, 5.0);
  std::uniform_real_distribution<double> torque(-0.4, 0.4);
  ControlInput u;
  for (int i = 0; i < 3; ++i) {
    u.force(i) = force(rng);
    u.torque(i) = torque(rng);
  }
  return u;
}

/// Neutrally buoyant parameter set with the buoyancy centre at the origin:
/// zero velocity and zero input is an exact equilibrium.
inline VehicleParams neutral_params() {
  VehicleParams p;
  p.buoyancy = p.weight;
  p.center_of_buoyancy = Vec3::Zero();
  return p;
}

}  // namespace auvfleet::testing
