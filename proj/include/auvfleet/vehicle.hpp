#pragma once

#include <string>

#include "auvfleet/errors.hpp"
#include "auvfleet/types.hpp"

namespace auvfleet {

/// Rigid-body and hydrodynamic coefficients of one vehicle, plus its state
/// and input admissible sets. All quantities SI. The mass matrix is diagonal:
/// rigid-body terms plus added mass. Defaults approximate a BlueROV2-class
/// vehicle; they are configuration, not measured ground truth.
struct VehicleParams {
  double mass{11.5};  // [kg]
  Vec6 added_mass{(Vec6() << 5.5, 12.7, 14.57, 0.12, 0.12, 0.12).finished()};
  Vec3 inertia{0.26, 0.23, 0.37};  // Ix, Iy, Iz [kg m^2]
  Vec6 linear_damping{(Vec6() << 4.03, 6.22, 5.18, 0.07, 0.07, 0.07).finished()};
  Vec6 quadratic_damping{(Vec6() << 18.18, 21.66, 36.99, 0.22, 0.22, 0.22).finished()};
  double weight{112.8};    // m*g [N]
  double buoyancy{114.8};  // rho*g*V [N]
  Vec3 center_of_buoyancy{0.0, 0.0, -0.02};  // body frame [m]

  // Admissible sets X and U. Positions are unbounded by default; the pitch
  // bound keeps every admissible pose clear of the Euler singularity.
  Vec12 state_lower{(Vec12() << -1e19, -1e19, -1e19, -1.4, -1.4, -6.4,
                     -2.0, -2.0, -2.0, -1.5, -1.5, -1.5).finished()};
  Vec12 state_upper{(Vec12() << 1e19, 1e19, 1e19, 1.4, 1.4, 6.4,
                     2.0, 2.0, 2.0, 1.5, 1.5, 1.5).finished()};
  Vec6 input_lower{(Vec6() << -40.0, -40.0, -40.0, -10.0, -10.0, -10.0).finished()};
  Vec6 input_upper{(Vec6() << 40.0, 40.0, 40.0, 10.0, 10.0, 10.0).finished()};

  double pitch_singularity_margin{1e-3};  // eps_sing [rad]

  /// Diagonal of the 6x6 mass matrix (rigid body + added mass).
  Vec6 mass_diagonal() const;
  Mat6 mass_matrix() const;

  /// Throws ConfigError on any violated invariant (non-positive mass or
  /// inertia, non-SPD mass matrix, crossed bounds).
  void validate() const;

  static VehicleParams from_json_text(const std::string& text);
  static VehicleParams from_json_file(const std::string& path);
};

/// Body-to-NED rotation, Z-Y-X Euler convention.
Mat3 body_to_ned_rotation(const Vec3& rpy);

/// Euler-rate transform T(phi, theta): angle rates = T * body angular rates.
/// Throws SingularPoseError when |cos theta| <= eps_sing.
Mat3 euler_rate_transform(const Vec3& rpy, double eps_sing = 1e-3);

/// Block-diagonal 6x6 kinematic map: diag(R(rpy), T(rpy)).
Mat6 kinematic_jacobian(const Pose& pose, double eps_sing = 1e-3);

/// Skew-symmetric Coriolis/centripetal matrix built from the diagonal mass
/// matrix, so that v' * C(v) * v = 0 for every v.
Mat6 coriolis_matrix(const VehicleParams& params, const Vec6& v);

/// D(v) * v with D(v) = diag(linear) + diag(quadratic .* |v|).
Vec6 damping_force(const VehicleParams& params, const Vec6& v);

/// Restoring force/moment vector g(eta) from weight, buoyancy and the
/// center-of-buoyancy offset (enters the dynamics with a minus sign).
Vec6 restoring_force(const VehicleParams& params, const Vec3& rpy);

/// Wrench that balances g(eta) at the given attitude, clipped to U.
Vec6 hover_wrench(const VehicleParams& params, const Vec3& rpy);

/// Time derivative of the flattened state:
///   pose rate  = J(eta) * v,
///   velocity rate = M^-1 (tau - C(v) v - D(v) v - g(eta)).
Vec12 continuous_dynamics(const RigidBodyState& state, const ControlInput& input,
                          const VehicleParams& params);

struct DynamicsJacobians {
  Mat12 dstate;
  Mat12x6 dinput;
};

/// Analytic Jacobians of continuous_dynamics with respect to state and input.
DynamicsJacobians continuous_dynamics_jacobians(const RigidBodyState& state,
                                                const ControlInput& input,
                                                const VehicleParams& params);

/// Classical fixed-step RK4 map F(state, input) over one interval of length
/// dt with the input held constant.
RigidBodyState rk4_step(const RigidBodyState& state, const ControlInput& input,
                        const VehicleParams& params, double dt);

struct Rk4Result {
  RigidBodyState next;
  Mat12 dstate;   // dF/dx
  Mat12x6 dinput; // dF/du
};

/// RK4 step together with its analytic sensitivities (chain rule through the
/// four stages).
Rk4Result rk4_step_with_jacobians(const RigidBodyState& state, const ControlInput& input,
                                  const VehicleParams& params, double dt);

}  // namespace auvfleet
