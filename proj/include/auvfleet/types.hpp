#pragma once

#include <Eigen/Dense>

namespace auvfleet {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Vec12 = Eigen::Matrix<double, 12, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat12 = Eigen::Matrix<double, 12, 12>;
using Mat12x6 = Eigen::Matrix<double, 12, 6>;

/// NED position plus Z-Y-X Euler orientation (roll, pitch, yaw).
struct Pose {
  Vec3 position{Vec3::Zero()};     // north, east, down [m]
  Vec3 orientation{Vec3::Zero()};  // phi, theta, psi [rad]
};

/// Body-frame velocity: (u, v, w) linear, (p, q, r) angular.
struct BodyVelocity {
  Vec3 linear{Vec3::Zero()};   // [m/s]
  Vec3 angular{Vec3::Zero()};  // [rad/s]
};

/// Full 12-state of one vehicle.
struct RigidBodyState {
  Pose pose;
  BodyVelocity velocity;

  /// Layout: [x y z phi theta psi u v w p q r].
  Vec12 flatten() const {
    Vec12 out;
    out << pose.position, pose.orientation, velocity.linear, velocity.angular;
    return out;
  }

  static RigidBodyState unflatten(const Vec12& x) {
    RigidBodyState s;
    s.pose.position = x.segment<3>(0);
    s.pose.orientation = x.segment<3>(3);
    s.velocity.linear = x.segment<3>(6);
    s.velocity.angular = x.segment<3>(9);
    return s;
  }
};

/// Body-frame wrench: forces [N] and torques [N m].
struct ControlInput {
  Vec3 force{Vec3::Zero()};
  Vec3 torque{Vec3::Zero()};

  Vec6 flatten() const {
    Vec6 out;
    out << force, torque;
    return out;
  }

  static ControlInput unflatten(const Vec6& tau) {
    ControlInput u;
    u.force = tau.segment<3>(0);
    u.torque = tau.segment<3>(3);
    return u;
  }
};

/// Pose offset of a follower relative to its leader:
/// [dx dy dz dphi dtheta dpsi].
struct FormationVector {
  Vec6 offset{Vec6::Zero()};
};

}  // namespace auvfleet
