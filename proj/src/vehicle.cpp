#include "auvfleet/vehicle.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace auvfleet {
namespace {

using nlohmann::json;

Mat3 skew(const Vec3& a) {
  Mat3 s;
  s << 0.0, -a.z(), a.y(),
       a.z(), 0.0, -a.x(),
       -a.y(), a.x(), 0.0;
  return s;
}

Mat3 rot_x(double phi) {
  const double c = std::cos(phi), s = std::sin(phi);
  Mat3 r;
  r << 1, 0, 0,
       0, c, -s,
       0, s, c;
  return r;
}

Mat3 rot_y(double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  Mat3 r;
  r << c, 0, s,
       0, 1, 0,
       -s, 0, c;
  return r;
}

Mat3 rot_z(double psi) {
  const double c = std::cos(psi), s = std::sin(psi);
  Mat3 r;
  r << c, -s, 0,
       s, c, 0,
       0, 0, 1;
  return r;
}

Mat3 drot_x(double phi) {
  const double c = std::cos(phi), s = std::sin(phi);
  Mat3 r;
  r << 0, 0, 0,
       0, -s, -c,
       0, c, -s;
  return r;
}

Mat3 drot_y(double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  Mat3 r;
  r << -s, 0, c,
       0, 0, 0,
       -c, 0, -s;
  return r;
}

Mat3 drot_z(double psi) {
  const double c = std::cos(psi), s = std::sin(psi);
  Mat3 r;
  r << -s, -c, 0,
       c, -s, 0,
       0, 0, 0;
  return r;
}

void check_pitch(double theta, double eps_sing) {
  if (std::abs(std::cos(theta)) <= eps_sing) {
    std::ostringstream msg;
    msg << "euler kinematics singular: pitch " << theta
        << " rad has |cos(theta)| <= " << eps_sing;
    throw SingularPoseError(msg.str());
  }
}

// d(T(phi, theta))/dphi and /dtheta for the Euler-rate transform.
Mat3 euler_rate_transform_dphi(const Vec3& rpy) {
  const double cphi = std::cos(rpy(0)), sphi = std::sin(rpy(0));
  const double tth = std::tan(rpy(1)), cth = std::cos(rpy(1));
  Mat3 d;
  d << 0, cphi * tth, -sphi * tth,
       0, -sphi, -cphi,
       0, cphi / cth, -sphi / cth;
  return d;
}

Mat3 euler_rate_transform_dtheta(const Vec3& rpy) {
  const double cphi = std::cos(rpy(0)), sphi = std::sin(rpy(0));
  const double cth = std::cos(rpy(1)), sth = std::sin(rpy(1));
  const double c2 = cth * cth;
  Mat3 d;
  d << 0, sphi / c2, cphi / c2,
       0, 0, 0,
       0, sphi * sth / c2, cphi * sth / c2;
  return d;
}

// dg/d(phi, theta); g does not depend on position or yaw.
Eigen::Matrix<double, 6, 2> restoring_force_jacobian(const VehicleParams& p, const Vec3& rpy) {
  const double cphi = std::cos(rpy(0)), sphi = std::sin(rpy(0));
  const double cth = std::cos(rpy(1)), sth = std::sin(rpy(1));
  const double wb = p.weight - p.buoyancy;
  const double B = p.buoyancy;
  const double xb = p.center_of_buoyancy.x();
  const double yb = p.center_of_buoyancy.y();
  const double zb = p.center_of_buoyancy.z();

  Eigen::Matrix<double, 6, 2> d = Eigen::Matrix<double, 6, 2>::Zero();
  // column 0: d/dphi, column 1: d/dtheta
  d(0, 1) = wb * cth;
  d(1, 0) = -wb * cth * cphi;
  d(1, 1) = wb * sth * sphi;
  d(2, 0) = wb * cth * sphi;
  d(2, 1) = wb * sth * cphi;
  d(3, 0) = B * (-yb * cth * sphi - zb * cth * cphi);
  d(3, 1) = B * (-yb * sth * cphi + zb * sth * sphi);
  d(4, 0) = B * xb * cth * sphi;
  d(4, 1) = B * (xb * sth * cphi - zb * cth);
  d(5, 0) = B * xb * cth * cphi;
  d(5, 1) = B * (-xb * sth * sphi + yb * cth);
  return d;
}

// d(C(v) v)/dv for the skew-symmetric construction below.
Mat6 coriolis_product_jacobian(const VehicleParams& p, const Vec6& v) {
  const Vec6 md = p.mass_diagonal();
  const Mat3 m1 = md.head<3>().asDiagonal();
  const Mat3 m2 = md.tail<3>().asDiagonal();
  const Vec3 nu1 = v.head<3>();
  const Vec3 nu2 = v.tail<3>();

  Mat6 d;
  d.topLeftCorner<3, 3>() = skew(nu2) * m1;
  d.topRightCorner<3, 3>() = -skew(m1 * nu1);
  d.bottomLeftCorner<3, 3>() = skew(nu1) * m1 - skew(m1 * nu1);
  d.bottomRightCorner<3, 3>() = skew(nu2) * m2 - skew(m2 * nu2);
  return d;
}

Vec6 get_vec6(const json& j, const std::string& key, const Vec6& fallback) {
  if (!j.contains(key)) return fallback;
  const auto& arr = j.at(key);
  if (!arr.is_array() || arr.size() != 6)
    throw ConfigError("vehicle field '" + key + "' must be an array of 6 numbers");
  Vec6 out;
  for (int i = 0; i < 6; ++i) out(i) = arr.at(i).get<double>();
  return out;
}

Vec3 get_vec3(const json& j, const std::string& key, const Vec3& fallback) {
  if (!j.contains(key)) return fallback;
  const auto& arr = j.at(key);
  if (!arr.is_array() || arr.size() != 3)
    throw ConfigError("vehicle field '" + key + "' must be an array of 3 numbers");
  Vec3 out;
  for (int i = 0; i < 3; ++i) out(i) = arr.at(i).get<double>();
  return out;
}

// Bound arrays accept null entries meaning "unbounded on this side".
template <typename Vec>
Vec get_bound(const json& arr, const std::string& key, double inf_sign) {
  Vec out;
  if (!arr.is_array() || arr.size() != static_cast<size_t>(out.size()))
    throw ConfigError("vehicle field '" + key + "' must be an array of " +
                      std::to_string(out.size()) + " numbers or nulls");
  for (int i = 0; i < out.size(); ++i) {
    const auto& e = arr.at(i);
    out(i) = e.is_null() ? inf_sign * 1e19 : e.get<double>();
  }
  return out;
}

}  // namespace

Vec6 VehicleParams::mass_diagonal() const {
  Vec6 d;
  d << mass + added_mass(0), mass + added_mass(1), mass + added_mass(2),
       inertia(0) + added_mass(3), inertia(1) + added_mass(4), inertia(2) + added_mass(5);
  return d;
}

Mat6 VehicleParams::mass_matrix() const { return mass_diagonal().asDiagonal(); }

void VehicleParams::validate() const {
  if (!(mass > 0.0)) throw ConfigError("vehicle mass must be positive");
  if (!(inertia.array() > 0.0).all())
    throw ConfigError("vehicle inertia components must be positive");
  if (!(mass_diagonal().array() > 0.0).all())
    throw ConfigError("vehicle mass matrix must be positive definite");
  if (!(state_lower.array() < state_upper.array()).all())
    throw ConfigError("vehicle state bounds must satisfy lower < upper");
  if (!(input_lower.array() < input_upper.array()).all())
    throw ConfigError("vehicle input bounds must satisfy lower < upper");
  if (!(pitch_singularity_margin > 0.0))
    throw ConfigError("pitch singularity margin must be positive");
  const double pitch_limit = std::max(std::abs(state_lower(4)), std::abs(state_upper(4)));
  if (pitch_limit >= M_PI / 2.0 - pitch_singularity_margin)
    throw ConfigError("pitch bounds must stay below pi/2 minus the singularity margin");
}

VehicleParams VehicleParams::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("vehicle json parse error: ") + e.what());
  }
  static const char* known[] = {
      "mass", "added_mass", "inertia", "linear_damping", "quadratic_damping",
      "weight", "buoyancy", "center_of_buoyancy", "state_bounds", "input_bounds",
      "pitch_singularity_margin"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) throw ConfigError("unknown vehicle field '" + it.key() + "'");
  }

  VehicleParams p;
  if (j.contains("mass")) p.mass = j.at("mass").get<double>();
  p.added_mass = get_vec6(j, "added_mass", p.added_mass);
  p.inertia = get_vec3(j, "inertia", p.inertia);
  p.linear_damping = get_vec6(j, "linear_damping", p.linear_damping);
  p.quadratic_damping = get_vec6(j, "quadratic_damping", p.quadratic_damping);
  if (j.contains("weight")) p.weight = j.at("weight").get<double>();
  if (j.contains("buoyancy")) p.buoyancy = j.at("buoyancy").get<double>();
  p.center_of_buoyancy = get_vec3(j, "center_of_buoyancy", p.center_of_buoyancy);
  if (j.contains("pitch_singularity_margin"))
    p.pitch_singularity_margin = j.at("pitch_singularity_margin").get<double>();
  if (j.contains("state_bounds")) {
    const auto& b = j.at("state_bounds");
    p.state_lower = get_bound<Vec12>(b.at("lower"), "state_bounds.lower", -1.0);
    p.state_upper = get_bound<Vec12>(b.at("upper"), "state_bounds.upper", 1.0);
  }
  if (j.contains("input_bounds")) {
    const auto& b = j.at("input_bounds");
    p.input_lower = get_bound<Vec6>(b.at("lower"), "input_bounds.lower", -1.0);
    p.input_upper = get_bound<Vec6>(b.at("upper"), "input_bounds.upper", 1.0);
  }
  p.validate();
  return p;
}

VehicleParams VehicleParams::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open vehicle file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

Mat3 body_to_ned_rotation(const Vec3& rpy) {
  return rot_z(rpy(2)) * rot_y(rpy(1)) * rot_x(rpy(0));
}

Mat3 euler_rate_transform(const Vec3& rpy, double eps_sing) {
  check_pitch(rpy(1), eps_sing);
  const double cphi = std::cos(rpy(0)), sphi = std::sin(rpy(0));
  const double cth = std::cos(rpy(1)), tth = std::tan(rpy(1));
  Mat3 t;
  t << 1, sphi * tth, cphi * tth,
       0, cphi, -sphi,
       0, sphi / cth, cphi / cth;
  return t;
}

Mat6 kinematic_jacobian(const Pose& pose, double eps_sing) {
  Mat6 j = Mat6::Zero();
  j.topLeftCorner<3, 3>() = body_to_ned_rotation(pose.orientation);
  j.bottomRightCorner<3, 3>() = euler_rate_transform(pose.orientation, eps_sing);
  return j;
}

Mat6 coriolis_matrix(const VehicleParams& params, const Vec6& v) {
  const Vec6 md = params.mass_diagonal();
  const Vec3 nu1 = v.head<3>();
  const Vec3 nu2 = v.tail<3>();
  const Mat3 s1 = skew(Vec3(md.head<3>().cwiseProduct(nu1)));
  const Mat3 s2 = skew(Vec3(md.tail<3>().cwiseProduct(nu2)));

  Mat6 c = Mat6::Zero();
  c.topRightCorner<3, 3>() = -s1;
  c.bottomLeftCorner<3, 3>() = -s1;
  c.bottomRightCorner<3, 3>() = -s2;
  return c;
}

Vec6 damping_force(const VehicleParams& params, const Vec6& v) {
  return params.linear_damping.cwiseProduct(v) +
         params.quadratic_damping.cwiseProduct(v.cwiseAbs()).cwiseProduct(v);
}

Vec6 restoring_force(const VehicleParams& params, const Vec3& rpy) {
  const double cphi = std::cos(rpy(0)), sphi = std::sin(rpy(0));
  const double cth = std::cos(rpy(1)), sth = std::sin(rpy(1));
  const double wb = params.weight - params.buoyancy;
  const double B = params.buoyancy;
  const double xb = params.center_of_buoyancy.x();
  const double yb = params.center_of_buoyancy.y();
  const double zb = params.center_of_buoyancy.z();

  Vec6 g;
  g << wb * sth,
       -wb * cth * sphi,
       -wb * cth * cphi,
       B * (yb * cth * cphi - zb * cth * sphi),
       -B * (zb * sth + xb * cth * cphi),
       B * (xb * cth * sphi + yb * sth);
  return g;
}

Vec6 hover_wrench(const VehicleParams& params, const Vec3& rpy) {
  Vec6 tau = restoring_force(params, rpy);
  return tau.cwiseMax(params.input_lower).cwiseMin(params.input_upper);
}

Vec12 continuous_dynamics(const RigidBodyState& state, const ControlInput& input,
                          const VehicleParams& params) {
  const Vec3 rpy = state.pose.orientation;
  check_pitch(rpy(1), params.pitch_singularity_margin);

  const Vec6 v = (Vec6() << state.velocity.linear, state.velocity.angular).finished();
  const Vec6 tau = input.flatten();

  const Mat3 rot = body_to_ned_rotation(rpy);
  const Mat3 t = euler_rate_transform(rpy, params.pitch_singularity_margin);

  const Mat6 c = coriolis_matrix(params, v);
  const Vec6 rhs = tau - c * v - damping_force(params, v) - restoring_force(params, rpy);
  const Vec6 vdot = rhs.cwiseQuotient(params.mass_diagonal());

  Vec12 xdot;
  xdot.segment<3>(0) = rot * state.velocity.linear;
  xdot.segment<3>(3) = t * state.velocity.angular;
  xdot.segment<6>(6) = vdot;
  return xdot;
}

DynamicsJacobians continuous_dynamics_jacobians(const RigidBodyState& state,
                                                const ControlInput& input,
                                                const VehicleParams& params) {
  (void)input;  // dynamics are affine in tau
  const Vec3 rpy = state.pose.orientation;
  check_pitch(rpy(1), params.pitch_singularity_margin);

  const Vec6 v = (Vec6() << state.velocity.linear, state.velocity.angular).finished();
  const Vec3 nu1 = v.head<3>();
  const Vec3 nu2 = v.tail<3>();
  const Vec6 minv = params.mass_diagonal().cwiseInverse();

  const Mat3 rz = rot_z(rpy(2)), ry = rot_y(rpy(1)), rx = rot_x(rpy(0));
  const Mat3 rot = rz * ry * rx;
  const Mat3 drot_dphi = rz * ry * drot_x(rpy(0));
  const Mat3 drot_dtheta = rz * drot_y(rpy(1)) * rx;
  const Mat3 drot_dpsi = drot_z(rpy(2)) * ry * rx;

  const Mat3 t = euler_rate_transform(rpy, params.pitch_singularity_margin);
  const Mat3 dt_dphi = euler_rate_transform_dphi(rpy);
  const Mat3 dt_dtheta = euler_rate_transform_dtheta(rpy);

  DynamicsJacobians out;
  out.dstate = Mat12::Zero();
  out.dinput = Mat12x6::Zero();

  // Pose-rate rows.
  out.dstate.block<3, 1>(0, 3) = drot_dphi * nu1;
  out.dstate.block<3, 1>(0, 4) = drot_dtheta * nu1;
  out.dstate.block<3, 1>(0, 5) = drot_dpsi * nu1;
  out.dstate.block<3, 3>(0, 6) = rot;
  out.dstate.block<3, 1>(3, 3) = dt_dphi * nu2;
  out.dstate.block<3, 1>(3, 4) = dt_dtheta * nu2;
  out.dstate.block<3, 3>(3, 9) = t;

  // Velocity-rate rows: M^-1 (tau - C v - D v - g).
  const Mat6 dcv = coriolis_product_jacobian(params, v);
  const Vec6 ddamp =
      params.linear_damping + 2.0 * params.quadratic_damping.cwiseProduct(v.cwiseAbs());
  Mat6 dvel = -dcv;
  dvel.diagonal() -= ddamp;
  out.dstate.block<6, 6>(6, 6) = minv.asDiagonal() * dvel;

  const Eigen::Matrix<double, 6, 2> dg = restoring_force_jacobian(params, rpy);
  out.dstate.block<6, 1>(6, 3) = -minv.cwiseProduct(dg.col(0));
  out.dstate.block<6, 1>(6, 4) = -minv.cwiseProduct(dg.col(1));

  out.dinput.block<6, 6>(6, 0) = minv.asDiagonal();
  return out;
}

RigidBodyState rk4_step(const RigidBodyState& state, const ControlInput& input,
                        const VehicleParams& params, double dt) {
  const Vec12 x = state.flatten();
  const auto f = [&](const Vec12& xi) {
    return continuous_dynamics(RigidBodyState::unflatten(xi), input, params);
  };
  const Vec12 k1 = f(x);
  const Vec12 k2 = f(x + 0.5 * dt * k1);
  const Vec12 k3 = f(x + 0.5 * dt * k2);
  const Vec12 k4 = f(x + dt * k3);
  return RigidBodyState::unflatten(x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

Rk4Result rk4_step_with_jacobians(const RigidBodyState& state, const ControlInput& input,
                                  const VehicleParams& params, double dt) {
  const Vec12 x = state.flatten();
  const auto f = [&](const Vec12& xi) {
    return continuous_dynamics(RigidBodyState::unflatten(xi), input, params);
  };
  const auto fj = [&](const Vec12& xi) {
    return continuous_dynamics_jacobians(RigidBodyState::unflatten(xi), input, params);
  };

  const Vec12 k1 = f(x);
  const Vec12 x2 = x + 0.5 * dt * k1;
  const Vec12 k2 = f(x2);
  const Vec12 x3 = x + 0.5 * dt * k2;
  const Vec12 k3 = f(x3);
  const Vec12 x4 = x + dt * k3;
  const Vec12 k4 = f(x4);

  const DynamicsJacobians j1 = fj(x);
  const DynamicsJacobians j2 = fj(x2);
  const DynamicsJacobians j3 = fj(x3);
  const DynamicsJacobians j4 = fj(x4);

  const Mat12 eye = Mat12::Identity();
  const Mat12 k1x = j1.dstate;
  const Mat12x6 k1u = j1.dinput;
  const Mat12 k2x = j2.dstate * (eye + 0.5 * dt * k1x);
  const Mat12x6 k2u = j2.dstate * (0.5 * dt * k1u) + j2.dinput;
  const Mat12 k3x = j3.dstate * (eye + 0.5 * dt * k2x);
  const Mat12x6 k3u = j3.dstate * (0.5 * dt * k2u) + j3.dinput;
  const Mat12 k4x = j4.dstate * (eye + dt * k3x);
  const Mat12x6 k4u = j4.dstate * (dt * k3u) + j4.dinput;

  Rk4Result out;
  out.next = RigidBodyState::unflatten(x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
  out.dstate = eye + dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
  out.dinput = dt / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
  return out;
}

}  // namespace auvfleet
