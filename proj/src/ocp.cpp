#include "auvfleet/ocp.hpp"

#include <cmath>
#include <limits>

#include "auvfleet/errors.hpp"

namespace auvfleet {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Guard for the communication-distance gradient at coincident positions. The
// constraint value stays exact; only the (sub)gradient is regularized there.
constexpr double kDistanceFloor = 1e-9;

}  // namespace

OcpWeights OcpWeights::defaults() {
  OcpWeights w;
  Vec12 diag;
  diag << 10, 10, 10, 5, 5, 5, 1, 1, 1, 1, 1, 1;
  w.state_weight = diag.asDiagonal();
  w.input_weight = 0.01 * Mat6::Identity();
  w.clf.W = diag.asDiagonal();
  // Large s_v penalties (1000+) give the Lyapunov rows multipliers in the
  // tens of thousands during transients and stall any Newton-type method;
  // 10 keeps the decrease constraint authoritative yet tractable.
  w.slack_decrease_weight = 10.0;
  w.slack_decay_weight = 100.0;
  return w;
}

void OcpWeights::validate() const {
  if ((state_weight - state_weight.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw ConfigError("state weight must be symmetric");
  if ((input_weight - input_weight.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw ConfigError("input weight must be symmetric");
  if (Eigen::LLT<Mat12>(state_weight).info() != Eigen::Success)
    throw ConfigError("state weight must be positive definite");
  if (Eigen::LLT<Mat6>(input_weight).info() != Eigen::Success)
    throw ConfigError("input weight must be positive definite");
  clf.validate();
  if (!(slack_decrease_weight > 0.0)) throw ConfigError("W1 must be positive");
  if (!(slack_decay_weight > 0.0)) throw ConfigError("W2 must be positive");
}

double stage_cost(const RigidBodyState& state, const ControlInput& input,
                  const RigidBodyState& target, const OcpWeights& weights) {
  const Vec12 e = state.flatten() - target.flatten();
  const Vec6 tau = input.flatten();
  return e.dot(weights.state_weight * e) + tau.dot(weights.input_weight * tau);
}

double slack_cost(double s_v, double s_h, double w1, double w2) {
  return w1 * s_v * s_v + w2 * (s_h - 1.0) * (s_h - 1.0);
}

RigidBodyState follower_target(const RigidBodyState& leader,
                               const FormationVector& formation) {
  RigidBodyState target = leader;
  target.pose.position += formation.offset.head<3>();
  target.pose.orientation += formation.offset.tail<3>();
  return target;
}

double comm_distance(const Vec3& leader_position, const Vec3& follower_position) {
  return (leader_position - follower_position).norm();
}

VectorXd shift_warm_start(const VectorXd& previous, const DecisionLayout& layout) {
  if (previous.size() != layout.size())
    throw DimensionError("warm-start length does not match layout");
  const int n = layout.horizon;
  VectorXd out(previous.size());
  for (int m = 0; m <= n; ++m) {
    const int src = std::min(m + 1, n);
    out.segment<12>(layout.state_offset(m)) = previous.segment<12>(layout.state_offset(src));
  }
  for (int m = 0; m < n; ++m) {
    const int src = std::min(m + 1, n - 1);
    out.segment<6>(layout.input_offset(m)) = previous.segment<6>(layout.input_offset(src));
  }
  for (int m = 0; m < n; ++m) {
    out(layout.slack_decrease_offset(m)) = 0.0;
    out(layout.slack_decay_offset(m)) = 1.0;
  }
  return out;
}

TrackingNlp::TrackingNlp(Role role, OcpWeights weights, RateParams rates,
                         ParamVector params, int horizon, double dt,
                         VehicleParams vehicle)
    : role_(role),
      weights_(std::move(weights)),
      rates_(rates),
      params_(std::move(params)),
      layout_{horizon},
      dt_(dt),
      vehicle_(std::move(vehicle)) {
  if (horizon < 1) throw DimensionError("horizon must be at least 1");
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");
  weights_.validate();
  rates_.validate();
  vehicle_.validate();

  obstacles_ = params_.obstacles;
  targets_.resize(horizon + 1);
  if (role_ == Role::kLeader) {
    const auto* window = std::get_if<ReferenceWindow>(&params_.target);
    if (window == nullptr)
      throw DimensionError("leader problem requires a reference window");
    if (static_cast<int>(window->states.size()) != horizon + 1)
      throw DimensionError("reference window must hold horizon + 1 samples");
    for (int m = 0; m <= horizon; ++m) targets_[m] = window->states[m].flatten();
  } else {
    const auto* snapshot = std::get_if<LeaderSnapshot>(&params_.target);
    if (snapshot == nullptr)
      throw MissingMessageError("follower problem requires a leader snapshot");
    if (!(snapshot->comm_range > 0.0))
      throw ConfigError("follower communication range must be positive");
    comm_ = *snapshot;
    const Vec12 t = follower_target(snapshot->state, snapshot->formation).flatten();
    for (int m = 0; m <= horizon; ++m) targets_[m] = t;
  }

  objective_hessian_ = MatrixXd::Zero(layout_.size(), layout_.size());
  for (int m = 0; m < horizon; ++m) {
    objective_hessian_.block<12, 12>(layout_.state_offset(m), layout_.state_offset(m)) =
        2.0 * weights_.state_weight;
    objective_hessian_.block<6, 6>(layout_.input_offset(m), layout_.input_offset(m)) =
        2.0 * weights_.input_weight;
    objective_hessian_(layout_.slack_decrease_offset(m), layout_.slack_decrease_offset(m)) =
        2.0 * weights_.slack_decrease_weight;
    objective_hessian_(layout_.slack_decay_offset(m), layout_.slack_decay_offset(m)) =
        2.0 * weights_.slack_decay_weight;
  }
}

int TrackingNlp::rows_per_stage() const {
  return 1 + num_obstacles() + (comm_ ? 1 : 0);
}

int TrackingNlp::num_equalities() const { return 12 * (layout_.horizon + 1); }

int TrackingNlp::num_inequalities() const { return layout_.horizon * rows_per_stage(); }

Vec3 TrackingNlp::obstacle_center(int obstacle, int stage) const {
  const SphereObstacle& ob = obstacles_[obstacle];
  return params_.extrapolate_obstacles ? ob.center_at(stage * dt_) : ob.center;
}

VectorXd TrackingNlp::lower_bounds() const {
  VectorXd lb = VectorXd::Constant(layout_.size(), -kInf);
  // Stage 0 is pinned by the initial-condition equality; keeping X bounds on
  // it would reject feedback sitting exactly on a bound.
  for (int m = 1; m <= layout_.horizon; ++m)
    lb.segment<12>(layout_.state_offset(m)) = vehicle_.state_lower;
  for (int m = 0; m < layout_.horizon; ++m) {
    lb.segment<6>(layout_.input_offset(m)) = vehicle_.input_lower;
    lb(layout_.slack_decrease_offset(m)) = 0.0;
    lb(layout_.slack_decay_offset(m)) = 0.0;
  }
  // Unbounded sentinels in the vehicle file become true infinities here.
  for (int i = 0; i < lb.size(); ++i)
    if (lb(i) <= -1e18) lb(i) = -kInf;
  return lb;
}

VectorXd TrackingNlp::upper_bounds() const {
  VectorXd ub = VectorXd::Constant(layout_.size(), kInf);
  for (int m = 1; m <= layout_.horizon; ++m)
    ub.segment<12>(layout_.state_offset(m)) = vehicle_.state_upper;
  for (int m = 0; m < layout_.horizon; ++m)
    ub.segment<6>(layout_.input_offset(m)) = vehicle_.input_upper;
  for (int i = 0; i < ub.size(); ++i)
    if (ub(i) >= 1e18) ub(i) = kInf;
  return ub;
}

double TrackingNlp::objective(const VectorXd& x) const {
  if (x.size() != layout_.size()) throw DimensionError("decision vector size mismatch");
  double total = 0.0;
  for (int m = 0; m < layout_.horizon; ++m) {
    const Vec12 e = x.segment<12>(layout_.state_offset(m)) - targets_[m];
    const Vec6 tau = x.segment<6>(layout_.input_offset(m));
    total += e.dot(weights_.state_weight * e) + tau.dot(weights_.input_weight * tau);
    total += slack_cost(x(layout_.slack_decrease_offset(m)), x(layout_.slack_decay_offset(m)),
                        weights_.slack_decrease_weight, weights_.slack_decay_weight);
  }
  return total;
}

VectorXd TrackingNlp::objective_gradient(const VectorXd& x) const {
  if (x.size() != layout_.size()) throw DimensionError("decision vector size mismatch");
  VectorXd grad = VectorXd::Zero(x.size());
  for (int m = 0; m < layout_.horizon; ++m) {
    const Vec12 e = x.segment<12>(layout_.state_offset(m)) - targets_[m];
    grad.segment<12>(layout_.state_offset(m)) = 2.0 * (weights_.state_weight * e);
    const Vec6 tau = x.segment<6>(layout_.input_offset(m));
    grad.segment<6>(layout_.input_offset(m)) = 2.0 * (weights_.input_weight * tau);
    grad(layout_.slack_decrease_offset(m)) =
        2.0 * weights_.slack_decrease_weight * x(layout_.slack_decrease_offset(m));
    grad(layout_.slack_decay_offset(m)) =
        2.0 * weights_.slack_decay_weight * (x(layout_.slack_decay_offset(m)) - 1.0);
  }
  return grad;
}

VectorXd TrackingNlp::equalities(const VectorXd& x) const {
  if (x.size() != layout_.size()) throw DimensionError("decision vector size mismatch");
  VectorXd h(num_equalities());
  h.segment<12>(0) = x.segment<12>(layout_.state_offset(0)) - params_.feedback.flatten();
  for (int m = 0; m < layout_.horizon; ++m) {
    const RigidBodyState xm =
        RigidBodyState::unflatten(x.segment<12>(layout_.state_offset(m)));
    const ControlInput um = ControlInput::unflatten(x.segment<6>(layout_.input_offset(m)));
    const Vec12 next = rk4_step(xm, um, vehicle_, dt_).flatten();
    h.segment<12>(12 * (m + 1)) = x.segment<12>(layout_.state_offset(m + 1)) - next;
  }
  return h;
}

MatrixXd TrackingNlp::equality_jacobian(const VectorXd& x) const {
  if (x.size() != layout_.size()) throw DimensionError("decision vector size mismatch");
  MatrixXd jac = MatrixXd::Zero(num_equalities(), x.size());
  jac.block<12, 12>(0, layout_.state_offset(0)) = Mat12::Identity();
  for (int m = 0; m < layout_.horizon; ++m) {
    const RigidBodyState xm =
        RigidBodyState::unflatten(x.segment<12>(layout_.state_offset(m)));
    const ControlInput um = ControlInput::unflatten(x.segment<6>(layout_.input_offset(m)));
    const Rk4Result rk = rk4_step_with_jacobians(xm, um, vehicle_, dt_);
    const int row = 12 * (m + 1);
    jac.block<12, 12>(row, layout_.state_offset(m + 1)) = Mat12::Identity();
    jac.block<12, 12>(row, layout_.state_offset(m)) = -rk.dstate;
    jac.block<12, 6>(row, layout_.input_offset(m)) = -rk.dinput;
  }
  return jac;
}

VectorXd TrackingNlp::inequalities(const VectorXd& x) const {
  if (x.size() != layout_.size()) throw DimensionError("decision vector size mismatch");
  VectorXd g(num_inequalities());
  int row = 0;
  for (int m = 0; m < layout_.horizon; ++m) {
    const Vec12 xm = x.segment<12>(layout_.state_offset(m));
    const Vec12 xn = x.segment<12>(layout_.state_offset(m + 1));
    const Vec12 em = xm - targets_[m];
    const Vec12 en = xn - targets_[m + 1];
    const double v_curr = em.dot(weights_.clf.W * em);
    const double v_next = en.dot(weights_.clf.W * en);
    g(row++) = v_next - (1.0 - rates_.alpha) * v_curr - x(layout_.slack_decrease_offset(m));

    const double s_h = x(layout_.slack_decay_offset(m));
    for (int o = 0; o < num_obstacles(); ++o) {
      SphereObstacle curr = obstacles_[o];
      curr.center = obstacle_center(o, m);
      SphereObstacle next = obstacles_[o];
      next.center = obstacle_center(o, m + 1);
      const double b_curr = barrier_value(xm.head<3>(), curr, rates_.robot_radius);
      const double b_next = barrier_value(xn.head<3>(), next, rates_.robot_radius);
      g(row++) = s_h * (1.0 - rates_.gamma) * b_curr - b_next;
    }

    if (comm_)
      g(row++) = comm_distance(comm_->state.pose.position, xn.head<3>()) - comm_->comm_range;
  }
  return g;
}

MatrixXd TrackingNlp::inequality_jacobian(const VectorXd& x) const {
  if (x.size() != layout_.size()) throw DimensionError("decision vector size mismatch");
  MatrixXd jac = MatrixXd::Zero(num_inequalities(), x.size());
  int row = 0;
  for (int m = 0; m < layout_.horizon; ++m) {
    const Vec12 xm = x.segment<12>(layout_.state_offset(m));
    const Vec12 xn = x.segment<12>(layout_.state_offset(m + 1));
    const Vec12 em = xm - targets_[m];
    const Vec12 en = xn - targets_[m + 1];
    jac.block<1, 12>(row, layout_.state_offset(m)) =
        -(1.0 - rates_.alpha) * 2.0 * (weights_.clf.W * em).transpose();
    jac.block<1, 12>(row, layout_.state_offset(m + 1)) =
        2.0 * (weights_.clf.W * en).transpose();
    jac(row, layout_.slack_decrease_offset(m)) = -1.0;
    ++row;

    const double s_h = x(layout_.slack_decay_offset(m));
    for (int o = 0; o < num_obstacles(); ++o) {
      const Vec3 cm = obstacle_center(o, m);
      const Vec3 cn = obstacle_center(o, m + 1);
      SphereObstacle curr = obstacles_[o];
      curr.center = cm;
      const double b_curr = barrier_value(xm.head<3>(), curr, rates_.robot_radius);
      jac.block<1, 3>(row, layout_.state_offset(m)) =
          s_h * (1.0 - rates_.gamma) * 2.0 * (xm.head<3>() - cm).transpose();
      jac.block<1, 3>(row, layout_.state_offset(m + 1)) =
          -2.0 * (xn.head<3>() - cn).transpose();
      jac(row, layout_.slack_decay_offset(m)) = (1.0 - rates_.gamma) * b_curr;
      ++row;
    }

    if (comm_) {
      const Vec3 diff = xn.head<3>() - comm_->state.pose.position;
      const double dist = std::max(diff.norm(), kDistanceFloor);
      jac.block<1, 3>(row, layout_.state_offset(m + 1)) = diff.transpose() / dist;
      ++row;
    }
  }
  return jac;
}

MatrixXd TrackingNlp::lagrangian_hessian(const VectorXd& x, double sigma,
                                         const VectorXd& lambda,
                                         const VectorXd& mu) const {
  if (x.size() != layout_.size()) throw DimensionError("decision vector size mismatch");
  if (lambda.size() != num_equalities() || mu.size() != num_inequalities())
    throw DimensionError("multiplier size mismatch");

  MatrixXd hess = sigma * objective_hessian_;

  // Defect curvature: per stage, the 18x18 second derivative of
  // -lambda' F(x_m, u_m) by central differences of the analytic stage
  // Jacobians. Dropping it (plain Gauss-Newton) stalls the solver during
  // large transients, where |lambda| dwarfs the input weight.
  for (int m = 0; m < layout_.horizon; ++m) {
    const Eigen::Matrix<double, 12, 1> lam_m = lambda.segment<12>(12 * (m + 1));
    // Small duals leave the Gauss-Newton model accurate enough; the cutoff
    // is set so the skipped curvature stays well below the input weight.
    if (lam_m.cwiseAbs().maxCoeff() < 1.0) continue;

    std::array<int, 18> idx;
    for (int i = 0; i < 12; ++i) idx[i] = layout_.state_offset(m) + i;
    for (int i = 0; i < 6; ++i) idx[12 + i] = layout_.input_offset(m) + i;

    const auto stage_gradient = [&](const VectorXd& z) {
      const RigidBodyState xs = RigidBodyState::unflatten(z.head<12>());
      const ControlInput us = ControlInput::unflatten(z.tail<6>());
      const Rk4Result rk = rk4_step_with_jacobians(xs, us, vehicle_, dt_);
      Eigen::Matrix<double, 18, 1> grad;
      grad.head<12>() = rk.dstate.transpose() * lam_m;
      grad.tail<6>() = rk.dinput.transpose() * lam_m;
      return grad;
    };

    VectorXd z(18);
    for (int i = 0; i < 18; ++i) z(i) = x(idx[i]);
    Eigen::Matrix<double, 18, 18> block;
    try {
      for (int i = 0; i < 18; ++i) {
        const double h = 1e-5 * std::max(1.0, std::abs(z(i)));
        VectorXd zp = z, zm = z;
        zp(i) += h;
        zm(i) -= h;
        block.col(i) = (stage_gradient(zp) - stage_gradient(zm)) / (2.0 * h);
      }
    } catch (const SingularPoseError&) {
      continue;  // near the pitch limit fall back to Gauss-Newton for this stage
    }
    // Symmetrize and flip sign: the defect is x(m+1) - F(x(m), u(m)).
    const Eigen::Matrix<double, 18, 18> sym = -0.5 * (block + block.transpose());
    for (int i = 0; i < 18; ++i)
      for (int j = 0; j < 18; ++j) hess(idx[i], idx[j]) += sym(i, j);
  }
  // Inequality curvature enters convexified: only the positive-semidefinite
  // parts are kept. Carrying the concave terms exactly forces large inertia
  // shifts every iteration, which costs far more steps than the model error.
  int row = 0;
  for (int m = 0; m < layout_.horizon; ++m) {
    const double mu_clf = mu(row++);
    if (mu_clf > 0.0) {
      hess.block<12, 12>(layout_.state_offset(m + 1), layout_.state_offset(m + 1)) +=
          mu_clf * 2.0 * weights_.clf.W;
    }

    const double s_h = x(layout_.slack_decay_offset(m));
    for (int o = 0; o < num_obstacles(); ++o) {
      const double mu_cbf = mu(row++);
      if (mu_cbf <= 0.0) continue;
      const int pm = layout_.state_offset(m);
      hess.block<3, 3>(pm, pm) +=
          mu_cbf * std::max(s_h, 0.0) * (1.0 - rates_.gamma) * 2.0 * Mat3::Identity();
    }

    if (comm_) {
      const double mu_comm = mu(row++);
      if (mu_comm != 0.0) {
        const int pn = layout_.state_offset(m + 1);
        const Vec3 diff = x.segment<3>(pn) - comm_->state.pose.position;
        const double dist = std::max(diff.norm(), kDistanceFloor);
        const Vec3 u = diff / dist;
        hess.block<3, 3>(pn, pn) +=
            mu_comm * (Mat3::Identity() - u * u.transpose()) / dist;
      }
    }
  }
  return hess;
}

VectorXd TrackingNlp::cold_start() const {
  VectorXd x0 = VectorXd::Zero(layout_.size());
  const Vec12 fb = params_.feedback.flatten();
  const Vec6 hover = hover_wrench(vehicle_, params_.feedback.pose.orientation);
  for (int m = 0; m <= layout_.horizon; ++m)
    x0.segment<12>(layout_.state_offset(m)) = fb;
  for (int m = 0; m < layout_.horizon; ++m) {
    x0.segment<6>(layout_.input_offset(m)) = hover;
    x0(layout_.slack_decay_offset(m)) = 1.0;
    // s_v absorbs the Lyapunov rows' violation at the replicated start with
    // a proportional margin, keeping the start strictly inside the feasible
    // region rather than on the constraint boundary.
    const Vec12 e_curr = fb - targets_[m];
    const Vec12 e_next = fb - targets_[m + 1];
    const double v_curr = e_curr.dot(weights_.clf.W * e_curr);
    const double v_next = e_next.dot(weights_.clf.W * e_next);
    const double violation = std::max(0.0, v_next - (1.0 - rates_.alpha) * v_curr);
    x0(layout_.slack_decrease_offset(m)) = 1.25 * violation + 0.1;
  }
  return x0;
}

std::unique_ptr<TrackingNlp> build_leader_nlp(const OcpWeights& weights,
                                              const RateParams& rates,
                                              const ParamVector& params, int horizon,
                                              double dt, const VehicleParams& vehicle) {
  return std::make_unique<TrackingNlp>(TrackingNlp::Role::kLeader, weights, rates, params,
                                       horizon, dt, vehicle);
}

std::unique_ptr<TrackingNlp> build_follower_nlp(const OcpWeights& weights,
                                                const RateParams& rates,
                                                const ParamVector& params, int horizon,
                                                double dt, const VehicleParams& vehicle) {
  return std::make_unique<TrackingNlp>(TrackingNlp::Role::kFollower, weights, rates,
                                       params, horizon, dt, vehicle);
}

}  // namespace auvfleet
