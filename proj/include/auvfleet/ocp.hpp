#pragma once

#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "auvfleet/nlp.hpp"
#include "auvfleet/safety.hpp"
#include "auvfleet/types.hpp"
#include "auvfleet/vehicle.hpp"

namespace auvfleet {

/// Quadratic weights of one agent's optimal control problem.
struct OcpWeights {
  Mat12 state_weight{Mat12::Identity()};  // tracking error weight
  Mat6 input_weight{Mat6::Identity()};    // control effort weight
  QuadraticClfWeights clf;                // Lyapunov weight
  double slack_decrease_weight{1000.0};   // penalty on s_v^2
  double slack_decay_weight{100.0};       // penalty on (s_h - 1)^2

  static OcpWeights defaults();
  void validate() const;
};

/// Time-indexed reference slice for the leader: horizon + 1 samples.
struct ReferenceWindow {
  std::vector<RigidBodyState> states;
};

/// One leader broadcast as seen by a follower, held constant across the
/// prediction horizon.
struct LeaderSnapshot {
  RigidBodyState state;
  FormationVector formation;
  double comm_range{0.0};
};

/// Problem parameter vector: everything that changes between solves but is
/// fixed within one solve.
struct ParamVector {
  RigidBodyState feedback;
  std::variant<ReferenceWindow, LeaderSnapshot> target{ReferenceWindow{}};
  std::vector<SphereObstacle> obstacles;
  bool extrapolate_obstacles{false};
};

/// Block layout of the decision vector:
///   [ states 12(N+1) | inputs 6N | s_v N | s_h N ],  total 20N + 12.
struct DecisionLayout {
  int horizon{0};
  static constexpr int kStateDim = 12;
  static constexpr int kInputDim = 6;

  int size() const { return kStateDim * (horizon + 1) + (kInputDim + 2) * horizon; }
  int state_offset(int m) const { return kStateDim * m; }
  int input_offset(int m) const {
    return kStateDim * (horizon + 1) + kInputDim * m;
  }
  int slack_decrease_offset(int m) const {  // s_v(m)
    return kStateDim * (horizon + 1) + kInputDim * horizon + m;
  }
  int slack_decay_offset(int m) const {  // s_h(m)
    return kStateDim * (horizon + 1) + (kInputDim + 1) * horizon + m;
  }
};

/// l = e' W_xi e + tau' W_u tau with e = state - target, flattened.
double stage_cost(const RigidBodyState& state, const ControlInput& input,
                  const RigidBodyState& target, const OcpWeights& weights);

/// W1 s_v^2 + W2 (s_h - 1)^2; zero exactly at the unrelaxed optimum.
double slack_cost(double s_v, double s_h, double w1, double w2);

/// Componentwise pose target leader + offset; velocity target equals the
/// leader velocity.
RigidBodyState follower_target(const RigidBodyState& leader,
                               const FormationVector& formation);

/// Euclidean distance between leader and follower positions.
double comm_distance(const Vec3& leader_position, const Vec3& follower_position);

/// Receding-horizon shift: state/input blocks move one stage left with the
/// last entries duplicated; slacks reset to s_v = 0, s_h = 1.
VectorXd shift_warm_start(const VectorXd& previous, const DecisionLayout& layout);

/// Multiple-shooting transcription of one agent's tracking problem.
///
/// Equalities H (12(N+1) rows): initial-condition pin followed by the N
/// dynamics defects x(m+1) - F(x(m), u(m)).
///
/// Inequalities G (<= 0), stacked per stage m = 0..N-1:
///   - Lyapunov decrease:  V(x(m+1)) - (1-alpha) V(x(m)) - s_v(m)
///   - per obstacle:       s_h(m)(1-gamma) B(p(m)) - B(p(m+1))
///   - followers only:     ||p_L - p(m+1)|| - d_c
/// The communication rows constrain stages 1..N; stage 0 is pinned by H.
class TrackingNlp : public NlpProblem {
 public:
  enum class Role { kLeader, kFollower };

  TrackingNlp(Role role, OcpWeights weights, RateParams rates, ParamVector params,
              int horizon, double dt, VehicleParams vehicle);

  int num_vars() const override { return layout_.size(); }
  int num_equalities() const override;
  int num_inequalities() const override;
  VectorXd lower_bounds() const override;
  VectorXd upper_bounds() const override;
  double objective(const VectorXd& x) const override;
  VectorXd objective_gradient(const VectorXd& x) const override;
  VectorXd equalities(const VectorXd& x) const override;
  VectorXd inequalities(const VectorXd& x) const override;
  MatrixXd equality_jacobian(const VectorXd& x) const override;
  MatrixXd inequality_jacobian(const VectorXd& x) const override;
  MatrixXd lagrangian_hessian(const VectorXd& x, double sigma, const VectorXd& lambda,
                              const VectorXd& mu) const override;

  Role role() const { return role_; }
  const DecisionLayout& layout() const { return layout_; }
  double dt() const { return dt_; }
  int num_obstacles() const { return static_cast<int>(obstacles_.size()); }
  const Vec12& stage_target(int m) const { return targets_.at(m); }
  const ParamVector& params() const { return params_; }

  /// Decision vector with every state at the feedback, inputs at the hover
  /// wrench, s_v = 0, s_h = 1.
  VectorXd cold_start() const;

 private:
  int rows_per_stage() const;
  Vec3 obstacle_center(int obstacle, int stage) const;

  Role role_;
  OcpWeights weights_;
  RateParams rates_;
  ParamVector params_;
  DecisionLayout layout_;
  double dt_;
  VehicleParams vehicle_;

  std::vector<Vec12> targets_;  // per-stage tracking targets, N+1 entries
  std::vector<SphereObstacle> obstacles_;
  std::optional<LeaderSnapshot> comm_;  // follower communication constraint
  MatrixXd objective_hessian_;          // constant quadratic curvature
};

std::unique_ptr<TrackingNlp> build_leader_nlp(const OcpWeights& weights,
                                              const RateParams& rates,
                                              const ParamVector& params, int horizon,
                                              double dt, const VehicleParams& vehicle);

std::unique_ptr<TrackingNlp> build_follower_nlp(const OcpWeights& weights,
                                                const RateParams& rates,
                                                const ParamVector& params, int horizon,
                                                double dt, const VehicleParams& vehicle);

}  // namespace auvfleet
