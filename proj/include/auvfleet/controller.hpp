#pragma once

#include <optional>
#include <vector>

#include "auvfleet/ocp.hpp"
#include "auvfleet/solver.hpp"

namespace auvfleet {

enum class AgentRole { kLeader, kFollower };

/// One leader broadcast: own state plus the formation vector intended for
/// the receiving follower.
struct AgentMessage {
  int sender{0};
  RigidBodyState state;
  FormationVector formation;
  int timestamp{0};  // sample index k
};

struct ControllerConfig {
  AgentRole role{AgentRole::kLeader};
  OcpWeights weights{OcpWeights::defaults()};
  RateParams rates;
  int horizon{20};
  double dt{0.1};
  double comm_range{25.0};
  bool warm_start{true};
  bool extrapolate_obstacles{false};
  SolverConfig solver;
};

struct StepStats {
  int iterations{0};
  SolverStatus status{SolverStatus::kConverged};
  double solve_time{0.0};
  double max_slack_decrease{0.0};  // max s_v over the horizon
  double min_slack_decay{1.0};     // min s_h over the horizon
  bool link_ok{true};
  bool fallback_input{false};
};

/// Receding-horizon controller for one agent. Owns its warm start and the
/// last applied input; never shared between threads.
class AgentController {
 public:
  AgentController(int agent_index, ControllerConfig config, VehicleParams vehicle);

  struct StepResult {
    ControlInput input;
    AgentMessage outgoing;
    StepStats stats;
  };

  /// One sampling instant: assemble the parameter vector, build the
  /// role-appropriate program, solve from the warm start, apply the first
  /// input, shift the solution, broadcast. Leaders need a reference window;
  /// followers consume either the inbox or their stored last target.
  /// Throws MissingMessageError for a follower that has never heard from its
  /// leader.
  StepResult step(const RigidBodyState& feedback,
                  const std::optional<AgentMessage>& inbox,
                  const std::optional<ReferenceWindow>& reference,
                  const std::vector<SphereObstacle>& sensed_obstacles,
                  const std::optional<FormationVector>& formation_for_follower,
                  int timestep);

  int index() const { return index_; }
  const ControllerConfig& config() const { return config_; }
  bool has_warm_start() const { return have_warm_; }
  const VectorXd& warm_start() const { return warm_; }

  /// Raw decision vector returned by the most recent solve.
  const VectorXd& last_solution() const { return last_solution_; }

 private:
  int index_;
  ControllerConfig config_;
  VehicleParams vehicle_;
  VectorXd warm_;
  VectorXd last_solution_;
  bool have_warm_{false};
  std::optional<LeaderSnapshot> last_target_;
  ControlInput last_input_;
  bool have_last_input_{false};
};

}  // namespace auvfleet
