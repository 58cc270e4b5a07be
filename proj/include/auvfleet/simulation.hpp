#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "auvfleet/controller.hpp"
#include "auvfleet/proximity_graph.hpp"
#include "auvfleet/scenario.hpp"

namespace auvfleet {

struct AgentRecord {
  RigidBodyState state;
  ControlInput input;  // applied over [t, t+dt); zero in the terminal record
  StepStats stats;
};

struct StepRecord {
  double t{0.0};
  std::vector<AgentRecord> agents;
  std::vector<Vec3> obstacle_centers;
  std::vector<std::pair<int, int>> edges;
  bool connected{true};
  bool terminal{false};
};

struct Metrics {
  double min_obstacle_clearance{0.0};
  bool obstacle_clearance_defined{false};
  double max_leader_tracking_error{0.0};  // post-transient, away from events
  double max_interagent_comm_distance{0.0};
  bool comm_distance_defined{false};
  std::vector<double> formation_rmse_per_interval;
  int connectivity_violations{0};
};

struct SimLog {
  double dt{0.1};
  int agent_count{0};
  std::vector<StepRecord> steps;  // one record per sampling instant, t = k dt
  Metrics metrics;
  bool aborted{false};
  std::string abort_reason;
};

/// Advance every vehicle one RK4 step with its applied input and every
/// obstacle one constant-velocity step.
std::pair<std::vector<RigidBodyState>, std::vector<SphereObstacle>> step_world(
    const std::vector<RigidBodyState>& states, const std::vector<ControlInput>& inputs,
    const std::vector<SphereObstacle>& obstacles,
    const std::vector<VehicleParams>& vehicles, double dt);

/// Lockstep closed-loop simulation of the scenario: rebuild the proximity
/// graph, evaluate the formation schedule, step every controller (chain or
/// delayed message order), integrate, log. Deterministic for a fixed config.
SimLog run_scenario(const ScenarioConfig& config,
                    const std::function<void(const StepRecord&)>& on_step = {});

Metrics compute_metrics(const SimLog& log, const ScenarioConfig& config);

/// Scenario-level run invariants (safety margin, communication range,
/// connectivity, formation settling). Empty when all hold.
std::vector<std::string> check_run_invariants(const SimLog& log,
                                              const ScenarioConfig& config);

}  // namespace auvfleet
