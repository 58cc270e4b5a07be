#include "auvfleet/controller.hpp"

#include <algorithm>

#include "auvfleet/errors.hpp"

namespace auvfleet {

AgentController::AgentController(int agent_index, ControllerConfig config,
                                 VehicleParams vehicle)
    : index_(agent_index), config_(std::move(config)), vehicle_(std::move(vehicle)) {
  config_.weights.validate();
  config_.rates.validate();
  vehicle_.validate();
  if (config_.horizon < 1) throw ConfigError("controller horizon must be at least 1");
  if (!(config_.dt > 0.0)) throw ConfigError("controller dt must be positive");
}

AgentController::StepResult AgentController::step(
    const RigidBodyState& feedback, const std::optional<AgentMessage>& inbox,
    const std::optional<ReferenceWindow>& reference,
    const std::vector<SphereObstacle>& sensed_obstacles,
    const std::optional<FormationVector>& formation_for_follower, int timestep) {
  ParamVector params;
  params.feedback = feedback;
  params.obstacles = sensed_obstacles;
  params.extrapolate_obstacles = config_.extrapolate_obstacles;

  StepResult result;
  result.stats.link_ok = true;

  if (config_.role == AgentRole::kLeader) {
    if (!reference) throw ConfigError("leader stepped without a reference window");
    if (static_cast<int>(reference->states.size()) != config_.horizon + 1)
      throw DimensionError("reference window must hold horizon + 1 samples");
    params.target = *reference;
  } else {
    if (inbox) {
      last_target_ = LeaderSnapshot{inbox->state, inbox->formation, config_.comm_range};
    } else {
      result.stats.link_ok = false;
      if (!last_target_)
        throw MissingMessageError("follower " + std::to_string(index_) +
                                  " has never received a leader message");
    }
    params.target = *last_target_;
  }

  std::unique_ptr<TrackingNlp> nlp =
      config_.role == AgentRole::kLeader
          ? build_leader_nlp(config_.weights, config_.rates, params, config_.horizon,
                             config_.dt, vehicle_)
          : build_follower_nlp(config_.weights, config_.rates, params, config_.horizon,
                               config_.dt, vehicle_);

  VectorXd guess = (config_.warm_start && have_warm_) ? warm_ : nlp->cold_start();
  const SolverResult sol = solve(*nlp, guess, config_.solver);
  last_solution_ = sol.solution;

  result.stats.iterations = sol.iterations;
  result.stats.status = sol.status;
  result.stats.solve_time = sol.solve_time;

  const DecisionLayout& layout = nlp->layout();
  if (sol.status == SolverStatus::kNumericalFailure ||
      sol.status == SolverStatus::kInfeasibleDetected) {
    // Keep the vehicle commanded: reuse the last input (or hold hover).
    result.input = have_last_input_
                       ? last_input_
                       : ControlInput::unflatten(
                             hover_wrench(vehicle_, feedback.pose.orientation));
    result.stats.fallback_input = true;
    warm_ = nlp->cold_start();
    have_warm_ = true;
  } else {
    result.input =
        ControlInput::unflatten(sol.solution.segment<6>(layout.input_offset(0)));
    for (int m = 0; m < layout.horizon; ++m) {
      result.stats.max_slack_decrease = std::max(
          result.stats.max_slack_decrease, sol.solution(layout.slack_decrease_offset(m)));
      result.stats.min_slack_decay = std::min(result.stats.min_slack_decay,
                                              sol.solution(layout.slack_decay_offset(m)));
    }
    warm_ = shift_warm_start(sol.solution, layout);
    have_warm_ = true;
  }

  last_input_ = result.input;
  have_last_input_ = true;

  result.outgoing.sender = index_;
  result.outgoing.state = feedback;
  result.outgoing.formation =
      formation_for_follower.value_or(FormationVector{});
  result.outgoing.timestamp = timestep;
  return result;
}

}  // namespace auvfleet
