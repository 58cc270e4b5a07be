#include "auvfleet/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "auvfleet/errors.hpp"

namespace auvfleet {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double clearance(const Vec3& position, const Vec3& center, double r_ob, double r_rb) {
  return (position - center).norm() - r_ob - r_rb;
}

/// Per-agent time mask of steps within event_pad of an obstacle encounter.
std::vector<std::vector<bool>> encounter_mask(const SimLog& log,
                                              const ScenarioConfig& config) {
  const int n = log.agent_count;
  const int steps = static_cast<int>(log.steps.size());
  std::vector<std::vector<bool>> near(n, std::vector<bool>(steps, false));
  if (config.obstacles.empty()) return near;
  const int pad = static_cast<int>(std::ceil(config.metrics.event_pad / log.dt));
  for (int k = 0; k < steps; ++k) {
    const StepRecord& rec = log.steps[k];
    for (int i = 0; i < n; ++i) {
      double c = kInf;
      for (size_t o = 0; o < rec.obstacle_centers.size(); ++o)
        c = std::min(c, clearance(rec.agents[i].state.pose.position,
                                  rec.obstacle_centers[o], config.obstacles[o].radius,
                                  config.rates.robot_radius));
      if (c < config.metrics.encounter_clearance) {
        for (int j = std::max(0, k - pad); j < std::min(steps, k + pad + 1); ++j)
          near[i][j] = true;
      }
    }
  }
  return near;
}

double follower_position_error(const StepRecord& rec, const ScenarioConfig& config,
                               int follower) {
  const int leader = config.agents[follower].leader_index;
  const Vec3 target = rec.agents[leader].state.pose.position +
                      config.schedule.offset_for(follower, rec.t).offset.head<3>();
  return (target - rec.agents[follower].state.pose.position).norm();
}

}  // namespace

std::pair<std::vector<RigidBodyState>, std::vector<SphereObstacle>> step_world(
    const std::vector<RigidBodyState>& states, const std::vector<ControlInput>& inputs,
    const std::vector<SphereObstacle>& obstacles,
    const std::vector<VehicleParams>& vehicles, double dt) {
  if (states.size() != inputs.size() || states.size() != vehicles.size())
    throw DimensionError("step_world: states, inputs and vehicles must align");
  std::vector<RigidBodyState> next_states;
  next_states.reserve(states.size());
  for (size_t i = 0; i < states.size(); ++i)
    next_states.push_back(rk4_step(states[i], inputs[i], vehicles[i], dt));
  std::vector<SphereObstacle> next_obstacles = obstacles;
  for (SphereObstacle& ob : next_obstacles) ob.center += dt * ob.velocity;
  return {std::move(next_states), std::move(next_obstacles)};
}

SimLog run_scenario(const ScenarioConfig& config,
                    const std::function<void(const StepRecord&)>& on_step) {
  config.validate();
  const int n = static_cast<int>(config.agents.size());
  const int steps = static_cast<int>(std::llround(config.duration / config.dt));

  SimLog log;
  log.dt = config.dt;
  log.agent_count = n;
  log.steps.reserve(steps + 1);

  // follower_of[i] is the index of the agent listening to i, or -1.
  std::vector<int> follower_of(n, -1);
  for (int i = 0; i < n; ++i)
    if (config.agents[i].role == AgentRole::kFollower)
      follower_of[config.agents[i].leader_index] = i;

  std::vector<AgentController> controllers;
  std::vector<VehicleParams> vehicles;
  controllers.reserve(n);
  for (int i = 0; i < n; ++i) {
    ControllerConfig cc;
    cc.role = config.agents[i].role;
    cc.weights = config.weights;
    cc.rates = config.rates;
    cc.horizon = config.horizon;
    cc.dt = config.dt;
    cc.comm_range = config.comm_range;
    cc.warm_start = config.warm_start;
    cc.extrapolate_obstacles = config.extrapolate_obstacles;
    cc.solver = config.solver;
    controllers.emplace_back(i, cc, config.agents[i].vehicle);
    vehicles.push_back(config.agents[i].vehicle);
  }

  std::vector<RigidBodyState> states;
  for (const AgentSpec& a : config.agents) states.push_back(a.initial_state);
  std::vector<SphereObstacle> obstacles = config.obstacles;

  // Seed messages so that delayed mode has something to consume at k = 0.
  std::vector<std::optional<AgentMessage>> prev_messages(n);
  for (int i = 0; i < n; ++i) {
    if (follower_of[i] >= 0)
      prev_messages[i] = AgentMessage{
          i, states[i], config.schedule.offset_for(follower_of[i], 0.0), -1};
  }
  std::optional<ProximityGraph> prev_graph;

  for (int k = 0; k < steps; ++k) {
    const double t = k * config.dt;

    std::vector<Vec3> positions;
    for (const RigidBodyState& s : states) positions.push_back(s.pose.position);
    const ProximityGraph graph = build_edges(positions, config.comm_range);

    StepRecord rec;
    rec.t = t;
    rec.agents.resize(n);
    for (const SphereObstacle& ob : obstacles) rec.obstacle_centers.push_back(ob.center);
    rec.edges.assign(graph.edges().begin(), graph.edges().end());
    rec.connected = graph.is_connected();

    std::vector<std::optional<AgentMessage>> messages(n);
    std::vector<ControlInput> inputs(n);

    try {
      for (int i = 0; i < n; ++i) {
        const AgentSpec& spec = config.agents[i];

        std::optional<AgentMessage> inbox;
        if (spec.role == AgentRole::kFollower) {
          const int leader = spec.leader_index;
          if (config.mode == ExecutionMode::kChain) {
            // Chain order: the leader has already produced this instant's
            // broadcast; deliver it if the link exists now.
            if (graph.has_edge(leader, i)) inbox = messages[leader];
          } else {
            const bool linked =
                prev_graph ? prev_graph->has_edge(leader, i) : graph.has_edge(leader, i);
            if (linked) inbox = prev_messages[leader];
          }
        }

        std::optional<ReferenceWindow> reference;
        if (spec.role == AgentRole::kLeader)
          reference = config.reference.window(t, config.horizon, config.dt);

        std::vector<SphereObstacle> sensed;
        for (const SphereObstacle& ob : obstacles)
          if ((ob.center - states[i].pose.position).norm() <= config.sensing_radius)
            sensed.push_back(ob);

        std::optional<FormationVector> formation_for_follower;
        if (follower_of[i] >= 0)
          formation_for_follower = config.schedule.offset_for(follower_of[i], t);

        const AgentController::StepResult res = controllers[i].step(
            states[i], inbox, reference, sensed, formation_for_follower, k);

        messages[i] = res.outgoing;
        inputs[i] = res.input;
        rec.agents[i] = AgentRecord{states[i], res.input, res.stats};
      }
    } catch (const std::exception& e) {
      log.aborted = true;
      log.abort_reason = e.what();
      break;
    }

    log.steps.push_back(rec);
    if (on_step) on_step(rec);

    auto [next_states, next_obstacles] = step_world(states, inputs, obstacles, vehicles,
                                                    config.dt);
    states = std::move(next_states);
    obstacles = std::move(next_obstacles);
    prev_messages = std::move(messages);
    prev_graph = graph;
  }

  if (!log.aborted) {
    // Terminal record: final states, no applied input.
    StepRecord rec;
    rec.t = steps * config.dt;
    rec.terminal = true;
    std::vector<Vec3> positions;
    for (const RigidBodyState& s : states) positions.push_back(s.pose.position);
    const ProximityGraph graph = build_edges(positions, config.comm_range);
    rec.edges.assign(graph.edges().begin(), graph.edges().end());
    rec.connected = graph.is_connected();
    for (const SphereObstacle& ob : obstacles) rec.obstacle_centers.push_back(ob.center);
    for (int i = 0; i < n; ++i)
      rec.agents.push_back(AgentRecord{states[i], ControlInput{}, StepStats{}});
    log.steps.push_back(rec);
    if (on_step) on_step(rec);
  }

  log.metrics = compute_metrics(log, config);
  return log;
}

Metrics compute_metrics(const SimLog& log, const ScenarioConfig& config) {
  Metrics m;
  if (log.steps.empty()) return m;
  const int n = log.agent_count;

  // Safety clearance over every agent, obstacle and step.
  if (!config.obstacles.empty()) {
    m.obstacle_clearance_defined = true;
    m.min_obstacle_clearance = kInf;
    for (const StepRecord& rec : log.steps)
      for (int i = 0; i < n; ++i)
        for (size_t o = 0; o < rec.obstacle_centers.size(); ++o)
          m.min_obstacle_clearance = std::min(
              m.min_obstacle_clearance,
              clearance(rec.agents[i].state.pose.position, rec.obstacle_centers[o],
                        config.obstacles[o].radius, config.rates.robot_radius));
  }

  // Communication distances over leader-follower pairs.
  for (const StepRecord& rec : log.steps) {
    for (int i = 0; i < n; ++i) {
      if (config.agents[i].role != AgentRole::kFollower) continue;
      m.comm_distance_defined = true;
      const double d = comm_distance(
          rec.agents[config.agents[i].leader_index].state.pose.position,
          rec.agents[i].state.pose.position);
      m.max_interagent_comm_distance = std::max(m.max_interagent_comm_distance, d);
    }
  }

  // Connectivity violations.
  for (const StepRecord& rec : log.steps)
    if (!rec.connected) ++m.connectivity_violations;

  // Leader tracking error, post-transient and away from encounters/switches.
  int leader = -1;
  for (int i = 0; i < n; ++i)
    if (config.agents[i].role == AgentRole::kLeader) leader = i;
  if (leader >= 0 && !config.reference.empty()) {
    const auto near = encounter_mask(log, config);
    std::vector<double> switch_times;
    for (const FormationInterval& iv : config.schedule.intervals())
      switch_times.push_back(iv.t_start);
    for (size_t k = 0; k < log.steps.size(); ++k) {
      const StepRecord& rec = log.steps[k];
      if (rec.t < config.metrics.transient_skip) continue;
      if (near[leader][k]) continue;
      bool near_switch = false;
      for (double ts : switch_times)
        near_switch = near_switch || std::abs(rec.t - ts) <= config.metrics.event_pad;
      if (near_switch) continue;
      const Vec3 ref = config.reference.state_at(rec.t).pose.position;
      m.max_leader_tracking_error =
          std::max(m.max_leader_tracking_error,
                   (rec.agents[leader].state.pose.position - ref).norm());
    }
  }

  // Formation RMSE per schedule interval (after the settle window).
  for (const FormationInterval& iv : config.schedule.intervals()) {
    double sum_sq = 0.0;
    int count = 0;
    for (const StepRecord& rec : log.steps) {
      if (rec.t < iv.t_start + config.metrics.settle_window || rec.t > iv.t_end) continue;
      for (int i = 0; i < n; ++i) {
        if (config.agents[i].role != AgentRole::kFollower) continue;
        const double e = follower_position_error(rec, config, i);
        sum_sq += e * e;
        ++count;
      }
    }
    m.formation_rmse_per_interval.push_back(count > 0 ? std::sqrt(sum_sq / count) : 0.0);
  }

  return m;
}

std::vector<std::string> check_run_invariants(const SimLog& log,
                                              const ScenarioConfig& config) {
  std::vector<std::string> out;
  if (log.aborted) {
    out.push_back("run aborted: " + log.abort_reason);
    return out;
  }
  if (log.steps.empty()) {
    out.push_back("empty log");
    return out;
  }
  const int n = log.agent_count;

  if (log.metrics.obstacle_clearance_defined &&
      log.metrics.min_obstacle_clearance < -0.05)
    out.push_back("safety: min obstacle clearance " +
                  std::to_string(log.metrics.min_obstacle_clearance) +
                  " m below -0.05 m");

  for (const StepRecord& rec : log.steps) {
    for (int i = 0; i < n; ++i) {
      if (config.agents[i].role != AgentRole::kFollower) continue;
      const double d =
          comm_distance(rec.agents[config.agents[i].leader_index].state.pose.position,
                        rec.agents[i].state.pose.position);
      if (d > config.comm_range + 1e-9) {
        out.push_back("communication: pair (" +
                      std::to_string(config.agents[i].leader_index) + "," +
                      std::to_string(i) + ") at distance " + std::to_string(d) +
                      " m > " + std::to_string(config.comm_range) + " m at t=" +
                      std::to_string(rec.t));
      }
    }
  }

  if (log.metrics.connectivity_violations > 0)
    out.push_back("connectivity: graph disconnected at " +
                  std::to_string(log.metrics.connectivity_violations) + " steps");

  // Formation settling: below 0.2 m from settle_window after each interval
  // start until the next switch, outside obstacle-encounter windows of the
  // follower and its leader.
  if (!config.schedule.intervals().empty()) {
    const auto near = encounter_mask(log, config);
    for (const FormationInterval& iv : config.schedule.intervals()) {
      for (int i = 0; i < n; ++i) {
        if (config.agents[i].role != AgentRole::kFollower) continue;
        const int leader = config.agents[i].leader_index;
        double worst = 0.0;
        double worst_t = 0.0;
        for (size_t k = 0; k < log.steps.size(); ++k) {
          const StepRecord& rec = log.steps[k];
          if (rec.t < iv.t_start + config.metrics.settle_window || rec.t > iv.t_end)
            continue;
          if (near[i][k] || near[leader][k]) continue;
          const double e = follower_position_error(rec, config, i);
          if (e > worst) {
            worst = e;
            worst_t = rec.t;
          }
        }
        if (worst > 0.2)
          out.push_back("formation: agent " + std::to_string(i) + " error " +
                        std::to_string(worst) + " m at t=" + std::to_string(worst_t) +
                        " in interval starting " + std::to_string(iv.t_start));
      }
    }
  }
  return out;
}

}  // namespace auvfleet
