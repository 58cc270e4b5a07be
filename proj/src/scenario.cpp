#include "auvfleet/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "auvfleet/errors.hpp"

namespace auvfleet {
namespace {

using nlohmann::json;

double poly_eval(const std::vector<double>& coeffs, double t) {
  double v = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) v = v * t + *it;
  return v;
}

double poly_derivative_eval(const std::vector<double>& coeffs, double t) {
  double v = 0.0;
  for (int k = static_cast<int>(coeffs.size()) - 1; k >= 1; --k)
    v = v * t + k * coeffs[k];
  return v;
}

template <typename Vec>
Vec parse_vec(const json& arr, const std::string& field) {
  Vec out;
  if (!arr.is_array() || arr.size() != static_cast<size_t>(out.size()))
    throw ConfigError("field '" + field + "' must be an array of " +
                      std::to_string(out.size()) + " numbers");
  for (int i = 0; i < out.size(); ++i) out(i) = arr.at(i).get<double>();
  return out;
}

void reject_unknown_keys(const json& j, std::initializer_list<const char*> known,
                         const std::string& context) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) throw ConfigError("unknown field '" + it.key() + "' in " + context);
  }
}

}  // namespace

ReferenceTrajectory::ReferenceTrajectory(std::vector<ReferenceSegment> segments)
    : segments_(std::move(segments)) {
  std::sort(segments_.begin(), segments_.end(),
            [](const auto& a, const auto& b) { return a.t_start < b.t_start; });
  for (const auto& s : segments_) {
    if (!(s.t_end > s.t_start))
      throw ConfigError("reference segment must have t_end > t_start");
  }
}

RigidBodyState ReferenceTrajectory::state_at(double t) const {
  if (segments_.empty()) throw ConfigError("reference trajectory is empty");
  const ReferenceSegment* seg = &segments_.back();
  for (const auto& s : segments_) {
    if (t <= s.t_end) {
      seg = &s;
      break;
    }
  }

  Vec6 pose, pose_rate;
  for (int i = 0; i < 6; ++i) {
    pose(i) = poly_eval(seg->pose_poly[i], t);
    pose_rate(i) = poly_derivative_eval(seg->pose_poly[i], t);
  }

  RigidBodyState state;
  state.pose.position = pose.head<3>();
  state.pose.orientation = pose.tail<3>();
  // Body velocity consistent with the pose rate at the reference attitude.
  const Mat3 rot = body_to_ned_rotation(state.pose.orientation);
  const Mat3 t_euler = euler_rate_transform(state.pose.orientation);
  state.velocity.linear = rot.transpose() * pose_rate.head<3>();
  state.velocity.angular = t_euler.inverse() * pose_rate.tail<3>();
  return state;
}

ReferenceWindow ReferenceTrajectory::window(double t, int horizon, double dt) const {
  ReferenceWindow w;
  w.states.reserve(horizon + 1);
  for (int m = 0; m <= horizon; ++m) w.states.push_back(state_at(t + m * dt));
  return w;
}

FormationSchedule::FormationSchedule(std::vector<FormationInterval> intervals)
    : intervals_(std::move(intervals)) {
  std::sort(intervals_.begin(), intervals_.end(),
            [](const auto& a, const auto& b) { return a.t_start < b.t_start; });
}

FormationVector FormationSchedule::offset_for(int agent, double t) const {
  if (intervals_.empty()) return FormationVector{};
  const FormationInterval* interval = &intervals_.back();
  for (const auto& iv : intervals_) {
    if (t <= iv.t_end) {
      interval = &iv;
      break;
    }
  }
  FormationVector out;
  const auto it = interval->offsets.find(agent);
  if (it != interval->offsets.end()) out.offset = it->second.at(t);
  return out;
}

std::vector<std::string> ScenarioConfig::problems() const {
  std::vector<std::string> out;
  if (agents.empty()) out.push_back("scenario has no agents");
  if (!(duration >= 0.0)) out.push_back("duration must be nonnegative");
  if (!(dt > 0.0)) out.push_back("dt must be positive");
  if (horizon < 1) out.push_back("horizon must be at least 1");
  if (!(comm_range > 0.0)) out.push_back("comm_range must be positive");
  if (!(sensing_radius > 0.0)) out.push_back("sensing_radius must be positive");

  int chain_heads = 0;
  for (size_t i = 0; i < agents.size(); ++i) {
    const AgentSpec& a = agents[i];
    if (a.role == AgentRole::kLeader) {
      ++chain_heads;
      if (a.leader_index >= 0)
        out.push_back("agent " + std::to_string(i) + ": leaders have no leader_index");
    } else {
      if (a.leader_index < 0 || a.leader_index >= static_cast<int>(agents.size()))
        out.push_back("agent " + std::to_string(i) + ": leader_index out of range");
      else if (a.leader_index >= static_cast<int>(i))
        out.push_back("agent " + std::to_string(i) +
                      ": leader_index must precede the follower (chain order)");
    }
    try {
      a.vehicle.validate();
    } catch (const ConfigError& e) {
      out.push_back("agent " + std::to_string(i) + ": " + e.what());
    }
  }
  if (chain_heads != 1 && !agents.empty())
    out.push_back("expected exactly one chain-head leader, found " +
                  std::to_string(chain_heads));
  // Each agent may broadcast to at most one follower.
  std::vector<int> follower_count(agents.size(), 0);
  for (const AgentSpec& a : agents)
    if (a.role == AgentRole::kFollower && a.leader_index >= 0 &&
        a.leader_index < static_cast<int>(agents.size()))
      ++follower_count[a.leader_index];
  for (size_t i = 0; i < agents.size(); ++i)
    if (follower_count[i] > 1)
      out.push_back("agent " + std::to_string(i) + " has more than one follower");

  const bool has_leader = chain_heads >= 1;
  if (has_leader && reference.empty())
    out.push_back("a leader requires a reference trajectory");

  const auto& intervals = schedule.intervals();
  for (size_t i = 0; i < intervals.size(); ++i) {
    if (!(intervals[i].t_end > intervals[i].t_start))
      out.push_back("formation interval " + std::to_string(i) +
                    " must have t_end > t_start");
    if (i > 0 && std::abs(intervals[i].t_start - intervals[i - 1].t_end) > 1e-9)
      out.push_back("formation intervals must be contiguous at t=" +
                    std::to_string(intervals[i - 1].t_end));
  }

  for (size_t i = 0; i < obstacles.size(); ++i)
    if (!(obstacles[i].radius > 0.0))
      out.push_back("obstacle " + std::to_string(i) + ": radius must be positive");

  try {
    weights.validate();
  } catch (const ConfigError& e) {
    out.push_back(std::string("weights: ") + e.what());
  }
  try {
    rates.validate();
  } catch (const ConfigError& e) {
    out.push_back(std::string("rates: ") + e.what());
  }
  if (!(solver.kkt_tolerance > 0.0)) out.push_back("solver kkt_tolerance must be positive");
  if (solver.max_iterations < 1) out.push_back("solver max_iterations must be at least 1");
  return out;
}

void ScenarioConfig::validate() const {
  const std::vector<std::string> issues = problems();
  if (issues.empty()) return;
  std::string msg = "invalid scenario:";
  for (const auto& p : issues) msg += "\n  - " + p;
  throw ConfigError(msg);
}

ScenarioConfig ScenarioConfig::from_json_text(const std::string& text,
                                              const std::string& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("scenario json parse error: ") + e.what());
  }
  reject_unknown_keys(
      j,
      {"agents", "reference", "formation_schedule", "obstacles", "comm_range",
       "horizon", "dt", "duration", "weights", "rates", "solver", "mode", "seed",
       "sensing_radius", "extrapolate_obstacles", "warm_start", "metrics"},
      "scenario");

  ScenarioConfig cfg;
  if (j.contains("comm_range")) cfg.comm_range = j.at("comm_range").get<double>();
  if (j.contains("horizon")) cfg.horizon = j.at("horizon").get<int>();
  if (j.contains("dt")) cfg.dt = j.at("dt").get<double>();
  if (j.contains("duration")) cfg.duration = j.at("duration").get<double>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<unsigned>();
  if (j.contains("sensing_radius"))
    cfg.sensing_radius = j.at("sensing_radius").get<double>();
  if (j.contains("extrapolate_obstacles"))
    cfg.extrapolate_obstacles = j.at("extrapolate_obstacles").get<bool>();
  if (j.contains("warm_start")) cfg.warm_start = j.at("warm_start").get<bool>();
  if (j.contains("mode")) {
    const std::string mode = j.at("mode").get<std::string>();
    if (mode == "chain")
      cfg.mode = ExecutionMode::kChain;
    else if (mode == "delayed")
      cfg.mode = ExecutionMode::kDelayed;
    else
      throw ConfigError("field 'mode' must be 'chain' or 'delayed'");
  }

  if (j.contains("agents")) {
    if (!j.at("agents").is_array()) throw ConfigError("field 'agents' must be an array");
    for (const auto& a : j.at("agents")) {
      reject_unknown_keys(a,
                          {"role", "initial_pose", "initial_velocity", "leader",
                           "vehicle", "vehicle_file"},
                          "agent");
      AgentSpec spec;
      const std::string role = a.at("role").get<std::string>();
      if (role == "leader")
        spec.role = AgentRole::kLeader;
      else if (role == "follower")
        spec.role = AgentRole::kFollower;
      else
        throw ConfigError("agent field 'role' must be 'leader' or 'follower'");
      const Vec6 pose = parse_vec<Vec6>(a.at("initial_pose"), "initial_pose");
      spec.initial_state.pose.position = pose.head<3>();
      spec.initial_state.pose.orientation = pose.tail<3>();
      if (a.contains("initial_velocity")) {
        const Vec6 vel = parse_vec<Vec6>(a.at("initial_velocity"), "initial_velocity");
        spec.initial_state.velocity.linear = vel.head<3>();
        spec.initial_state.velocity.angular = vel.tail<3>();
      }
      if (a.contains("leader")) spec.leader_index = a.at("leader").get<int>();
      if (a.contains("vehicle") && a.contains("vehicle_file"))
        throw ConfigError("agent: give either 'vehicle' or 'vehicle_file', not both");
      if (a.contains("vehicle"))
        spec.vehicle = VehicleParams::from_json_text(a.at("vehicle").dump());
      else if (a.contains("vehicle_file"))
        spec.vehicle = VehicleParams::from_json_file(
            (std::filesystem::path(base_dir) / a.at("vehicle_file").get<std::string>())
                .string());
      cfg.agents.push_back(std::move(spec));
    }
  }

  if (j.contains("reference")) {
    const auto& r = j.at("reference");
    reject_unknown_keys(r, {"segments"}, "reference");
    std::vector<ReferenceSegment> segments;
    for (const auto& s : r.at("segments")) {
      reject_unknown_keys(s, {"t_start", "t_end", "pose_poly"}, "reference segment");
      ReferenceSegment seg;
      seg.t_start = s.at("t_start").get<double>();
      seg.t_end = s.at("t_end").get<double>();
      const auto& poly = s.at("pose_poly");
      if (!poly.is_array() || poly.size() != 6)
        throw ConfigError("field 'pose_poly' must hold 6 coefficient arrays");
      for (int i = 0; i < 6; ++i)
        seg.pose_poly[i] = poly.at(i).get<std::vector<double>>();
      segments.push_back(std::move(seg));
    }
    cfg.reference = ReferenceTrajectory(std::move(segments));
  }

  if (j.contains("formation_schedule")) {
    std::vector<FormationInterval> intervals;
    for (const auto& e : j.at("formation_schedule")) {
      reject_unknown_keys(e, {"t_start", "t_end", "offsets"}, "formation interval");
      FormationInterval interval;
      interval.t_start = e.at("t_start").get<double>();
      interval.t_end = e.at("t_end").get<double>();
      if (e.contains("offsets")) {
        for (auto it = e.at("offsets").begin(); it != e.at("offsets").end(); ++it) {
          FormationOffset off;
          reject_unknown_keys(it.value(), {"constant", "rate"}, "formation offset");
          if (it.value().contains("constant"))
            off.constant = parse_vec<Vec6>(it.value().at("constant"), "constant");
          if (it.value().contains("rate"))
            off.rate = parse_vec<Vec6>(it.value().at("rate"), "rate");
          interval.offsets[std::stoi(it.key())] = off;
        }
      }
      intervals.push_back(std::move(interval));
    }
    cfg.schedule = FormationSchedule(std::move(intervals));
  }

  if (j.contains("obstacles")) {
    for (const auto& o : j.at("obstacles")) {
      reject_unknown_keys(o, {"center", "radius", "velocity"}, "obstacle");
      SphereObstacle ob;
      ob.center = parse_vec<Vec3>(o.at("center"), "center");
      ob.radius = o.at("radius").get<double>();
      if (o.contains("velocity")) ob.velocity = parse_vec<Vec3>(o.at("velocity"), "velocity");
      cfg.obstacles.push_back(ob);
    }
  }

  if (j.contains("weights")) {
    const auto& w = j.at("weights");
    reject_unknown_keys(
        w, {"state_diag", "input_diag", "clf_diag", "slack_decrease", "slack_decay"},
        "weights");
    if (w.contains("state_diag"))
      cfg.weights.state_weight = parse_vec<Vec12>(w.at("state_diag"), "state_diag").asDiagonal();
    if (w.contains("input_diag"))
      cfg.weights.input_weight = parse_vec<Vec6>(w.at("input_diag"), "input_diag").asDiagonal();
    if (w.contains("clf_diag"))
      cfg.weights.clf.W = parse_vec<Vec12>(w.at("clf_diag"), "clf_diag").asDiagonal();
    if (w.contains("slack_decrease"))
      cfg.weights.slack_decrease_weight = w.at("slack_decrease").get<double>();
    if (w.contains("slack_decay"))
      cfg.weights.slack_decay_weight = w.at("slack_decay").get<double>();
  }

  if (j.contains("rates")) {
    const auto& r = j.at("rates");
    reject_unknown_keys(r, {"alpha", "gamma", "robot_radius"}, "rates");
    if (r.contains("alpha")) cfg.rates.alpha = r.at("alpha").get<double>();
    if (r.contains("gamma")) cfg.rates.gamma = r.at("gamma").get<double>();
    if (r.contains("robot_radius"))
      cfg.rates.robot_radius = r.at("robot_radius").get<double>();
  }

  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    reject_unknown_keys(s,
                        {"kkt_tolerance", "max_iterations", "initial_barrier",
                         "barrier_decrease", "bound_push"},
                        "solver");
    if (s.contains("kkt_tolerance"))
      cfg.solver.kkt_tolerance = s.at("kkt_tolerance").get<double>();
    if (s.contains("max_iterations"))
      cfg.solver.max_iterations = s.at("max_iterations").get<int>();
    if (s.contains("initial_barrier"))
      cfg.solver.initial_barrier = s.at("initial_barrier").get<double>();
    if (s.contains("barrier_decrease"))
      cfg.solver.barrier_decrease = s.at("barrier_decrease").get<double>();
    if (s.contains("bound_push")) cfg.solver.bound_push = s.at("bound_push").get<double>();
  }

  if (j.contains("metrics")) {
    const auto& m = j.at("metrics");
    reject_unknown_keys(
        m, {"transient_skip", "event_pad", "settle_window", "encounter_clearance"},
        "metrics");
    if (m.contains("transient_skip"))
      cfg.metrics.transient_skip = m.at("transient_skip").get<double>();
    if (m.contains("event_pad")) cfg.metrics.event_pad = m.at("event_pad").get<double>();
    if (m.contains("settle_window"))
      cfg.metrics.settle_window = m.at("settle_window").get<double>();
    if (m.contains("encounter_clearance"))
      cfg.metrics.encounter_clearance = m.at("encounter_clearance").get<double>();
  }

  return cfg;
}

ScenarioConfig ScenarioConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str(), std::filesystem::path(path).parent_path().string());
}

ScenarioConfig builtin_scenario() {
  ScenarioConfig cfg;
  cfg.comm_range = 25.0;
  cfg.horizon = 20;
  cfg.dt = 0.1;
  cfg.duration = 110.0;
  cfg.sensing_radius = 20.0;

  // Leader reference: constant-depth cruise for 70 s, then a climbing leg.
  ReferenceSegment leg1;
  leg1.t_start = 0.0;
  leg1.t_end = 70.0;
  leg1.pose_poly = {std::vector<double>{-3.0, 0.7}, {-3.0}, {2.0}, {0.0}, {0.0}, {0.0}};
  ReferenceSegment leg2;
  leg2.t_start = 70.0;
  leg2.t_end = 110.0;
  leg2.pose_poly = {std::vector<double>{11.3, 0.5}, {-3.0}, {-32.7, 0.5},
                    {0.0}, {0.0}, {0.0}};
  cfg.reference = ReferenceTrajectory({leg1, leg2});

  AgentSpec leader;
  leader.role = AgentRole::kLeader;
  leader.initial_state.pose.position = Vec3(-3.0, -3.0, -3.0);
  AgentSpec follower2;
  follower2.role = AgentRole::kFollower;
  follower2.leader_index = 0;
  follower2.initial_state.pose.position = Vec3::Zero();
  AgentSpec follower3;
  follower3.role = AgentRole::kFollower;
  follower3.leader_index = 1;
  follower3.initial_state.pose.position = Vec3(0.0, -7.0, 1.0);
  cfg.agents = {leader, follower2, follower3};

  const auto constant = [](double x, double y, double z, double droll, double dpitch,
                           double dyaw) {
    FormationOffset off;
    off.constant << x, y, z, droll, dpitch, dyaw;
    return off;
  };
  const auto linear = [](const Vec6& c, const Vec6& r) {
    FormationOffset off;
    off.constant = c;
    off.rate = r;
    return off;
  };

  FormationInterval i1{0.0, 30.0, {}};
  i1.offsets[1] = constant(0, 1, 4, 0, 0, 0);
  i1.offsets[2] = constant(0, -2, 0, 0, 0, 0);
  FormationInterval i2{30.0, 70.0, {}};
  i2.offsets[1] = constant(-5, 0, 0, 0, 0, 0);
  i2.offsets[2] = constant(-5, 0, 0, 0, 0, 0);
  FormationInterval i3{70.0, 90.0, {}};
  i3.offsets[1] = linear((Vec6() << 39.7, -5, 0, 0, 0, 5.5).finished(),
                         (Vec6() << -0.56, 0.07, 0, 0, 0, -0.08).finished());
  i3.offsets[2] = linear((Vec6() << 0, 9.9, 0, 0, 0, -11).finished(),
                         (Vec6() << 0, -0.14, 0, 0, 0, 0.16).finished());
  FormationInterval i4{90.0, 110.0, {}};
  i4.offsets[1] = linear((Vec6() << 39.7, -5, 0, 0, -10.5, 0).finished(),
                         (Vec6() << -0.56, 0.07, 0, 0, 0.1, 0).finished());
  i4.offsets[2] = linear((Vec6() << 0, 9.9, 0, 0, -10.5, 0).finished(),
                         (Vec6() << 0, -0.14, 0, 0, 0.1, 0).finished());
  cfg.schedule = FormationSchedule({i1, i2, i3, i4});

  cfg.obstacles = {
      SphereObstacle{Vec3(25.0, -3.0, 2.0), 1.0, Vec3::Zero()},
      SphereObstacle{Vec3(55.0, -3.0, 10.0), 2.0, Vec3::Zero()},
      SphereObstacle{Vec3(70.0, -4.0, 4.0), 0.5, Vec3(-0.33, 0.0, 0.0)},
  };

  // Scenario tuning: position tracking dominates, velocity matching is a
  // soft preference. The stiffer position weight keeps the followers'
  // snapshot-lag within the formation tolerance at cruise speed.
  Vec12 state_diag;
  state_diag << 40, 40, 40, 8, 8, 8, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5;
  cfg.weights.state_weight = state_diag.asDiagonal();
  cfg.weights.clf.W = state_diag.asDiagonal();
  cfg.weights.input_weight = 0.005 * Mat6::Identity();

  cfg.solver.kkt_tolerance = 1e-3;
  cfg.solver.max_iterations = 150;
  cfg.solver.initial_barrier = 0.01;
  return cfg;
}

}  // namespace auvfleet
