#pragma once

#include <map>
#include <string>
#include <vector>

#include "auvfleet/controller.hpp"
#include "auvfleet/ocp.hpp"
#include "auvfleet/safety.hpp"
#include "auvfleet/types.hpp"
#include "auvfleet/vehicle.hpp"

namespace auvfleet {

/// One polynomial piece of the reference: pose component i evaluates to
/// sum_k coeffs[i][k] * t^k on [t_start, t_end].
struct ReferenceSegment {
  double t_start{0.0};
  double t_end{0.0};
  std::array<std::vector<double>, 6> pose_poly;
};

/// Piecewise-polynomial full-state reference. The pose comes from the
/// polynomials; the body velocity from their time derivative mapped through
/// the inverse kinematics at the reference attitude. Evaluation outside the
/// covered span extrapolates the nearest segment.
class ReferenceTrajectory {
 public:
  ReferenceTrajectory() = default;
  explicit ReferenceTrajectory(std::vector<ReferenceSegment> segments);

  bool empty() const { return segments_.empty(); }
  const std::vector<ReferenceSegment>& segments() const { return segments_; }

  RigidBodyState state_at(double t) const;
  ReferenceWindow window(double t, int horizon, double dt) const;

 private:
  std::vector<ReferenceSegment> segments_;
};

/// Formation offset of one follower on one time interval, linear in t:
/// A(t) = constant + rate * t.
struct FormationOffset {
  Vec6 constant{Vec6::Zero()};
  Vec6 rate{Vec6::Zero()};

  Vec6 at(double t) const { return constant + t * rate; }
};

struct FormationInterval {
  double t_start{0.0};
  double t_end{0.0};
  std::map<int, FormationOffset> offsets;  // follower index -> offset law
};

/// Table of formation offsets over contiguous, non-overlapping intervals.
/// The first interval is closed, later ones are (t_start, t_end]; queries
/// outside the table clamp to the nearest interval.
class FormationSchedule {
 public:
  FormationSchedule() = default;
  explicit FormationSchedule(std::vector<FormationInterval> intervals);

  bool empty() const { return intervals_.empty(); }
  const std::vector<FormationInterval>& intervals() const { return intervals_; }

  FormationVector offset_for(int agent, double t) const;

 private:
  std::vector<FormationInterval> intervals_;
};

struct AgentSpec {
  RigidBodyState initial_state;
  VehicleParams vehicle;
  AgentRole role{AgentRole::kFollower};
  int leader_index{-1};  // < 0 for the chain head
};

enum class ExecutionMode { kChain, kDelayed };

struct MetricsOptions {
  double transient_skip{15.0};      // [s] ignored at the start of the run
  double event_pad{5.0};            // [s] window around encounters/switches
  double settle_window{10.0};       // [s] allowed settling after a switch
  double encounter_clearance{2.5};  // [m] clearance that counts as an encounter
};

/// Complete world description for one simulation run.
struct ScenarioConfig {
  std::vector<AgentSpec> agents;
  ReferenceTrajectory reference;
  FormationSchedule schedule;
  std::vector<SphereObstacle> obstacles;
  double comm_range{25.0};
  int horizon{20};
  double dt{0.1};
  double duration{110.0};
  OcpWeights weights{OcpWeights::defaults()};
  RateParams rates;
  SolverConfig solver;
  ExecutionMode mode{ExecutionMode::kChain};
  unsigned seed{0};
  double sensing_radius{20.0};
  bool extrapolate_obstacles{false};
  bool warm_start{true};
  MetricsOptions metrics;

  /// All violated invariants, empty when the scenario is well formed.
  std::vector<std::string> problems() const;

  /// Throws ConfigError listing every violated invariant.
  void validate() const;

  static ScenarioConfig from_json_text(const std::string& text,
                                       const std::string& base_dir = ".");
  static ScenarioConfig from_json_file(const std::string& path);
};

/// Built-in three-vehicle benchmark: one leader tracking a piecewise-linear
/// dive trajectory, two chained followers, two static obstacles and one
/// moving obstacle, four formation intervals over 110 s. Selected on the
/// command line as `--scenario paper`.
ScenarioConfig builtin_scenario();

}  // namespace auvfleet
