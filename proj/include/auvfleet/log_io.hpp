#pragma once

#include <string>
#include <vector>

#include "auvfleet/simulation.hpp"

namespace auvfleet {

/// One parsed row of a per-agent run CSV. Column order matches the writer:
/// t, x, y, z, phi, theta, psi, u, v, w, p, q, r, tau_x..tau_psi, s_v_max,
/// s_h_min, solver_iters, solver_status, solve_time_s.
struct AgentCsvRow {
  double t{0.0};
  RigidBodyState state;
  ControlInput input;
  double s_v_max{0.0};
  double s_h_min{1.0};
  int solver_iters{0};
  std::string solver_status;
  double solve_time_s{0.0};
};

/// Writes agent<k>.csv (1-based), obstacles.csv and metrics.json into
/// out_dir. Numbers are formatted with 9 significant digits. With
/// repro_timing set, wall-clock solve times are written as zero so reruns
/// are byte-identical.
void write_run_outputs(const SimLog& log, const ScenarioConfig& config,
                       const std::string& out_dir, bool repro_timing);

std::vector<AgentCsvRow> read_agent_csv(const std::string& path);

std::string metrics_to_json(const Metrics& metrics);

}  // namespace auvfleet
