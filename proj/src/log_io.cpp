#include "auvfleet/log_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "auvfleet/errors.hpp"

namespace auvfleet {
namespace {

const char* kAgentHeader =
    "t,x,y,z,phi,theta,psi,u,v,w,p,q,r,tau_x,tau_y,tau_z,tau_phi,tau_theta,"
    "tau_psi,s_v_max,s_h_min,solver_iters,solver_status,solve_time_s";

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace

void write_run_outputs(const SimLog& log, const ScenarioConfig& config,
                       const std::string& out_dir, bool repro_timing) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  for (int i = 0; i < log.agent_count; ++i) {
    std::ofstream out(fs::path(out_dir) / ("agent" + std::to_string(i + 1) + ".csv"));
    if (!out) throw ConfigError("cannot write agent CSV in '" + out_dir + "'");
    out << kAgentHeader << '\n';
    for (const StepRecord& rec : log.steps) {
      const AgentRecord& a = rec.agents[i];
      const Vec12 x = a.state.flatten();
      const Vec6 tau = a.input.flatten();
      out << fmt(rec.t);
      for (int k = 0; k < 12; ++k) out << ',' << fmt(x(k));
      for (int k = 0; k < 6; ++k) out << ',' << fmt(tau(k));
      out << ',' << fmt(a.stats.max_slack_decrease) << ',' << fmt(a.stats.min_slack_decay)
          << ',' << a.stats.iterations << ','
          << (rec.terminal ? "none" : to_string(a.stats.status)) << ','
          << fmt(repro_timing ? 0.0 : a.stats.solve_time) << '\n';
    }
  }

  {
    std::ofstream out(fs::path(out_dir) / "obstacles.csv");
    if (!out) throw ConfigError("cannot write obstacles.csv in '" + out_dir + "'");
    out << "t,obstacle,x,y,z,radius\n";
    for (const StepRecord& rec : log.steps)
      for (size_t o = 0; o < rec.obstacle_centers.size(); ++o)
        out << fmt(rec.t) << ',' << o << ',' << fmt(rec.obstacle_centers[o].x()) << ','
            << fmt(rec.obstacle_centers[o].y()) << ',' << fmt(rec.obstacle_centers[o].z())
            << ',' << fmt(config.obstacles[o].radius) << '\n';
  }

  {
    std::ofstream out(fs::path(out_dir) / "metrics.json");
    if (!out) throw ConfigError("cannot write metrics.json in '" + out_dir + "'");
    out << metrics_to_json(log.metrics) << '\n';
  }
}

std::vector<AgentCsvRow> read_agent_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open CSV file '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty CSV file '" + path + "'");
  if (line != kAgentHeader)
    throw ConfigError("unexpected CSV header in '" + path + "'");

  std::vector<AgentCsvRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 24)
      throw ConfigError("malformed CSV row in '" + path + "': " + line);

    AgentCsvRow row;
    row.t = std::stod(cells[0]);
    Vec12 x;
    for (int k = 0; k < 12; ++k) x(k) = std::stod(cells[1 + k]);
    row.state = RigidBodyState::unflatten(x);
    Vec6 tau;
    for (int k = 0; k < 6; ++k) tau(k) = std::stod(cells[13 + k]);
    row.input = ControlInput::unflatten(tau);
    row.s_v_max = std::stod(cells[19]);
    row.s_h_min = std::stod(cells[20]);
    row.solver_iters = std::stoi(cells[21]);
    row.solver_status = cells[22];
    row.solve_time_s = std::stod(cells[23]);
    rows.push_back(row);
  }
  return rows;
}

std::string metrics_to_json(const Metrics& metrics) {
  nlohmann::json j;
  j["min_obstacle_clearance"] = metrics.min_obstacle_clearance;
  j["obstacle_clearance_defined"] = metrics.obstacle_clearance_defined;
  j["max_leader_tracking_error"] = metrics.max_leader_tracking_error;
  j["max_interagent_comm_distance"] = metrics.max_interagent_comm_distance;
  j["comm_distance_defined"] = metrics.comm_distance_defined;
  j["formation_rmse_per_interval"] = metrics.formation_rmse_per_interval;
  j["connectivity_violations"] = metrics.connectivity_violations;
  return j.dump(2);
}

}  // namespace auvfleet
