#include "auvfleet/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "auvfleet/errors.hpp"
#include "auvfleet/log_io.hpp"
#include "auvfleet/plot.hpp"
#include "auvfleet/scenario.hpp"
#include "auvfleet/simulation.hpp"

namespace auvfleet {
namespace {

enum class LogLevel { kQuiet = 0, kInfo = 1, kDebug = 2 };

LogLevel log_level() {
  const char* env = std::getenv("AUVFLEET_LOG");
  if (env == nullptr) return LogLevel::kInfo;
  const std::string v(env);
  if (v == "quiet") return LogLevel::kQuiet;
  if (v == "debug") return LogLevel::kDebug;
  return LogLevel::kInfo;
}

ScenarioConfig load_scenario(const std::string& spec) {
  if (spec == "paper") return builtin_scenario();
  return ScenarioConfig::from_json_file(spec);
}

}  // namespace

int cmd_run(const RunOptions& options) {
  const LogLevel level = log_level();
  ScenarioConfig config;
  try {
    config = load_scenario(options.scenario);
    if (options.horizon) config.horizon = *options.horizon;
    if (options.dt) config.dt = *options.dt;
    if (options.duration) config.duration = *options.duration;
    if (options.seed) config.seed = *options.seed;
    if (options.mode) {
      if (*options.mode == "chain")
        config.mode = ExecutionMode::kChain;
      else if (*options.mode == "delayed")
        config.mode = ExecutionMode::kDelayed;
      else
        throw ConfigError("mode must be 'chain' or 'delayed'");
    }
    config.validate();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }

  if (level >= LogLevel::kInfo)
    std::cerr << "running scenario '" << options.scenario << "': "
              << config.agents.size() << " agents, " << config.obstacles.size()
              << " obstacles, " << config.duration << " s at dt=" << config.dt << '\n';

  double next_report = 0.0;
  const auto on_step = [&](const StepRecord& rec) {
    if (level == LogLevel::kDebug) {
      std::cerr << "t=" << rec.t;
      for (const AgentRecord& a : rec.agents)
        std::cerr << "  [" << to_string(a.stats.status) << " " << a.stats.iterations
                  << "it]";
      std::cerr << '\n';
    } else if (level == LogLevel::kInfo && rec.t >= next_report) {
      std::cerr << "  t = " << rec.t << " s\n";
      next_report += 10.0;
    }
  };

  SimLog log;
  try {
    log = run_scenario(config, on_step);
    write_run_outputs(log, config, options.output_dir, options.repro);
    if (options.plot) {
      namespace fs = std::filesystem;
      write_trajectory_svg(log, config, (fs::path(options.output_dir) / "trajectory.svg").string());
      write_tracking_svg(log, config, (fs::path(options.output_dir) / "tracking.svg").string());
      write_controls_svg(log, config, (fs::path(options.output_dir) / "controls.svg").string());
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }

  if (log.aborted) {
    std::cerr << "error: run aborted: " << log.abort_reason << '\n';
    return 1;
  }

  const std::vector<std::string> violations = check_run_invariants(log, config);
  if (level >= LogLevel::kInfo) {
    std::cerr << "metrics:\n" << metrics_to_json(log.metrics) << '\n';
    for (const std::string& v : violations) std::cerr << "violation: " << v << '\n';
  }
  return violations.empty() ? 0 : 1;
}

int cmd_validate(const std::string& scenario_path) {
  ScenarioConfig config;
  try {
    config = load_scenario(scenario_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  const std::vector<std::string> issues = config.problems();
  if (!issues.empty()) {
    std::cerr << "invalid scenario '" << scenario_path << "':\n";
    for (const std::string& p : issues) std::cerr << "  - " << p << '\n';
    return 1;
  }
  std::cout << "scenario '" << scenario_path << "' is valid:\n"
            << "  agents:             " << config.agents.size() << '\n'
            << "  horizon:            " << config.horizon << '\n'
            << "  dt:                 " << config.dt << " s\n"
            << "  duration:           " << config.duration << " s\n"
            << "  obstacles:          " << config.obstacles.size() << '\n'
            << "  schedule intervals: " << config.schedule.intervals().size() << '\n'
            << "  comm range:         " << config.comm_range << " m\n";
  return 0;
}

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"Leader-follower underwater vehicle fleet simulator"};
  app.require_subcommand(1);

  RunOptions run_options;
  CLI::App* run = app.add_subcommand("run", "Run a scenario and write logs");
  run->add_option("--scenario", run_options.scenario,
                  "Scenario JSON file, or 'paper' for the built-in benchmark")
      ->required();
  run->add_option("--out", run_options.output_dir, "Output directory")
      ->capture_default_str();
  int horizon = 0;
  double dt = 0.0, duration = 0.0;
  unsigned seed = 0;
  std::string mode;
  run->add_option("--horizon", horizon, "Override the prediction horizon");
  run->add_option("--dt", dt, "Override the sampling interval [s]");
  run->add_option("--duration", duration, "Override the run duration [s]");
  run->add_option("--seed", seed, "Override the scenario seed");
  run->add_option("--mode", mode, "Message timing: chain or delayed")
      ->check(CLI::IsMember({"chain", "delayed"}));
  run->add_flag("--plot", run_options.plot, "Write SVG figures");
  run->add_flag("--repro", run_options.repro,
                "Zero wall-clock columns so reruns are byte-identical");

  std::string validate_path;
  CLI::App* validate = app.add_subcommand("validate", "Check a scenario file");
  validate->add_option("scenario", validate_path, "Scenario JSON file or 'paper'")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  if (run->parsed()) {
    if (run->count("--horizon") > 0) run_options.horizon = horizon;
    if (run->count("--dt") > 0) run_options.dt = dt;
    if (run->count("--duration") > 0) run_options.duration = duration;
    if (run->count("--seed") > 0) run_options.seed = seed;
    if (run->count("--mode") > 0) run_options.mode = mode;
    return cmd_run(run_options);
  }
  return cmd_validate(validate_path);
}

}  // namespace auvfleet
