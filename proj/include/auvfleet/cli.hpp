#pragma once

#include <optional>
#include <string>

namespace auvfleet {

struct RunOptions {
  std::string scenario;  // file path or the literal "paper" for the built-in
  std::string output_dir{"out"};
  std::optional<int> horizon;
  std::optional<double> dt;
  std::optional<double> duration;
  std::optional<unsigned> seed;
  std::optional<std::string> mode;  // "chain" or "delayed"
  bool plot{false};
  bool repro{false};  // zero wall-clock columns for byte-identical reruns
};

/// Loads or builds the scenario, runs it, writes CSVs, metrics JSON and
/// (optionally) SVG figures. Returns 0 iff the run completed and every run
/// invariant holds.
int cmd_run(const RunOptions& options);

/// Parses and checks a scenario without running it; prints a summary on
/// success or every violated invariant on failure.
int cmd_validate(const std::string& scenario_path);

/// Full command line entry point (subcommands `run` and `validate`).
/// Verbosity via the AUVFLEET_LOG environment variable: quiet|info|debug.
int cli_main(int argc, const char* const* argv);

}  // namespace auvfleet
