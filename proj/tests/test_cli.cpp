#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "auvfleet/cli.hpp"
#include "auvfleet/errors.hpp"
#include "auvfleet/scenario.hpp"

using namespace auvfleet;

namespace {

const std::string kFixtures = std::string(AUVFLEET_REPO_DIR) + "/tests/fixtures";

bool file_nonempty(const std::filesystem::path& p) {
  return std::filesystem::exists(p) && std::filesystem::file_size(p) > 0;
}

}  // namespace

TEST_CASE("validate accepts the built-in scenario and the mini fixture") {
  CHECK(cmd_validate("paper") == 0);
  CHECK(cmd_validate(kFixtures + "/mini.json") == 0);
}

TEST_CASE("validate rejects broken fixtures") {
  CHECK(cmd_validate(kFixtures + "/bad_overlap.json") != 0);
  CHECK(cmd_validate(kFixtures + "/bad_range.json") != 0);
  CHECK(cmd_validate(kFixtures + "/bad_parse.json") != 0);
  CHECK(cmd_validate(kFixtures + "/does_not_exist.json") != 0);
}

TEST_CASE("parse diagnostics name the offending field") {
  CHECK_THROWS_WITH_AS(
      ScenarioConfig::from_json_text(R"({"mode": "sideways"})"),
      doctest::Contains("mode"), ConfigError);
  CHECK_THROWS_WITH_AS(
      ScenarioConfig::from_json_text(R"({"comm_rage": 10.0})"),
      doctest::Contains("comm_rage"), ConfigError);
  CHECK_THROWS_WITH_AS(
      ScenarioConfig::from_json_text(
          R"({"agents": [{"role": "leader", "initial_pose": [0, 0]}]})"),
      doctest::Contains("initial_pose"), ConfigError);
}

TEST_CASE("run produces the documented artifacts and exit code") {
  const std::string out = "/tmp/auvfleet_test_cli_run";
  std::filesystem::remove_all(out);

  RunOptions options;
  options.scenario = kFixtures + "/mini.json";
  options.output_dir = out;
  options.plot = true;
  options.repro = true;
  setenv("AUVFLEET_LOG", "quiet", 1);
  CHECK(cmd_run(options) == 0);

  CHECK(file_nonempty(out + "/agent1.csv"));
  CHECK(file_nonempty(out + "/obstacles.csv"));
  CHECK(file_nonempty(out + "/metrics.json"));
  CHECK(file_nonempty(out + "/trajectory.svg"));
  CHECK(file_nonempty(out + "/tracking.svg"));
  CHECK(file_nonempty(out + "/controls.svg"));

  // duration 1.5 at dt 0.1: 15 control steps plus the terminal record.
  std::ifstream csv(out + "/agent1.csv");
  int lines = 0;
  std::string line;
  while (std::getline(csv, line)) ++lines;
  CHECK(lines == 1 + 16);

  std::ifstream svg(out + "/trajectory.svg");
  std::string head;
  std::getline(svg, head);
  CHECK(head.find("<svg") != std::string::npos);
}

TEST_CASE("run rejects malformed scenarios and bad overrides") {
  RunOptions options;
  options.scenario = kFixtures + "/bad_parse.json";
  options.output_dir = "/tmp/auvfleet_test_cli_bad";
  setenv("AUVFLEET_LOG", "quiet", 1);
  CHECK(cmd_run(options) != 0);

  options.scenario = kFixtures + "/mini.json";
  options.mode = "sideways";
  CHECK(cmd_run(options) != 0);
}

TEST_CASE("cli entry point parses subcommands") {
  setenv("AUVFLEET_LOG", "quiet", 1);
  const char* validate_ok[] = {"auvfleet", "validate", "paper"};
  CHECK(cli_main(3, validate_ok) == 0);

  const std::string mini = kFixtures + "/mini.json";
  const std::string out = "/tmp/auvfleet_test_cli_main";
  std::filesystem::remove_all(out);
  const char* run_ok[] = {"auvfleet", "run",      "--scenario", mini.c_str(),
                          "--out",    out.c_str(), "--duration", "0.5",
                          "--repro"};
  CHECK(cli_main(9, run_ok) == 0);
  CHECK(file_nonempty(out + "/agent1.csv"));

  const char* unknown[] = {"auvfleet", "fly"};
  CHECK(cli_main(2, unknown) != 0);
}
