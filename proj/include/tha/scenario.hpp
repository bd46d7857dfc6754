#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace tha {

/// One scenario run, parsed from an INI file:
///
///   [scenario] id, seed        [grid] m, n, L          [ladder] r_min, decades, ppd
///   [cone] beta                [lambda] min, max, count, relative
///   [suite] generators, count, seed, max_mode, modes, width
///   [params] scenario-specific keys           [output] dir
struct ScenarioConfig {
  std::string id;
  std::uint64_t seed = 7;
  int m = 1;
  int n = 64;
  double L = 16.0;
  double r_min = 0.25;
  double decades = 2.0;
  int ppd = 4;
  double beta = 16.0;
  double lambda_min = 1e-3;
  double lambda_max = 10.0;
  int lambda_count = 24;
  bool lambda_relative = true;  ///< lambdas scale with sup |f|
  std::vector<std::string> generators;
  std::size_t suite_count = 5;
  std::uint64_t suite_seed = 7;
  int max_mode = 4;
  int modes = 6;
  double width = 0.0;
  std::map<std::string, std::string> params;
  std::string out_dir = "out";
};

const std::vector<std::string>& scenario_ids();

/// Scenario defaults with the given id.
ScenarioConfig default_config(const std::string& id);
/// Throws ConfigError on syntax errors, unknown sections/keys, bad values, or grids over the
/// resource limit.
ScenarioConfig parse_config_text(const std::string& text);
ScenarioConfig load_config(const std::string& path);

struct Check {
  std::string name;
  bool must_pass = true;
  bool passed = true;
  std::string detail;
};

struct ScenarioResult {
  std::string id;
  std::vector<Check> checks;
  std::map<std::string, std::string> files;  ///< file name -> CSV content
  std::vector<std::string> notes;

  bool ok() const;
};

ScenarioResult run_scenario(const ScenarioConfig& config);

/// Writes every CSV plus summary.txt (the only file with a timestamp) into `dir`.
void write_result(const ScenarioResult& result, const std::string& dir);
std::string summary_text(const ScenarioResult& result, bool with_timestamp);

/// Small configurations of the must-pass scenarios.
std::vector<ScenarioConfig> selftest_configs();

}  // namespace tha
