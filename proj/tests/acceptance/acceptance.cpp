// One PASS/FAIL line per acceptance criterion. Exit status is nonzero when any criterion fails,
// except the ones listed as known unattainable (still printed as FAIL).
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "tha/scenario.hpp"

namespace fs = std::filesystem;
using tha::ScenarioConfig;
using tha::ScenarioResult;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// All checks whose name starts with one of `prefixes`; every one must pass.
Outcome collect(const ScenarioResult& res, const std::vector<std::string>& prefixes) {
  Outcome o{true, ""};
  std::size_t found = 0;
  for (const auto& c : res.checks)
    for (const auto& p : prefixes)
      if (c.name.rfind(p, 0) == 0) {
        ++found;
        o.passed = o.passed && c.passed;
        if (!o.detail.empty()) o.detail += "; ";
        o.detail += c.name + (c.passed ? " ok " : " FAILED ") + c.detail;
        break;
      }
  if (found == 0) return {false, "no matching checks"};
  return o;
}

Outcome run(const std::string& id, const std::vector<std::string>& prefixes,
            const std::function<void(ScenarioConfig&)>& tweak = {}, double budget = 0.0) {
  auto config = tha::default_config(id);
  if (tweak) tweak(config);
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = collect(tha::run_scenario(config), prefixes);
  } catch (const std::exception& e) {
    return {false, std::string("error: ") + e.what()};
  }
  const double t = seconds_since(t0);
  char buf[64];
  std::snprintf(buf, sizeof buf, "; runtime=%.1fs", t);
  o.detail += buf;
  if (budget > 0.0) {
    std::snprintf(buf, sizeof buf, " budget=%.0fs", budget);
    o.detail += buf;
    o.passed = o.passed && t < budget;
  }
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism() {
  const fs::path base = fs::temp_directory_path() / "tha_acceptance_selftest";
  fs::remove_all(base);
  const fs::path a = base / "a", b = base / "b";
  const std::string cli = THA_CLI_PATH;
  const int ra = std::system((cli + " selftest --out " + a.string() + " > /dev/null").c_str());
  const int rb = std::system((cli + " selftest --out " + b.string() + " > /dev/null").c_str());
  if (ra != 0 || rb != 0) return {false, "selftest exit status " + std::to_string(ra) + "/" + std::to_string(rb)};
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file() || e.path().extension() != ".csv") continue;
    ++files;
    const fs::path other = b / fs::relative(e.path(), a);
    if (!fs::exists(other) || slurp(e.path()) != slurp(other))
      return {false, "differs: " + fs::relative(e.path(), a).string()};
  }
  fs::remove_all(base);
  if (files == 0) return {false, "no CSV output"};
  return {true, "both runs passed; " + std::to_string(files) + " CSV files byte-identical"};
}

}  // namespace

int main() {
  const std::set<int> known_unattainable{9};
  std::vector<std::pair<int, std::function<Outcome()>>> criteria{
      {1, [] { return run("verify-kernel", {"kernel_crossvalidation"}, {}, 60.0); }},
      {2, [] { return run("verify-identities", {"l2_constant_"}, [](ScenarioConfig& c) { c.n = 128; }, 300.0); }},
      {3, [] { return run("verify-identities", {"harmonic_convergence", "square_convergence"}); }},
      {4, [] { return run("verify-geometry", {"containment", "tube_volume", "dyadic_tiling"}); }},
      {5, [] { return run("covering", {"covering_constant_", "covering_drift_"}); }},
      {6, [] { return run("maximal-suite", {"domination_"}); }},
      {7, [] { return run("good-lambda", {"good_lambda_"}); }},
      {8, [] { return run("separation", {"separation_"}); }},
      {9, [] { return run("reproducing", {"reproducing_"}); }},
      {10, [] { return run("llogl", {"llogl_"}); }},
      {11, determinism},
  };
  int unexpected = 0;
  for (const auto& [k, fn] : criteria) {
    const Outcome o = fn();
    const bool known = !o.passed && known_unattainable.count(k) > 0;
    std::cout << "criterion " << k << ": " << (o.passed ? "PASS" : "FAIL") << (known ? " (known unattainable)" : "")
              << " - " << o.detail << std::endl;
    if (!o.passed && !known) ++unexpected;
  }
  return unexpected == 0 ? 0 : 1;
}
