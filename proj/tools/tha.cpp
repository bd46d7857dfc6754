// tha: scenario runner and kernel dump.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tha/errors.hpp"
#include "tha/grid.hpp"
#include "tha/kernels.hpp"
#include "tha/operators.hpp"
#include "tha/scenario.hpp"

namespace {

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;

void apply_threads(int cli_threads) {
  int threads = cli_threads;
  if (threads < 0) {
    if (const char* env = std::getenv("THA_THREADS")) {
      try {
        threads = std::stoi(env);
      } catch (const std::exception&) {
        throw tha::ConfigError(std::string("THA_THREADS must be an integer, got '") + env + "'");
      }
    }
  }
  if (threads < 0) threads = 0;
  tha::set_thread_count(threads);
}

std::vector<double> parse_radii(const std::string& s) {
  std::vector<double> r;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      r.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw tha::ConfigError("--r expects three comma-separated radii");
    }
  }
  if (r.size() != 3) throw tha::ConfigError("--r expects three comma-separated radii");
  return r;
}

int run(const std::string& path, const std::string& out, int threads) {
  apply_threads(threads);
  tha::ScenarioConfig config = tha::load_config(path);
  if (!out.empty()) config.out_dir = out;
  const auto result = tha::run_scenario(config);
  tha::write_result(result, config.out_dir);
  std::cout << tha::summary_text(result, false);
  return result.ok() ? kPass : kFail;
}

int dump_kernel(const std::string& radii, int m, int n, double L, const std::string& method,
                const std::string& out) {
  const auto r = parse_radii(radii);
  const auto spec = tha::make_grid(m, n, L);
  const auto triple = tha::ScaleTriple::make(r[0], r[1], r[2]);
  tha::SpatialField k;
  if (method == "quadrature") {
    k = tha::twisted_kernel_physical(spec, triple);
  } else {
    tha::FrequencyField F{spec, std::vector<tha::Complex>(spec.size())};
    const auto mult = tha::twisted_multiplier_field(spec, triple);
    for (std::size_t i = 0; i < mult.size(); ++i) F.coefficients[i] = mult[i];
    k = tha::inverse_transform(F, true);
  }
  if (out.empty()) {
    tha::write_field_csv(std::cout, k);
  } else {
    std::ofstream file(out);
    if (!file) throw tha::ConfigError("cannot write '" + out + "'");
    tha::write_field_csv(file, k);
  }
  return kPass;
}

int selftest(const std::string& out, int threads) {
  apply_threads(threads);
  bool ok = true;
  std::vector<tha::ScenarioResult> results;
  for (const auto& config : tha::selftest_configs()) {
    results.push_back(tha::run_scenario(config));
    ok = ok && results.back().ok();
  }
  const auto configs = tha::selftest_configs();
  for (std::size_t k = 0; k < results.size(); ++k) {
    tha::write_result(results[k], (std::filesystem::path(out) / configs[k].out_dir).string());
    std::cout << tha::summary_text(results[k], false);
  }
  std::cout << "selftest: " << (ok ? "PASS" : "FAIL") << '\n';
  return ok ? kPass : kFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Twisted harmonic analysis scenario runner"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  int threads = -1;
  auto* run_cmd = app.add_subcommand("run", "Run one scenario config");
  run_cmd->add_option("config", config_path, "INI scenario file")->required();
  run_cmd->add_option("--out", out_dir, "Output directory (overrides the config)");
  run_cmd->add_option("--threads", threads, "Worker threads (fallback: THA_THREADS)")->check(CLI::NonNegativeNumber);

  std::string radii, method = "spectral", dump_out;
  int m = 1, n = 64;
  double L = 16.0;
  auto* dump_cmd = app.add_subcommand("dump-kernel", "Write the periodic twisted Poisson kernel as CSV");
  dump_cmd->add_option("--r", radii, "Radii r1,r2,r3")->required();
  dump_cmd->add_option("--m", m, "Block dimension");
  dump_cmd->add_option("--n", n, "Points per axis");
  dump_cmd->add_option("--L", L, "Period");
  dump_cmd->add_option("--method", method, "spectral or quadrature")
      ->check(CLI::IsMember({"spectral", "quadrature"}));
  dump_cmd->add_option("--out", dump_out, "CSV path (default: stdout)");

  std::string self_out = "selftest-out";
  auto* self_cmd = app.add_subcommand("selftest", "Run the must-pass scenarios at small sizes");
  self_cmd->add_option("--out", self_out, "Output directory");
  self_cmd->add_option("--threads", threads, "Worker threads (fallback: THA_THREADS)")->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kUsage;
  }

  try {
    if (*run_cmd) return run(config_path, out_dir, threads);
    if (*dump_cmd) return dump_kernel(radii, m, n, L, method, dump_out);
    if (*self_cmd) return selftest(self_out, threads);
  } catch (const tha::ConfigError& e) {
    std::cerr << "tha: " << e.what() << '\n';
    return kUsage;
  } catch (const tha::PreconditionError& e) {
    std::cerr << "tha: " << e.what() << '\n';
    return kUsage;
  } catch (const tha::DomainError& e) {
    std::cerr << "tha: " << e.what() << '\n';
    return kUsage;
  } catch (const tha::SpecMismatch& e) {
    std::cerr << "tha: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
