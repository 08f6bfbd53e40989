// Scenario runner: polyalg run <config.json> [--output-dir DIR] [--threads N] [--verbose]
//
// Exit status: 0 all checks pass, 1 a check failed, 2 the config does not
// parse, 3 the config does not validate.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "polyalg/scenario.hpp"

namespace {

int threads_from_env() {
  const char* env = std::getenv("PLA_SIM_THREADS");
  if (!env || !*env) return 1;
  try {
    const int n = std::stoi(env);
    return n > 0 ? n : 1;
  } catch (const std::exception&) {
    std::cerr << "warning: ignoring PLA_SIM_THREADS='" << env << "'\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Polynomial Lie algebra scenarios for multiboson Hamiltonians"};
  app.require_subcommand(1);
  auto* run = app.add_subcommand("run", "Run the tasks listed in a scenario config");
  std::string config_path;
  std::string output_dir;
  int threads = 0;
  bool verbose = false;
  run->add_option("config", config_path, "Scenario config (JSON)")->required();
  run->add_option("--output-dir", output_dir, "Directory for artifacts (overrides output_dir in the config)");
  run->add_option("--threads", threads, "Worker threads (default: PLA_SIM_THREADS or 1)")->check(CLI::PositiveNumber);
  run->add_flag("--verbose,-v", verbose, "Log task progress and dropped blocks to stderr");
  CLI11_PARSE(app, argc, argv);

  std::ifstream in(config_path);
  if (!in) {
    std::cerr << "error: cannot read " << config_path << "\n";
    return 2;
  }
  std::stringstream buf;
  buf << in.rdbuf();

  polyalg::ScenarioConfig cfg;
  try {
    cfg = polyalg::parse_config(buf.str());
  } catch (const polyalg::ConfigParseError& e) {
    std::cerr << config_path << ":" << e.line() << ":" << e.column() << ": " << e.what() << "\n";
    return 2;
  } catch (const polyalg::Error& e) {
    std::cerr << config_path << ": invalid config: " << e.what() << "\n";
    return 3;
  }
  if (!output_dir.empty()) cfg.output_dir = output_dir;

  polyalg::RunOptions opts;
  opts.threads = threads > 0 ? threads : threads_from_env();
  opts.verbose = verbose;

  polyalg::ScenarioResult result;
  try {
    result = polyalg::run_scenario(cfg, opts);
    const auto written = result.artifacts.flush(cfg.output_dir);
    if (verbose) {
      for (const auto& p : written) std::clog << "wrote " << p.string() << "\n";
    }
  } catch (const polyalg::SizeError& e) {
    std::cerr << "invalid config: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  int failed = 0;
  for (const auto& e : result.entries) {
    if (!e.check.pass) {
      ++failed;
      std::cerr << "FAIL " << e.task << ": " << e.check.identity_name << " residual "
                << polyalg::format_double(e.check.max_residual) << " > " << polyalg::format_double(e.check.tolerance)
                << "\n";
    }
  }
  std::cout << result.entries.size() - static_cast<std::size_t>(failed) << "/" << result.entries.size()
            << " checks passed; artifacts in " << cfg.output_dir << "\n";
  return failed ? 1 : 0;
}
