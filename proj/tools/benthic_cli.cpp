#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "benthic/benthic.hpp"

namespace {

using namespace benthic;

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError:
    case ErrorCode::SchemaError:
    case ErrorCode::UnknownPreset:
    case ErrorCode::InvalidParameter:
    case ErrorCode::NonconformingGrowth:
      return 2;
    case ErrorCode::IoError:
      return 4;
    default:
      return 3;
  }
}

// Pulls "--section.key=value" pairs out of argv before CLI11 sees them.
std::vector<std::pair<std::string, std::string>> take_overrides(std::vector<std::string>& args) {
  std::vector<std::pair<std::string, std::string>> out;
  std::vector<std::string> rest;
  for (const auto& a : args) {
    const auto dot = a.find('.');
    const auto eq = a.find('=');
    if (a.rfind("--", 0) == 0 && dot != std::string::npos && eq != std::string::npos && dot < eq) {
      out.emplace_back(a.substr(2, eq - 2), a.substr(eq + 1));
    } else {
      rest.push_back(a);
    }
  }
  args = std::move(rest);
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_all(const std::vector<Artifact>& arts, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create '" + dir + "': " + ec.message());
  for (const auto& a : arts) {
    const std::string path = (std::filesystem::path(dir) / a.name).string();
    emit_csv(a.table, path);
    std::cout << path << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  auto overrides = take_overrides(args);

  CLI::App app{"benthic-drift model solver"};
  app.require_subcommand(1);
  std::string config_path, out_dir = ".";
  unsigned jobs = 1;
  long seed = -1, grid_n = -1;
  app.add_option("--config", config_path, "config file")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "seed for random initial data");
  app.add_option("--grid-n", grid_n, "number of cells");

  std::string preset_name;
  auto* sim = app.add_subcommand("simulate", "integrate from the configured initial data");
  auto* steady = app.add_subcommand("steady", "maximal steady state");
  auto* eigen = app.add_subcommand("eigen", "principal eigenvalue at the zero or maximal state");
  auto* sweep = app.add_subcommand("sweep", "maximal-state biomass over a parameter range");
  auto* regime = app.add_subcommand("regime", "regime thresholds");
  auto* crit = app.add_subcommand("critical-m2", "critical benthic mortality");
  auto* preset = app.add_subcommand("preset", "run a named experiment");
  preset->add_option("name", preset_name, "preset name");
  for (auto* sub : {sim, steady, eigen, sweep, regime, crit, preset}) sub->fallthrough();

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (seed >= 0) overrides.emplace_back("run.seed", std::to_string(seed));
    if (grid_n >= 0) overrides.emplace_back("grid.n", std::to_string(grid_n));
    if (!preset_name.empty()) overrides.emplace_back("preset", preset_name);
    const std::string text = config_path.empty() ? std::string() : read_file(config_path);
    const RunConfig cfg = resolve_config(text, overrides);

    std::vector<Artifact> arts;
    if (*sim) arts = run_simulate(cfg);
    else if (*steady) arts = run_steady(cfg);
    else if (*eigen) arts = run_eigen(cfg);
    else if (*sweep) arts = run_sweep(cfg, jobs);
    else if (*regime) arts = run_regime(cfg);
    else if (*crit) arts = run_critical_m2(cfg, jobs);
    else if (*preset) {
      const std::string& name = cfg.text("preset");
      if (name.empty()) throw Error(ErrorCode::UnknownPreset, "no preset named on the command line or in the config");
      arts = run_preset(name, cfg, jobs);
    }
    write_all(arts, out_dir);
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 3;
  }
  return 0;
}
