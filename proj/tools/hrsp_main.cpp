// hrsp: run scenarios, bench suites and rho tables.
//
// Exit codes: 0 success, 2 usage error, 3 invalid config, 4 runtime error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "hrsp/experiment.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kUsage = 2;
constexpr int kConfig = 3;
constexpr int kRuntime = 4;

fs::path default_out_root() {
  if (const char* env = std::getenv("HRSP_OUT_DIR"); env && *env) return env;
  return "hrsp_out";
}

int cmd_run(const std::string& path, std::optional<std::uint64_t> seed, std::optional<std::size_t> max_jumps,
            const std::string& out) {
  hrsp::ExperimentConfig cfg;
  try {
    cfg = hrsp::load_config(path);
    if (seed) cfg.seed = *seed;
    if (max_jumps) cfg.stop.max_jumps = *max_jumps;
    cfg.noise.seed = cfg.seed;
    const auto problems = hrsp::validate_experiment(cfg);
    if (!problems.empty()) throw hrsp::ConfigError("invalid experiment config", problems);
  } catch (const hrsp::ConfigError& e) {
    std::cerr << "config error: " << path << '\n';
    if (e.details().empty()) std::cerr << "  " << e.what() << '\n';
    for (const auto& d : e.details()) std::cerr << "  " << d << '\n';
    return kConfig;
  }

  fs::path dir;
  if (!out.empty()) dir = out;
  else if (!cfg.output_dir.empty()) dir = cfg.output_dir;
  else dir = default_out_root() / cfg.name;

  try {
    const hrsp::RunOutcome o = hrsp::run_to_directory(cfg, dir);
    std::cout << hrsp::summary_json(o.summary);
    if (o.error) {
      std::cerr << "runtime error after " << o.summary.jumps << " jumps: " << *o.error << '\n';
      std::cerr << "partial artifacts in " << dir.string() << '\n';
      return kRuntime;
    }
    std::cerr << "artifacts in " << dir.string() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return kRuntime;
  }
  return 0;
}

int cmd_bench(const std::string& suite, std::size_t seeds, const std::string& out) {
  hrsp::BenchResult r;
  try {
    r = hrsp::run_bench(suite, seeds);
  } catch (const hrsp::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return kRuntime;
  }
  const fs::path dir = out.empty() ? default_out_root() / ("bench_" + suite) : fs::path(out);
  try {
    fs::create_directories(dir);
    std::ofstream rows(dir / "runs.csv", std::ios::binary);
    hrsp::write_bench_csv(rows, r);
    std::ofstream agg(dir / "aggregate.csv", std::ios::binary);
    hrsp::write_bench_aggregate_csv(agg, r);
    if (!rows || !agg) throw std::runtime_error("cannot write bench tables to " + dir.string());
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return kRuntime;
  }
  hrsp::print_bench_table(std::cout, r);
  std::cerr << "tables in " << dir.string() << '\n';
  return 0;
}

int cmd_rho(double lo, double hi, std::size_t points, const std::string& out) {
  std::vector<hrsp::RhoRow> rows;
  try {
    rows = hrsp::rho_table(lo, hi, points);
  } catch (const hrsp::DomainError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  }
  if (out.empty()) {
    hrsp::write_rho_csv(std::cout, rows);
    return 0;
  }
  std::ofstream os(out, std::ios::binary);
  hrsp::write_rho_csv(os, rows);
  if (!os) {
    std::cerr << "runtime error: cannot write " << out << '\n';
    return kRuntime;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid Recursive Smith-Powell direct search"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run one scenario and write arc.csv, config.json, summary.json");
  std::string config_path, run_out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> max_jumps;
  run->add_option("config", config_path, "Scenario JSON file")->required();
  run->add_option("--seed", seed, "Override the run seed");
  run->add_option("--max-jumps", max_jumps, "Override stop.max_jumps");
  run->add_option("--out", run_out, "Output directory (default $HRSP_OUT_DIR/<name>)");

  auto* bench = app.add_subcommand("bench", "Run a bench suite: convergence, robustness or adversarial");
  std::string suite, bench_out;
  std::size_t seeds = 10;
  bench->add_option("suite", suite, "Suite name")->required();
  bench->add_option("--seeds", seeds, "Seeds per group")->check(CLI::PositiveNumber)->capture_default_str();
  bench->add_option("--out", bench_out, "Output directory (default $HRSP_OUT_DIR/bench_<suite>)");

  auto* rho = app.add_subcommand("rho-table", "Log-spaced table of rho");
  double lo = 1e-3, hi = 4.0;
  std::size_t points = 50;
  std::string rho_out;
  rho->add_option("--min", lo, "Smallest step")->capture_default_str();
  rho->add_option("--max", hi, "Largest step")->capture_default_str();
  rho->add_option("--points", points, "Number of rows")->capture_default_str();
  rho->add_option("--out", rho_out, "CSV file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUsage;
  }

  if (*run) return cmd_run(config_path, seed, max_jumps, run_out);
  if (*bench) return cmd_bench(suite, seeds, bench_out);
  return cmd_rho(lo, hi, points, rho_out);
}
