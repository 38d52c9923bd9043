#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "hrsp/core.hpp"
#include "hrsp/hybrid.hpp"
#include "hrsp/noise.hpp"
#include "hrsp/objectives.hpp"
#include "hrsp/plants.hpp"

namespace hrsp {

struct ObjectiveSpec {
  std::string name = "sphere";
  ObjectiveParams params;

  bool operator==(const ObjectiveSpec&) const = default;
};

/// Controller start values. The logic variables start at k = q = m = 0,
/// p = 1, lambda = 0, alpha = 0.
struct InitialState {
  Vector x;
  Vector zeta;  // Dubins heading; empty for the other plants
  std::vector<Vector> directions;
  std::vector<double> steps;
  double phi = 0.01;
  std::optional<double> z;  // f(x) when absent
  std::size_t lead = 0;     // v = d_lead, delta = steps[lead]
  double tau = 0.0;

  // Compares vector sizes before contents.
  bool operator==(const InitialState& o) const;
};

struct ExperimentConfig {
  std::string name = "run";
  ObjectiveSpec objective;
  PlantModel plant;
  AlgorithmConfig algorithm;
  InitialState initial;
  NoiseSpec noise;  // noise.seed is taken from `seed`
  HybridStop stop;
  std::string output_dir;  // empty: chosen by the caller
  std::uint64_t seed = 0;
  std::vector<std::string> notes;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Throws ConfigError with one detail per problem: malformed JSON, unknown
/// keys, wrong types, unknown registry names.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Pretty JSON with every field written out.
std::string emit_config(const ExperimentConfig& cfg);

/// Collects every semantic problem (registries, shapes, parameter
/// inequalities, spanning directions). Empty means valid.
std::vector<std::string> validate_experiment(const ExperimentConfig& cfg);

struct RunSummary {
  std::string name;
  std::string status = "ok";  // ok | error
  std::size_t jumps = 0;
  Vector final_x;
  double final_f = 0.0;
  double final_phi = 0.0;
  std::optional<double> distance_to_minimizer;
  std::size_t z_violations = 0;
  std::size_t line_minimizations = 0;
  bool grammar_ok = true;
  double max_displacement_error = 0.0;
  double max_timer_error = 0.0;
  double wall_seconds = 0.0;  // written to timing.json only
};

struct RunOutcome {
  RunSummary summary;
  HybridArc arc;
  std::optional<std::string> error;  // runtime failure message
};

/// Builds the objective, noise model and start states and runs the closed
/// loop. Throws ConfigError for an invalid config. Runtime failures are
/// caught and returned in `error` together with the partial arc.
RunOutcome run_experiment(const ExperimentConfig& cfg);

/// run_experiment plus artifacts in `out_dir`: arc.csv, config.json,
/// summary.json, timing.json and, on failure, error.json.
RunOutcome run_to_directory(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

std::string summary_json(const RunSummary& s);

/// The two bundled simulation set-ups.
ExperimentConfig fig1_config();
ExperimentConfig fig2_config();

// ---------------------------------------------------------------------------
// Bench suites
// ---------------------------------------------------------------------------

struct BenchRow {
  std::string group;  // e.g. "n=3", "phi_floor=0.1"
  std::uint64_t seed = 0;
  std::size_t jumps = 0;
  std::optional<std::size_t> jumps_to_tolerance;
  double final_error = 0.0;
  std::size_t violations = 0;
  bool ok = false;  // suite-specific success flag
};

struct BenchAggregate {
  std::string group;
  std::size_t runs = 0;
  std::size_t successes = 0;
  std::optional<double> median_jumps_to_tolerance;
  double median_final_error = 0.0;
  std::size_t violations = 0;
};

struct BenchResult {
  std::string suite;
  std::vector<BenchRow> rows;
  std::vector<BenchAggregate> aggregates;
};

std::vector<std::string> bench_suites();

/// Throws ConfigError listing the suites for an unknown name.
BenchResult run_bench(const std::string& suite, std::size_t seeds);

void write_bench_csv(std::ostream& os, const BenchResult& r);
void write_bench_aggregate_csv(std::ostream& os, const BenchResult& r);
void print_bench_table(std::ostream& os, const BenchResult& r);

// ---------------------------------------------------------------------------
// rho table
// ---------------------------------------------------------------------------

struct RhoRow {
  double delta = 0.0;
  double value = 0.0;
  double log_value = 0.0;
  std::string flag;  // "", "underflow" or "limit"
};

/// Log-spaced samples of rho on [lo, hi]. With lo = 0 the first row is the
/// limit value at 0 and the remaining points - 1 rows are log-spaced over
/// [hi * 1e-6, hi]. Throws DomainError unless 0 <= lo < hi and points >= 2.
std::vector<RhoRow> rho_table(double lo, double hi, std::size_t points);
void write_rho_csv(std::ostream& os, const std::vector<RhoRow>& rows);

}  // namespace hrsp
