// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any failed.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "hrsp/experiment.hpp"
#include "hrsp/jam_demo.hpp"

using namespace hrsp;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

Vector vec(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

ExperimentConfig scenario(const char* name) { return load_config(fs::path(HRSP_SCENARIO_DIR) / name); }

Verdict fig1() {
  const auto t0 = std::chrono::steady_clock::now();
  const RunOutcome o = run_experiment(scenario("fig1_quadratic_pointmass.json"));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool ok = !o.error && o.summary.jumps <= 2000 && o.summary.final_x.norm() <= 0.05 &&
                  o.summary.final_f <= 5e-3 && secs < 5.0;
  return {ok, "jumps " + std::to_string(o.summary.jumps) + ", |x| " + fmt("%.3g", o.summary.final_x.norm()) +
                  ", f " + fmt("%.3g", o.summary.final_f) + ", " + fmt("%.2f", secs) + " s"};
}

Verdict fig2() {
  const RunOutcome o = run_experiment(scenario("fig2_rosenbrock_dubins.json"));
  const double dist = o.summary.distance_to_minimizer.value_or(INFINITY);
  const std::size_t rises = z_increase_count(o.arc, 3);
  const bool ok = !o.error && o.summary.jumps <= 10000 && dist <= 0.3 && rises == 0;
  return {ok, "jumps " + std::to_string(o.summary.jumps) + ", |x - (1,1)| " + fmt("%.3g", dist) +
                  ", z rises after warm-up " + std::to_string(rises)};
}

Verdict rho_suite() {
  const int N = 10000;
  bool mono = true;
  // Log space covers the underflowing end of the grid.
  double prev = log_rho(1e-3);
  for (int i = 1; i <= N; ++i) {
    const double cur = log_rho(1e-3 + (10.0 - 1e-3) * i / N);
    mono = mono && cur > prev;
    prev = cur;
  }
  double pv = rho(0.01);
  for (int i = 1; i <= N; ++i) {
    const double cur = rho(0.01 + (10.0 - 0.01) * i / N);
    mono = mono && cur > pv;
    pv = cur;
  }
  const double e = std::numbers::e;
  const double jump = std::abs(rho(e - 1e-12) - rho(e + 1e-12));
  double worst = 0.0;
  for (int i = 1; i <= N; ++i) {
    const double d = 0.05 * i / N;
    worst = std::max(worst, rho(d) / std::pow(d, 5.0));
  }
  const bool ok = mono && jump <= 1e-10 && worst <= 1e-6;
  return {ok, std::string("monotone ") + (mono ? "yes" : "no") + ", gap at e " + fmt("%.2g", jump) +
                  ", max rho/D^5 on (0, 0.05] " + fmt("%.3g", worst)};
}

// Exact line searches have no step scale, so the determinant guard only
// screens out dependent directions here. The default 0.001 on raw
// displacements also rejects short conjugate directions; that count is
// reported alongside.
constexpr double kDependenceGuard = 1e-9;

struct ExactTally {
  std::size_t reached = 0;
  std::size_t total = 0;
  double worst_conjugacy = 0.0;
};

ExactTally exact_quadratics(double delta_det) {
  ExactTally t;
  for (std::size_t n : {2u, 3u}) {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
      const auto f = make_random_spd_quadratic(n, seed);
      std::mt19937_64 gen(1000 + seed);
      std::uniform_real_distribution<double> u(-3.0, 3.0);
      Vector x0(static_cast<Eigen::Index>(n));
      for (Eigen::Index i = 0; i < x0.size(); ++i) x0[i] = u(gen);
      const ExactTrace tr = run_exact(*f.quadratic, x0, rotated_directions(n, u(gen)), delta_det, n * (n + 1));
      bool hit = false;
      for (const auto& p : tr.points) hit = hit || (p - f.quadratic->center).norm() <= 1e-6;
      for (const auto& c : tr.cycles) {
        if (!c.accepted) continue;
        for (const auto& [i, r] : c.conjugacy) t.worst_conjugacy = std::max(t.worst_conjugacy, r);
      }
      t.reached += hit ? 1 : 0;
      ++t.total;
    }
  }
  return t;
}

Verdict quadratic_termination() {
  const ExactTally t = exact_quadratics(kDependenceGuard);
  const ExactTally stock = exact_quadratics(AlgorithmConfig{}.delta_det);
  return {t.reached == t.total && t.worst_conjugacy <= 1e-8,
          std::to_string(t.reached) + "/" + std::to_string(t.total) + " reached, worst conjugacy " +
              fmt("%.2g", t.worst_conjugacy) + " (delta_det 1e-9; with 0.001: " + std::to_string(stock.reached) +
              "/" + std::to_string(stock.total) + ")"};
}

Verdict equivalence() {
  std::string detail;
  bool ok = true;
  for (const char* name : {"quadratic", "rosenbrock"}) {
    const auto f = make_objective(name, {});
    const ControllerState xc =
        initial_controller(uniform_direction_set(rotated_directions(2, std::numbers::pi / 8.0), 0.01), 0.01, 0.0);
    PlantModel plant;
    plant.kind = PlantKind::exact;
    NoiseModel noise;
    const std::size_t jumps = 1000;
    const HybridArc arc =
        run_closed_loop(plant, f, noise, PlantState{vec(1.5, 0.0), Vector()}, xc, AlgorithmConfig{}, {jumps, 0});
    StopRule stop;
    stop.max_cycles = 1'000'000;
    stop.max_evaluations = jumps + 1;
    const RspRun r = run(f, rsp_state_from_controller(vec(1.5, 0.0), xc), AlgorithmConfig{}, stop);
    const auto e = equivalence_check(arc, r.log, 1e-9);
    ok = ok && e.ok && e.compared >= 200;
    detail += std::string(detail.empty() ? "" : "; ") + name + " " + std::to_string(e.compared) + " jumps, max dev " +
              fmt("%.2g", e.max_deviation);
  }
  return {ok, detail};
}

Verdict jam() {
  const auto f = make_sphere(2);
  JamDemoOptions opts;
  opts.noise_bound = 0.5;
  opts.max_cycles = 600;
  const JamReport rep = jam_demo(f, vec(1.0, 0.0), uniform_direction_set(rotated_directions(2, std::numbers::pi / 8.0), 0.01),
                                 0.01, AlgorithmConfig{}, opts);
  const bool ok = rep.activated && rep.frozen && rep.frozen_cycles >= 500 && rep.certificate_checks > 0 &&
                  rep.certificate_violations == 0;
  return {ok, "activation at measurement " + std::to_string(rep.activation_measurement.value_or(0)) + ", frozen " +
                  std::to_string(rep.frozen_cycles) + " cycles, certificate " +
                  std::to_string(rep.certificate_checks - rep.certificate_violations) + "/" +
                  std::to_string(rep.certificate_checks)};
}

// True f at consecutive D5 jumps. The measured memory z carries the noise
// itself, so it is the anchor's true value that must not rise.
std::size_t robust_rises(double bound, std::uint64_t seed) {
  ExperimentConfig c = fig1_config();
  c.algorithm.lambda_s = 0.5;
  c.algorithm.phi_min = 0.5;
  c.initial.steps = {0.5, 0.5};
  c.initial.phi = 0.5;
  c.initial.z.reset();
  c.noise.kind = NoiseKind::bounded_random;
  c.noise.bound = bound;
  c.seed = seed;
  c.stop.max_jumps = 3000;
  const RunOutcome o = run_experiment(c);
  if (o.error) return 1'000'000;
  return d5_increase_count(o.arc);
}

Verdict robust_contrast() {
  const RhoValue b = robustness_bound(0.5, 0.5);
  std::size_t at_bound = 0, seeds_rising = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    at_bound += robust_rises(b.value, seed);
    seeds_rising += robust_rises(10.0 * b.value, seed) > 0 ? 1 : 0;
  }
  const bool ok = !b.underflow && at_bound == 0 && seeds_rising >= 1;
  return {ok, "bound " + fmt("%.9g", b.value) + ": rises " + std::to_string(at_bound) + " over 20 seeds; at 10x: " +
                  std::to_string(seeds_rising) + "/20 seeds rise"};
}

Verdict hybrid_semantics() {
  bool ok = true;
  std::string detail;
  for (const char* name : {"fig1_quadratic_pointmass.json", "fig2_rosenbrock_dubins.json"}) {
    const ExperimentConfig c = scenario(name);
    const RunOutcome o = run_experiment(c);
    const double disp = max_displacement_error(o.arc);
    const double timer = max_timer_error(o.arc, c.algorithm.tau_star);
    bool reset = true;
    for (const auto* s : o.arc.jump_samples()) reset = reset && s->xc.tau == 0.0;
    const GrammarResult g = check_grammar(o.arc.jumps);
    ok = ok && !o.error && disp <= 1e-6 && timer <= 1e-12 && reset && g.ok && g.completed > 0;
    detail += std::string(detail.empty() ? "" : "; ") + c.name + ": disp " + fmt("%.2g", disp) + ", timer " +
              fmt("%.2g", timer) + ", grammar " + (g.ok ? "ok" : "broken") + " (" + std::to_string(g.completed) +
              " line minimizations)";
  }
  return {ok, detail};
}

// Steps that grew stay <= lambda_t * phi, steps that shrank stay
// >= lambda_s * phi, and every step stays in the box.
bool clip_bounds_hold(const HybridArc& arc, const AlgorithmConfig& cfg) {
  for (std::size_t i = 1; i < arc.samples.size(); ++i) {
    const auto& before = arc.samples[i - 1].xc;
    const auto& after = arc.samples[i].xc;
    if (before.ds.directions != after.ds.directions) continue;  // shifted, compared by the box below
    for (std::size_t j = 0; j < after.ds.steps.size(); ++j) {
      const double s = after.ds.steps[j];
      if (s > before.ds.steps[j] && s > cfg.lambda_t * after.phi) return false;
      if (s < before.ds.steps[j] && s < cfg.lambda_s * after.phi) return false;
    }
  }
  for (const auto& s : arc.samples) {
    for (double d : s.xc.ds.steps) {
      if (d > cfg.lambda_t * s.xc.phi || d < cfg.lambda_s * s.xc.phi) return false;
    }
  }
  return true;
}

Verdict step_laws() {
  const AlgorithmConfig cfg;
  const auto f = make_constant(2, 1.0);
  NoiseModel noise;
  // Large start so rho stays representable for all six cycles.
  const double phi0 = 1e4;
  const ControllerState xc0 = initial_controller(uniform_direction_set(rotated_directions(2, 0.4), phi0), phi0, 1.0);
  PlantModel exact;
  exact.kind = PlantKind::exact;
  const HybridArc arc = run_closed_loop(exact, f, noise, PlantState{vec(0.5, 0.5), Vector()}, xc0, cfg, {72, 0});
  std::size_t cycles = 0;
  bool law = true;
  double expect = phi0;
  for (const auto* s : arc.jump_samples()) {
    if (s->jump == JumpCase::D5 && s->xc.k == 0) {
      expect *= cfg.mu;
      ++cycles;
      law = law && s->xc.phi == expect;
    }
  }
  bool clips = clip_bounds_hold(arc, cfg);
  for (const char* name : {"fig1_quadratic_pointmass.json", "fig2_rosenbrock_dubins.json"}) {
    const ExperimentConfig c = scenario(name);
    clips = clips && clip_bounds_hold(run_experiment(c).arc, c.algorithm);
  }
  return {law && cycles == 6 && clips, std::to_string(cycles) + " cycles, phi = mu^m phi0 " + (law ? "exact" : "off") +
                                           ", clip bounds " + (clips ? "hold" : "violated")};
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + HRSP_CLI + "\" " + args + " > /dev/null 2>&1";
  return std::system(cmd.c_str());
}

Verdict determinism() {
  const fs::path root = fs::path(HRSP_WORK_DIR) / "determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  ExperimentConfig noisy = fig1_config();
  noisy.name = "noisy";
  noisy.noise.kind = NoiseKind::bounded_random;
  noisy.noise.bound = 1e-3;
  noisy.stop.max_jumps = 500;
  {
    std::ofstream os(root / "noisy.json", std::ios::binary);
    os << emit_config(noisy);
  }
  const std::vector<std::pair<std::string, std::string>> runs = {
      {"fig1", std::string(HRSP_SCENARIO_DIR) + "/fig1_quadratic_pointmass.json"},
      {"fig2", std::string(HRSP_SCENARIO_DIR) + "/fig2_rosenbrock_dubins.json"},
      {"noisy", (root / "noisy.json").string() + " --seed 7"}};
  std::size_t same = 0, total = 0;
  bool ran = true;
  for (const auto& [tag, args] : runs) {
    for (const char* pass : {"a", "b"}) {
      ran = ran && run_cli("run " + args + " --out \"" + (root / (tag + pass)).string() + "\"") == 0;
    }
    for (const char* file : {"arc.csv", "config.json", "summary.json"}) {
      const fs::path a = root / (tag + "a") / file, b = root / (tag + "b") / file;
      ++total;
      if (fs::exists(a) && slurp(a) == slurp(b)) ++same;
    }
  }
  return {ran && same == total, std::to_string(same) + "/" + std::to_string(total) + " artifacts identical over " +
                                    std::to_string(runs.size()) + " configs run twice through the CLI"};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"fig1 quadratic on a point mass converges", fig1},
      {"fig2 Rosenbrock on a Dubins vehicle reaches (1,1)", fig2},
      {"rho monotone, continuous at e, o(D^5)", rho_suite},
      {"exact mode terminates on SPD quadratics with conjugate directions", quadratic_termination},
      {"discrete and hybrid runs visit identical points", equivalence},
      {"adversarial jam freezes the iterate with a per-trial certificate", jam},
      {"Phi floor tolerates noise at the bound, not at 10x", robust_contrast},
      {"per-period displacement, timer resets and jump grammar", hybrid_semantics},
      {"Phi contraction law and step clip bounds", step_laws},
      {"byte-identical artifacts for identical config and seed", determinism},
  };
  int failed = 0;
  int idx = 0;
  for (const auto& [name, check] : criteria) {
    ++idx;
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    std::printf("%s %2d %s: %s\n", v.pass ? "PASS" : "FAIL", idx, name, v.detail.c_str());
    if (!v.pass) ++failed;
  }
  std::printf("%d/%zu criteria passed\n", idx - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
