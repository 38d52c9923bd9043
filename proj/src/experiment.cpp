#include "hrsp/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "hrsp/jam_demo.hpp"

namespace hrsp {

using ojson = nlohmann::ordered_json;

namespace {

bool same_vector(const Vector& a, const Vector& b) { return a.size() == b.size() && a == b; }

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ojson to_json(const Vector& v) {
  ojson a = ojson::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

// Reads one JSON section, recording problems instead of throwing so a
// single parse reports all of them.
class Reader {
 public:
  Reader(const ojson& obj, std::string path, std::vector<std::string>& errors)
      : obj_(obj), path_(std::move(path)), errors_(errors) {
    if (!obj_.is_object()) {
      errors_.push_back(path_ + ": expected an object");
      ok_ = false;
    }
  }

  ~Reader() {
    if (!ok_) return;
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!seen_.count(it.key())) errors_.push_back(path_ + "." + it.key() + ": unknown key");
    }
  }

  const ojson* get(const std::string& key) {
    seen_.insert(key);
    if (!ok_ || !obj_.contains(key)) return nullptr;
    return &obj_.at(key);
  }

  void number(const std::string& key, double& out) {
    if (const ojson* v = get(key)) {
      if (v->is_number()) out = v->get<double>();
      else bad(key, "a number");
    }
  }

  template <class Int>
  void integer(const std::string& key, Int& out) {
    if (const ojson* v = get(key)) {
      if (v->is_number_unsigned()) out = v->get<Int>();
      else bad(key, "a non-negative integer");
    }
  }

  void string(const std::string& key, std::string& out) {
    if (const ojson* v = get(key)) {
      if (v->is_string()) out = v->get<std::string>();
      else bad(key, "a string");
    }
  }

  void vector(const std::string& key, Vector& out) {
    if (const ojson* v = get(key)) {
      if (!parse_vector(*v, out)) bad(key, "an array of numbers");
    }
  }

  void bad(const std::string& key, const std::string& expected) {
    errors_.push_back(path_ + "." + key + ": expected " + expected);
  }

  std::string path(const std::string& key) const { return path_ + "." + key; }

  static bool parse_vector(const ojson& v, Vector& out) {
    if (!v.is_array()) return false;
    Vector r(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) return false;
      r[static_cast<Eigen::Index>(i)] = v[i].get<double>();
    }
    out = std::move(r);
    return true;
  }

 private:
  const ojson& obj_;
  std::string path_;
  std::vector<std::string>& errors_;
  std::set<std::string> seen_;
  bool ok_ = true;
};

void read_objective(const ojson& j, ObjectiveSpec& o, std::vector<std::string>& errors) {
  Reader r(j, "objective", errors);
  r.string("name", o.name);
  r.integer("dimension", o.params.dimension);
  r.integer("seed", o.params.seed);
  r.number("value", o.params.value);
}

void read_plant(const ojson& j, PlantModel& p, std::vector<std::string>& errors) {
  Reader r(j, "plant", errors);
  std::string kind = to_string(p.kind);
  r.string("kind", kind);
  try {
    p.kind = plant_kind_from_string(kind);
  } catch (const ConfigError& e) {
    errors.push_back(std::string("plant.kind: ") + e.what());
  }
  r.number("speed_cap", p.speed_cap);
  r.number("turn_rate_max", p.turn_rate_max);
  r.integer("substeps", p.substeps);
}

void read_algorithm(const ojson& j, AlgorithmConfig& a, std::vector<std::string>& errors) {
  Reader r(j, "algorithm", errors);
  r.number("gamma", a.gamma);
  r.number("theta", a.theta);
  r.number("mu", a.mu);
  r.number("lambda_s", a.lambda_s);
  r.number("lambda_t", a.lambda_t);
  r.number("delta_det", a.delta_det);
  r.number("tau_star", a.tau_star);
  r.number("phi_min", a.phi_min);
}

void read_initial(const ojson& j, InitialState& s, std::vector<std::string>& errors) {
  Reader r(j, "initial", errors);
  r.vector("x", s.x);
  r.vector("zeta", s.zeta);
  if (const ojson* d = r.get("directions")) {
    s.directions.clear();
    bool ok = d->is_array();
    for (std::size_t i = 0; ok && i < d->size(); ++i) {
      Vector v;
      ok = Reader::parse_vector((*d)[i], v);
      s.directions.push_back(std::move(v));
    }
    if (!ok) r.bad("directions", "an array of number arrays");
  }
  if (const ojson* st = r.get("steps")) {
    s.steps.clear();
    bool ok = st->is_array();
    for (std::size_t i = 0; ok && i < st->size(); ++i) {
      ok = (*st)[i].is_number();
      if (ok) s.steps.push_back((*st)[i].get<double>());
    }
    if (!ok) r.bad("steps", "an array of numbers");
  }
  r.number("phi", s.phi);
  if (const ojson* z = r.get("z")) {
    if (z->is_null()) s.z.reset();
    else if (z->is_number()) s.z = z->get<double>();
    else r.bad("z", "a number or null");
  }
  r.integer("lead", s.lead);
  r.number("tau", s.tau);
}

void read_noise(const ojson& j, NoiseSpec& n, std::vector<std::string>& errors) {
  Reader r(j, "noise", errors);
  auto kind_of = [&](const std::string& name, const std::string& where) {
    try {
      return noise_kind_from_string(name);
    } catch (const ConfigError& e) {
      errors.push_back(where + ": " + e.what());
      return NoiseKind::zero;
    }
  };
  std::string kind = to_string(n.kind);
  r.string("kind", kind);
  n.kind = kind_of(kind, "noise.kind");
  r.number("bound", n.bound);
  if (const ojson* a = r.get("adversary")) {
    if (a->is_null()) {
      n.adversary.reset();
    } else {
      AdversaryBounds b;
      Reader ar(*a, "noise.adversary", errors);
      ar.number("gradient_bound", b.gradient_bound);
      ar.number("direction_bound", b.direction_bound);
      ar.number("value_scale", b.value_scale);
      n.adversary = b;
    }
  }
  if (const ojson* s = r.get("schedule")) {
    n.schedule.clear();
    if (!s->is_array()) {
      r.bad("schedule", "an array");
    } else {
      for (std::size_t i = 0; i < s->size(); ++i) {
        NoisePhase ph;
        const std::string where = "noise.schedule[" + std::to_string(i) + "]";
        Reader pr((*s)[i], where, errors);
        pr.integer("start", ph.start);
        std::string pk = to_string(ph.kind);
        pr.string("kind", pk);
        ph.kind = kind_of(pk, where + ".kind");
        n.schedule.push_back(ph);
      }
    }
  }
}

void read_stop(const ojson& j, HybridStop& s, std::vector<std::string>& errors) {
  Reader r(j, "stop", errors);
  r.integer("max_jumps", s.max_jumps);
  r.integer("flow_samples", s.flow_samples);
}

bool uses_adversary(const NoiseSpec& n) {
  auto adv = [](NoiseKind k) { return k == NoiseKind::adversarial_jam || k == NoiseKind::adversarial_drag; };
  if (adv(n.kind)) return true;
  return std::any_of(n.schedule.begin(), n.schedule.end(), [&](const NoisePhase& p) { return adv(p.kind); });
}

bool noisy(const NoiseSpec& n) {
  if (n.kind != NoiseKind::zero) return true;
  return std::any_of(n.schedule.begin(), n.schedule.end(),
                     [](const NoisePhase& p) { return p.kind != NoiseKind::zero; });
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("cannot write " + p.string());
  os << text;
  if (!os) throw Error("write failed for " + p.string());
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

bool InitialState::operator==(const InitialState& o) const {
  if (!same_vector(x, o.x) || !same_vector(zeta, o.zeta)) return false;
  if (directions.size() != o.directions.size()) return false;
  for (std::size_t i = 0; i < directions.size(); ++i) {
    if (!same_vector(directions[i], o.directions[i])) return false;
  }
  return steps == o.steps && phi == o.phi && z == o.z && lead == o.lead && tau == o.tau;
}

// ---------------------------------------------------------------------------
// Config I/O
// ---------------------------------------------------------------------------

ExperimentConfig parse_config(const std::string& json_text) {
  ojson j;
  try {
    j = ojson::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    const std::string msg = std::string("config is not valid JSON: ") + e.what();
    throw ConfigError(msg, {msg});
  }
  ExperimentConfig cfg;
  std::vector<std::string> errors;
  {
    Reader r(j, "config", errors);
    r.string("name", cfg.name);
    r.integer("seed", cfg.seed);
    r.string("output_dir", cfg.output_dir);
    if (const ojson* v = r.get("objective")) read_objective(*v, cfg.objective, errors);
    if (const ojson* v = r.get("plant")) read_plant(*v, cfg.plant, errors);
    if (const ojson* v = r.get("algorithm")) read_algorithm(*v, cfg.algorithm, errors);
    if (const ojson* v = r.get("initial")) read_initial(*v, cfg.initial, errors);
    if (const ojson* v = r.get("noise")) read_noise(*v, cfg.noise, errors);
    if (const ojson* v = r.get("stop")) read_stop(*v, cfg.stop, errors);
    if (const ojson* v = r.get("notes")) {
      if (v->is_array() && std::all_of(v->begin(), v->end(), [](const ojson& e) { return e.is_string(); })) {
        cfg.notes = v->get<std::vector<std::string>>();
      } else {
        r.bad("notes", "an array of strings");
      }
    }
  }
  cfg.noise.seed = cfg.seed;
  if (!errors.empty()) {
    std::string msg = "config has " + std::to_string(errors.size()) + " problem(s):";
    for (const auto& e : errors) msg += "\n  " + e;
    throw ConfigError(msg, errors);
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot read config file " + path.string(), {"cannot read " + path.string()});
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

std::string emit_config(const ExperimentConfig& cfg) {
  ojson j;
  j["name"] = cfg.name;
  j["seed"] = cfg.seed;
  j["objective"] = {{"name", cfg.objective.name},
                    {"dimension", cfg.objective.params.dimension},
                    {"seed", cfg.objective.params.seed},
                    {"value", cfg.objective.params.value}};
  j["plant"] = {{"kind", to_string(cfg.plant.kind)},
                {"speed_cap", cfg.plant.speed_cap},
                {"turn_rate_max", cfg.plant.turn_rate_max},
                {"substeps", cfg.plant.substeps}};
  const auto& a = cfg.algorithm;
  j["algorithm"] = {{"gamma", a.gamma},       {"theta", a.theta},         {"mu", a.mu},
                    {"lambda_s", a.lambda_s}, {"lambda_t", a.lambda_t},   {"delta_det", a.delta_det},
                    {"tau_star", a.tau_star}, {"phi_min", a.phi_min}};
  const auto& s = cfg.initial;
  ojson dirs = ojson::array();
  for (const auto& d : s.directions) dirs.push_back(to_json(d));
  ojson init;
  init["x"] = to_json(s.x);
  init["zeta"] = to_json(s.zeta);
  init["directions"] = dirs;
  init["steps"] = s.steps;
  init["phi"] = s.phi;
  init["z"] = s.z ? ojson(*s.z) : ojson(nullptr);
  init["lead"] = s.lead;
  init["tau"] = s.tau;
  j["initial"] = init;
  ojson noise;
  noise["kind"] = to_string(cfg.noise.kind);
  noise["bound"] = cfg.noise.bound;
  if (cfg.noise.adversary) {
    const auto& b = *cfg.noise.adversary;
    noise["adversary"] = {{"gradient_bound", b.gradient_bound},
                          {"direction_bound", b.direction_bound},
                          {"value_scale", b.value_scale}};
  } else {
    noise["adversary"] = nullptr;
  }
  noise["schedule"] = ojson::array();
  for (const auto& p : cfg.noise.schedule) noise["schedule"].push_back({{"start", p.start}, {"kind", to_string(p.kind)}});
  j["noise"] = noise;
  j["stop"] = {{"max_jumps", cfg.stop.max_jumps}, {"flow_samples", cfg.stop.flow_samples}};
  j["output_dir"] = cfg.output_dir;
  j["notes"] = cfg.notes;
  return j.dump(2) + "\n";
}

std::vector<std::string> validate_experiment(const ExperimentConfig& cfg) {
  std::vector<std::string> out;
  for (const auto& v : validate_config(cfg.algorithm)) out.push_back("algorithm: " + v.name + " (" + v.detail + ")");
  try {
    validate_plant(cfg.plant);
  } catch (const ConfigError& e) {
    out.push_back(std::string("plant: ") + e.what());
  }
  try {
    // Missing adversary bounds are estimated at run time.
    NoiseSpec check = cfg.noise;
    if (uses_adversary(check) && !check.adversary) check.adversary = AdversaryBounds{1.0, 1.0, 1.0};
    validate_noise(check);
  } catch (const ConfigError& e) {
    out.push_back(std::string("noise: ") + e.what());
  }

  std::optional<ObjectiveFunction> f;
  try {
    f = make_objective(cfg.objective.name, cfg.objective.params);
  } catch (const ConfigError& e) {
    out.push_back(std::string("objective: ") + e.what());
  }

  const auto& s = cfg.initial;
  const std::size_t n = static_cast<std::size_t>(s.x.size());
  if (n == 0) out.push_back("initial.x: must not be empty");
  if (f && n != f->dimension) {
    out.push_back("initial.x: dimension " + std::to_string(n) + " does not match objective dimension " +
                  std::to_string(f->dimension));
  }
  if (!s.x.allFinite()) out.push_back("initial.x: must be finite");
  if (static_cast<std::size_t>(s.zeta.size()) != auxiliary_dimension(cfg.plant.kind)) {
    out.push_back("initial.zeta: plant " + to_string(cfg.plant.kind) + " needs " +
                  std::to_string(auxiliary_dimension(cfg.plant.kind)) + " auxiliary state(s)");
  }
  if (cfg.plant.kind == PlantKind::dubins && n != 2) out.push_back("plant: dubins needs a 2-dimensional x");
  bool shape_ok = s.directions.size() == n && s.steps.size() == n;
  for (const auto& d : s.directions) shape_ok = shape_ok && static_cast<std::size_t>(d.size()) == n;
  if (!shape_ok) {
    out.push_back("initial.directions/steps: need " + std::to_string(n) + " directions of dimension " +
                  std::to_string(n) + " and " + std::to_string(n) + " steps");
  } else if (n > 0) {
    const double det = determinant_of_rows(s.directions);
    if (!(std::abs(det) >= cfg.algorithm.delta_det)) {
      out.push_back("initial.directions: |det| = " + num(std::abs(det)) + " is below delta_det");
    }
  }
  for (double st : s.steps) {
    if (!(st >= 0.0) || !std::isfinite(st)) {
      out.push_back("initial.steps: must be finite and >= 0");
      break;
    }
  }
  if (!(s.phi >= 0.0) || !std::isfinite(s.phi)) out.push_back("initial.phi: must be finite and >= 0");
  if (cfg.algorithm.robust() && s.phi < cfg.algorithm.phi_min) {
    out.push_back("initial.phi: below algorithm.phi_min");
  }
  if (n > 0 && s.lead >= n) out.push_back("initial.lead: must be < n");
  if (!(s.tau >= 0.0) || s.tau > cfg.algorithm.tau_star) out.push_back("initial.tau: must lie in [0, tau_star]");
  if (s.z && !std::isfinite(*s.z)) out.push_back("initial.z: must be finite");
  return out;
}

// ---------------------------------------------------------------------------
// Runs
// ---------------------------------------------------------------------------

RunOutcome run_experiment(const ExperimentConfig& cfg) {
  const auto problems = validate_experiment(cfg);
  if (!problems.empty()) {
    std::string msg = "invalid experiment config:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw ConfigError(msg, problems);
  }
  const auto t0 = std::chrono::steady_clock::now();
  const ObjectiveFunction f = make_objective(cfg.objective.name, cfg.objective.params);
  const auto& s = cfg.initial;

  RunOutcome out;
  out.summary.name = cfg.name;
  out.arc.n = static_cast<std::size_t>(s.x.size());
  try {
    NoiseSpec ns = cfg.noise;
    ns.seed = cfg.seed;
    if (uses_adversary(ns) && !ns.adversary) ns.adversary = estimate_adversary_bounds(f, s.x, s.directions);
    NoiseModel noise(ns, cfg.algorithm.theta);

    DirectionSet ds{s.directions, s.steps};
    ControllerState xc = initial_controller(ds, s.phi, s.z ? *s.z : f(s.x), s.lead);
    xc.tau = s.tau;
    ClosedLoop loop(cfg.plant, f, noise, PlantState{s.x, s.zeta}, xc, cfg.algorithm, cfg.stop.flow_samples);
    try {
      while (loop.jumps() < cfg.stop.max_jumps) loop.step();
    } catch (const std::exception& e) {
      out.error = e.what();
    }
    out.arc = loop.take_arc();
  } catch (const std::exception& e) {
    out.error = e.what();
  }

  auto& sum = out.summary;
  sum.status = out.error ? "error" : "ok";
  sum.jumps = out.arc.jumps.size();
  if (!out.arc.samples.empty()) {
    const auto& last = out.arc.samples.back();
    sum.final_x = last.xi.x;
    sum.final_f = last.f;
    sum.final_phi = last.xc.phi;
  } else {
    sum.final_x = s.x;
    sum.final_f = f(s.x);
    sum.final_phi = s.phi;
  }
  sum.distance_to_minimizer = f.distance_to_minimizer(sum.final_x);
  sum.z_violations = z_increase_count(out.arc);
  const GrammarResult g = check_grammar(out.arc.jumps);
  sum.grammar_ok = g.ok;
  sum.line_minimizations = g.completed;
  sum.max_displacement_error = max_displacement_error(out.arc);
  sum.max_timer_error = max_timer_error(out.arc, cfg.algorithm.tau_star);
  sum.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

std::string summary_json(const RunSummary& s) {
  ojson j;
  j["name"] = s.name;
  j["status"] = s.status;
  j["jumps"] = s.jumps;
  j["final_x"] = to_json(s.final_x);
  j["final_f"] = s.final_f;
  j["final_phi"] = s.final_phi;
  j["distance_to_minimizer"] = s.distance_to_minimizer ? ojson(*s.distance_to_minimizer) : ojson(nullptr);
  j["z_violations"] = s.z_violations;
  j["line_minimizations"] = s.line_minimizations;
  j["grammar_ok"] = s.grammar_ok;
  j["max_displacement_error"] = s.max_displacement_error;
  j["max_timer_error"] = s.max_timer_error;
  return j.dump(2) + "\n";
}

RunOutcome run_to_directory(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
  RunOutcome out = run_experiment(cfg);
  std::filesystem::create_directories(out_dir);
  write_file(out_dir / "config.json", emit_config(cfg));
  std::ostringstream arc;
  write_arc_csv(arc, out.arc, noisy(cfg.noise));
  write_file(out_dir / "arc.csv", arc.str());
  write_file(out_dir / "summary.json", summary_json(out.summary));
  write_file(out_dir / "timing.json", ojson{{"wall_seconds", out.summary.wall_seconds}}.dump(2) + "\n");
  const auto err_path = out_dir / "error.json";
  if (out.error) {
    write_file(err_path, ojson{{"error", *out.error}, {"jumps_completed", out.summary.jumps}}.dump(2) + "\n");
  } else {
    std::filesystem::remove(err_path);
  }
  return out;
}

namespace {

ExperimentConfig reference_config() {
  ExperimentConfig c;
  c.objective.params.dimension = 2;
  c.initial.x = Vector(2);
  c.initial.x << 1.5, 0.0;
  c.initial.directions = rotated_directions(2, std::numbers::pi / 8.0);
  c.initial.steps = {0.01, 0.01};
  c.initial.phi = 0.01;
  c.initial.z = 0.0;
  c.initial.lead = 0;
  c.initial.tau = 0.0;
  c.algorithm = AlgorithmConfig{};
  c.notes = {"artifact choice: tau_star = 0.1 s"};
  return c;
}

}  // namespace

ExperimentConfig fig1_config() {
  ExperimentConfig c = reference_config();
  c.name = "fig1_quadratic_pointmass";
  c.objective.name = "quadratic";
  c.plant.kind = PlantKind::point_mass;
  c.stop.max_jumps = 2000;
  return c;
}

ExperimentConfig fig2_config() {
  ExperimentConfig c = reference_config();
  c.name = "fig2_rosenbrock_dubins";
  c.objective.name = "rosenbrock";
  c.plant.kind = PlantKind::dubins;
  c.initial.zeta = Vector::Zero(1);
  c.stop.max_jumps = 10000;
  c.notes.push_back(
      "artifact choice: speed_cap = 10, turn_rate_max = 40 rad/s, zeta(0) = 0");
  return c;
}

// ---------------------------------------------------------------------------
// Bench
// ---------------------------------------------------------------------------

std::vector<std::string> bench_suites() { return {"convergence", "robustness", "adversarial"}; }

namespace {

struct Draw {
  Vector x;
  double angle = 0.0;
};

// Start point with radius in [r_lo, r_hi] and a direction-frame angle, both from `seed`.
Draw draw_start(std::size_t n, std::uint64_t seed, double r_lo, double r_hi) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  Vector x(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = normal(gen);
  x *= (r_lo + (r_hi - r_lo) * uni(gen)) / x.norm();
  return {x, std::numbers::pi / 2.0 * uni(gen)};
}

std::optional<std::size_t> first_within(const HybridArc& arc, const ObjectiveFunction& f, double tol) {
  for (const auto* s : arc.jump_samples()) {
    const auto d = f.distance_to_minimizer(s->xi.x);
    if (d && *d <= tol) return s->j;
  }
  return std::nullopt;
}

BenchResult bench_convergence(std::size_t seeds) {
  BenchResult r;
  const double tol = 1e-2;
  for (std::size_t n : {1, 2, 3, 5}) {
    for (std::uint64_t seed = 0; seed < seeds; ++seed) {
      const Draw d = draw_start(n, seed, 1.0, 2.0);
      ExperimentConfig c;
      c.objective = {"sphere", {n, 0, 0.0}};
      c.plant.kind = PlantKind::point_mass;
      c.initial.x = d.x;
      c.initial.directions = rotated_directions(n, d.angle);
      c.initial.steps.assign(n, 0.1);
      c.initial.phi = 0.1;
      c.stop.max_jumps = 20000;
      c.seed = seed;
      const RunOutcome o = run_experiment(c);
      const ObjectiveFunction f = make_sphere(n);
      BenchRow row;
      row.group = "n=" + std::to_string(n);
      row.seed = seed;
      row.jumps = o.summary.jumps;
      row.jumps_to_tolerance = first_within(o.arc, f, tol);
      row.final_error = o.summary.distance_to_minimizer.value_or(NAN);
      row.violations = o.summary.z_violations;
      row.ok = !o.error && row.jumps_to_tolerance.has_value();
      r.rows.push_back(row);
    }
  }
  return r;
}

BenchResult bench_robustness(std::size_t seeds) {
  BenchResult r;
  const double lambda_s = 0.5;
  for (double floor : {0.05, 0.1, 0.2}) {
    const double bound = robustness_bound(lambda_s, floor).value;
    for (std::uint64_t seed = 0; seed < seeds; ++seed) {
      const Draw d = draw_start(2, seed, 1.0, 2.0);
      ExperimentConfig c;
      c.objective = {"quadratic", {2, 0, 0.0}};
      c.plant.kind = PlantKind::point_mass;
      c.algorithm.lambda_s = lambda_s;
      c.algorithm.phi_min = floor;
      c.initial.x = d.x;
      c.initial.directions = rotated_directions(2, d.angle);
      c.initial.steps.assign(2, 0.5);
      c.initial.phi = 0.5;
      c.noise.kind = NoiseKind::bounded_random;
      c.noise.bound = bound;
      c.seed = seed;
      c.stop.max_jumps = 3000;
      const RunOutcome o = run_experiment(c);
      BenchRow row;
      char label[32];
      std::snprintf(label, sizeof label, "phi_floor=%g", floor);
      row.group = label;
      row.seed = seed;
      row.jumps = o.summary.jumps;
      row.final_error = o.summary.distance_to_minimizer.value_or(NAN);
      row.violations = d5_increase_count(o.arc);
      row.ok = !o.error && row.violations == 0;
      r.rows.push_back(row);
    }
  }
  return r;
}

BenchResult bench_adversarial(std::size_t seeds) {
  BenchResult r;
  const ObjectiveFunction f = make_sphere(2);
  for (std::uint64_t seed = 0; seed < seeds; ++seed) {
    const Draw d = draw_start(2, seed, 0.5, 1.5);
    const AlgorithmConfig cfg;
    const JamReport rep = jam_demo(f, d.x, uniform_direction_set(rotated_directions(2, d.angle), 0.01), 0.01, cfg, {});
    BenchRow row;
    row.group = "jam";
    row.seed = seed;
    row.jumps = rep.run.evaluations;
    row.jumps_to_tolerance = rep.activation_measurement;
    row.final_error = f.distance_to_minimizer(rep.run.state.x).value_or(NAN);
    row.violations = rep.certificate_violations;
    row.ok = rep.activated && rep.frozen && rep.frozen_cycles >= 500 && rep.certificate_violations == 0;
    r.rows.push_back(row);
  }
  return r;
}

}  // namespace

BenchResult run_bench(const std::string& suite, std::size_t seeds) {
  BenchResult r;
  if (suite == "convergence") r = bench_convergence(seeds);
  else if (suite == "robustness") r = bench_robustness(seeds);
  else if (suite == "adversarial") r = bench_adversarial(seeds);
  else {
    std::string list;
    for (const auto& s : bench_suites()) list += (list.empty() ? "" : ", ") + s;
    throw ConfigError("unknown bench suite '" + suite + "'; available: " + list, bench_suites());
  }
  r.suite = suite;

  std::vector<std::string> order;
  std::map<std::string, std::vector<const BenchRow*>> groups;
  for (const auto& row : r.rows) {
    if (!groups.count(row.group)) order.push_back(row.group);
    groups[row.group].push_back(&row);
  }
  for (const auto& g : order) {
    BenchAggregate a;
    a.group = g;
    std::vector<double> reached, errors;
    for (const auto* row : groups[g]) {
      ++a.runs;
      if (row->ok) ++a.successes;
      if (row->jumps_to_tolerance) reached.push_back(static_cast<double>(*row->jumps_to_tolerance));
      errors.push_back(row->final_error);
      a.violations += row->violations;
    }
    if (!reached.empty()) a.median_jumps_to_tolerance = median(reached);
    a.median_final_error = median(errors);
    r.aggregates.push_back(a);
  }
  return r;
}

void write_bench_csv(std::ostream& os, const BenchResult& r) {
  os << "suite,group,seed,jumps,jumps_to_tolerance,final_error,violations,ok\n";
  for (const auto& row : r.rows) {
    os << r.suite << ',' << row.group << ',' << row.seed << ',' << row.jumps << ','
       << (row.jumps_to_tolerance ? std::to_string(*row.jumps_to_tolerance) : "") << ',' << num(row.final_error)
       << ',' << row.violations << ',' << (row.ok ? 1 : 0) << '\n';
  }
}

void write_bench_aggregate_csv(std::ostream& os, const BenchResult& r) {
  os << "suite,group,runs,successes,median_jumps_to_tolerance,median_final_error,violations\n";
  for (const auto& a : r.aggregates) {
    os << r.suite << ',' << a.group << ',' << a.runs << ',' << a.successes << ','
       << (a.median_jumps_to_tolerance ? num(*a.median_jumps_to_tolerance) : "") << ','
       << num(a.median_final_error) << ',' << a.violations << '\n';
  }
}

void print_bench_table(std::ostream& os, const BenchResult& r) {
  char line[160];
  os << "suite " << r.suite << '\n';
  std::snprintf(line, sizeof line, "%-16s %5s %9s %14s %14s %10s\n", "group", "runs", "successes", "median_jumps",
                "median_error", "violations");
  os << line;
  for (const auto& a : r.aggregates) {
    const std::string mj = a.median_jumps_to_tolerance ? num(*a.median_jumps_to_tolerance) : "-";
    std::snprintf(line, sizeof line, "%-16s %5zu %9zu %14s %14.6g %10zu\n", a.group.c_str(), a.runs, a.successes,
                  mj.c_str(), a.median_final_error, a.violations);
    os << line;
  }
}

// ---------------------------------------------------------------------------
// rho table
// ---------------------------------------------------------------------------

std::vector<RhoRow> rho_table(double lo, double hi, std::size_t points) {
  if (!(lo >= 0.0) || !(hi > lo) || !std::isfinite(hi)) {
    throw DomainError("rho table needs 0 <= min < max, got min = " + num(lo) + ", max = " + num(hi));
  }
  if (points < 2) throw DomainError("rho table needs at least 2 points");
  std::vector<RhoRow> rows;
  std::size_t logspaced = points;
  double a = lo;
  if (lo == 0.0) {
    rows.push_back({0.0, 0.0, -INFINITY, "limit"});
    logspaced = points - 1;
    a = hi * 1e-6;
  }
  const double la = std::log(a), lb = std::log(hi);
  for (std::size_t i = 0; i < logspaced; ++i) {
    double d = hi;
    if (logspaced == 1) d = hi;
    else if (i == 0) d = a;
    else if (i + 1 < logspaced) d = std::exp(la + (lb - la) * static_cast<double>(i) / static_cast<double>(logspaced - 1));
    const RhoValue v = rho_checked(d);
    rows.push_back({d, v.value, log_rho(d), v.underflow ? "underflow" : ""});
  }
  return rows;
}

void write_rho_csv(std::ostream& os, const std::vector<RhoRow>& rows) {
  os << "delta,rho,log_rho,flag\n";
  for (const auto& r : rows) os << num(r.delta) << ',' << num(r.value) << ',' << num(r.log_value) << ',' << r.flag << '\n';
}

}  // namespace hrsp
