#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "hrsp/hybrid.hpp"

using namespace hrsp;

namespace {

constexpr double kPi = std::numbers::pi;

Vector vec(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

ControllerState reference_controller(double z = 0.0) {
  return initial_controller(uniform_direction_set(rotated_directions(2, kPi / 8.0), 0.01), 0.01, z);
}

ControllerState probe_state(double z, double delta, int p, int q, int m) {
  ControllerState xc = reference_controller(z);
  xc.delta = delta;
  xc.p = p;
  xc.q = q;
  xc.m = m;
  return xc;
}

PlantModel plant_of(PlantKind k) {
  PlantModel p;
  p.kind = k;
  return p;
}

HybridArc run_reference(const std::string& objective, PlantKind kind, std::size_t jumps,
                    const AlgorithmConfig& cfg = {}) {
  const auto f = make_objective(objective, {});
  NoiseModel noise;
  const PlantState xi{vec(1.5, 0.0), kind == PlantKind::dubins ? Vector(Vector::Zero(1)) : Vector()};
  return run_closed_loop(plant_of(kind), f, noise, xi, reference_controller(), cfg, {jumps, 0});
}

EquivalenceResult compare_with_rsp(const std::string& objective, std::size_t jumps, const AlgorithmConfig& hcfg,
                                   const AlgorithmConfig& rcfg) {
  const auto f = make_objective(objective, {});
  const HybridArc arc = run_reference(objective, PlantKind::exact, jumps, hcfg);
  StopRule stop;
  stop.max_cycles = 1'000'000;
  stop.max_evaluations = jumps + 1;
  const RspRun r = run(f, rsp_state_from_controller(vec(1.5, 0.0), reference_controller()), rcfg, stop);
  return equivalence_check(arc, r.log);
}

// First jump that expands a step: an accepted trial in either direction.
std::size_t first_expansion(const HybridArc& arc) {
  for (const auto& l : arc.jumps) {
    if (l.kind == JumpCase::D1 || l.kind == JumpCase::D4) return l.j;
  }
  return 0;
}

std::vector<JumpLabel> labels(std::initializer_list<JumpCase> cases) {
  std::vector<JumpLabel> out;
  std::size_t j = 0;
  for (JumpCase c : cases) {
    JumpLabel l;
    l.kind = c;
    l.j = ++j;
    out.push_back(l);
  }
  return out;
}

}  // namespace

TEST_CASE("classify_jump examples") {
  CHECK(classify_jump(probe_state(1.0, 0.5, 1, 0, 0), 0.7) == JumpCase::D1);
  CHECK(classify_jump(probe_state(1.0, 0.5, 1, 0, 0), 0.9) == JumpCase::D2);
  CHECK(classify_jump(probe_state(1.0, 0.5, -1, 1, 0), 0.7) == JumpCase::D4);
  CHECK(classify_jump(probe_state(1.0, 0.5, -1, 1, 0), 0.9) == JumpCase::D2);
  CHECK(classify_jump(probe_state(1.0, 0.5, -1, 1, 1), 123.0) == JumpCase::D3);
  for (int p : {-1, 1}) {
    for (int m : {0, 1}) {
      CHECK(classify_jump(probe_state(1.0, 0.5, p, 2, m), 5.0) == JumpCase::D5);
    }
  }
}

TEST_CASE("sufficient-decrease ties accept") {
  const double y = 1.0 - rho(0.5);
  CHECK(classify_jump(probe_state(1.0, 0.5, 1, 0, 0), y) == JumpCase::D1);
  CHECK(classify_jump(probe_state(1.0, 0.5, -1, 1, 0), y) == JumpCase::D4);
}

TEST_CASE("unreachable states raise AutomatonError") {
  CHECK_THROWS_AS(classify_jump(probe_state(1.0, 0.5, 1, 0, 1), 0.0), AutomatonError);
  CHECK_THROWS_AS(classify_jump(probe_state(1.0, 0.5, -1, 0, 1), 0.0), AutomatonError);
  CHECK_THROWS_AS(classify_jump(probe_state(1.0, 0.5, 1, 0, 0), std::nan("")), AutomatonError);
}

TEST_CASE("every reachable flag combination is classified") {
  // Reachable: (p, q, m) = (1, 0, 0), (1, 1, 0), (-1, 1, 1), (-1, 1, 0), (*, 2, *).
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const int reachable[][3] = {{1, 0, 0}, {1, 1, 0}, {-1, 1, 1}, {-1, 1, 0}, {1, 2, 0}, {-1, 2, 1}};
  for (const auto& r : reachable) {
    for (int i = 0; i < 200; ++i) {
      REQUIRE_NOTHROW(classify_jump(probe_state(u(gen), std::abs(u(gen)), r[0], r[1], r[2]), u(gen)));
    }
  }
}

TEST_CASE("g2 flips the sign and raises the overshoot flag") {
  AlgorithmConfig cfg;
  const auto out = apply_jump(probe_state(1.0, 0.5, 1, 0, 0), JumpCase::D2, 0.9, cfg);
  CHECK(out.p == -1);
  CHECK(out.m == 1);
  CHECK(out.q == 1);
  CHECK(out.z == 1.0);
  CHECK(out.tau == 0.0);
}

TEST_CASE("g1 expands the explored step") {
  AlgorithmConfig cfg;
  cfg.gamma = 1.2;
  cfg.lambda_t = 5.0;
  std::vector<Vector> dirs(3, Vector::Zero(3));
  for (int i = 0; i < 3; ++i) dirs[static_cast<std::size_t>(i)][i] = 1.0;
  ControllerState xc = initial_controller(DirectionSet{dirs, {0.3, 0.1, 0.3}}, 1.0, 2.0);
  xc.k = 2;
  xc.v = dirs[1];
  xc.delta = 0.1;
  const auto out = apply_jump(xc, JumpCase::D1, 1.5, cfg);
  CHECK(out.ds.steps[1] == doctest::Approx(0.12));
  CHECK(out.delta == doctest::Approx(0.12));
  CHECK(out.ds.steps[0] == 0.3);
  CHECK(out.lambda == doctest::Approx(0.1));
  CHECK(out.z == 1.5);
  CHECK(out.q == 1);
  // Clipped at lambda_t * phi.
  xc.phi = 0.021;
  CHECK(apply_jump(xc, JumpCase::D1, 1.5, cfg).ds.steps[1] == doctest::Approx(0.105));
}

TEST_CASE("g3 restarts the memory") {
  AlgorithmConfig cfg;
  ControllerState xc = probe_state(1.0, 0.5, -1, 1, 1);
  xc.lambda = 0.7;
  const auto out = apply_jump(xc, JumpCase::D3, 0.8, cfg);
  CHECK(out.z == 0.8);
  CHECK(out.m == 0);
  CHECK(out.lambda == 0.0);
  CHECK(out.p == -1);
}

TEST_CASE("g5 on a blocked closing slot contracts phi") {
  AlgorithmConfig cfg;
  ControllerState xc = reference_controller(1.0);
  xc.k = 2;
  xc.q = 2;
  xc.v = xc.ds.directions[1];
  const auto out = apply_jump(xc, JumpCase::D5, 1.0, cfg);
  CHECK(out.phi == doctest::Approx(0.0015));
  CHECK(out.k == 0);
  CHECK(out.q == 0);
  CHECK(out.p == 1);
  for (double s : out.ds.steps) {
    CHECK(s >= cfg.lambda_s * out.phi);
    CHECK(s <= cfg.lambda_t * out.phi);
  }

  AlgorithmConfig robust = cfg;
  robust.phi_min = 0.002;
  CHECK(apply_jump(xc, JumpCase::D5, 1.0, robust).phi == doctest::Approx(0.002));
}

TEST_CASE("g5 advances k through 0..n") {
  AlgorithmConfig cfg;
  ControllerState xc = reference_controller(1.0);
  const std::size_t n = xc.ds.size();
  for (std::size_t step = 0; step < 2 * (n + 1); ++step) {
    const std::size_t k = xc.k;
    xc.q = 2;
    xc = apply_jump(xc, JumpCase::D5, 1.0, cfg);
    REQUIRE(xc.k == (k + 1) % (n + 1));
    REQUIRE(xc.v == xc.ds.directions[explored_index(xc.k, n)]);
    REQUIRE(xc.delta == xc.ds.steps[explored_index(xc.k, n)]);
  }
  CHECK(explored_index(0, 3) == 2);
  CHECK(explored_index(1, 3) == 0);
  CHECK(explored_index(3, 3) == 2);
}

TEST_CASE("phi_update examples") {
  const Vector d0 = vec(0, 1);
  CHECK(phi_update(vec(0, 1), vec(0, 0), {vec(1, 0)}, d0, 0.001) == vec(0, 1));
  CHECK(phi_update(vec(1, 0), vec(1, 0), {vec(1, 0)}, d0, 0.001) == d0);
  CHECK(phi_update(vec(1e-4, 0.5), vec(0, 0.5), {vec(1, 0)}, vec(5, 5), 0.001) == vec(1e-4, 1));
  // Equality passes.
  CHECK(phi_update(vec(0, 0.001), vec(0, 0), {vec(1, 0)}, d0, 0.001) == vec(0, 0.001));
}

TEST_CASE("flow advances only the timer") {
  const ControllerState xc = reference_controller(0.3);
  const auto half = flow(xc, 0.05, 0.1);
  CHECK(half.tau == doctest::Approx(0.05));
  ControllerState expect = xc;
  expect.tau = half.tau;
  CHECK(half == expect);
  ControllerState due = xc;
  due.tau = 0.1;
  CHECK(flow(due, 0.0, 0.1) == due);
  CHECK_THROWS_AS(flow(xc, 0.2, 0.1), SchedulingError);
  CHECK_THROWS_AS(flow(xc, -0.01, 0.1), SchedulingError);
}

TEST_CASE("jumps before the timer expires are rejected") {
  AlgorithmConfig cfg;
  ControllerState xc = reference_controller(1.0);
  xc.tau = 0.05;
  CHECK_THROWS_AS(jump(xc, 0.5, cfg), SchedulingError);
  xc.tau = cfg.tau_star;
  JumpCase c = JumpCase::D5;
  const auto out = jump(xc, 0.5, cfg, &c);
  CHECK(c == JumpCase::D1);
  CHECK(out.tau == 0.0);
}

TEST_CASE("check_controller rejects malformed states") {
  ControllerState xc = reference_controller();
  CHECK_NOTHROW(check_controller(xc, 0.1));
  ControllerState bad = xc;
  bad.p = 0;
  bad.q = 3;
  bad.tau = 0.5;
  try {
    check_controller(bad, 0.1);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.details().size() == 3);
  }
  ControllerState shape = xc;
  shape.alpha = Vector::Zero(3);
  CHECK_THROWS_AS(check_controller(shape, 0.1), ShapeError);
}

TEST_CASE("hybrid and rsp visit the same points on the quadratic") {
  AlgorithmConfig cfg;
  const auto r = compare_with_rsp("quadratic", 500, cfg, cfg);
  CHECK(r.ok);
  CHECK(r.compared >= 200);
  CHECK(r.max_deviation <= 1e-9);
}

TEST_CASE("hybrid and rsp visit the same points on Rosenbrock") {
  AlgorithmConfig cfg;
  const auto r = compare_with_rsp("rosenbrock", 500, cfg, cfg);
  CHECK(r.ok);
  CHECK(r.compared >= 200);
  CHECK(r.max_deviation <= 1e-9);
}

TEST_CASE("a perturbed expansion factor diverges at the first expansion") {
  AlgorithmConfig cfg;
  AlgorithmConfig mutated = cfg;
  mutated.gamma = 1.3;
  const auto r = compare_with_rsp("quadratic", 300, cfg, mutated);
  CHECK_FALSE(r.ok);
  REQUIRE(r.first_divergence.has_value());
  const HybridArc arc = run_reference("quadratic", PlantKind::exact, 300, cfg);
  CHECK(*r.first_divergence == first_expansion(arc) + 1);
}

TEST_CASE("constant objective: both stall and phi contracts by mu per cycle") {
  AlgorithmConfig cfg;
  const auto f = make_constant(2, 1.0);
  NoiseModel noise;
  const ControllerState xc0 = initial_controller(uniform_direction_set(rotated_directions(2, 0.4), 1e4), 1e4, 1.0);
  const PlantState xi{vec(0.5, 0.5), Vector()};
  // Six cycles of n + 1 = 3 line minimizations of 4 jumps (D2 D3 D2 D5).
  // Past that the steps are small enough for rho to underflow, and ties accept.
  const HybridArc arc = run_closed_loop(plant_of(PlantKind::exact), f, noise, xi, xc0, cfg, {72, 0});
  StopRule stop;
  stop.max_cycles = 1'000'000;
  stop.max_evaluations = 73;
  const RspRun r = run(f, rsp_state_from_controller(xi.x, xc0), cfg, stop);
  const auto eq = equivalence_check(arc, r.log);
  CHECK(eq.ok);
  CHECK(eq.compared == 72);
  double expect = 1e4;
  std::size_t cycles = 0;
  for (const auto* s : arc.jump_samples()) {
    if (s->jump == JumpCase::D5 && s->xc.k == 0) {
      expect *= cfg.mu;
      ++cycles;
      REQUIRE(s->xc.phi == expect);
    }
    // The anchor never moves; trials go out and come back.
    if (s->jump == JumpCase::D5) REQUIRE((s->xi.x - xi.x).norm() <= 1e-9);
  }
  CHECK(cycles == 6);
}

TEST_CASE("the reference quadratic on a point mass converges") {
  const HybridArc arc = run_reference("quadratic", PlantKind::point_mass, 2000);
  const auto& last = arc.samples.back();
  CHECK(last.xi.x.norm() <= 0.05);
  CHECK(last.f <= 5e-3);
  CHECK(arc.jumps.size() == 2000);
  CHECK(d5_increase_count(arc) == 0);
}

TEST_CASE("Rosenbrock on a Dubins vehicle approaches (1, 1)") {
  const HybridArc arc = run_reference("rosenbrock", PlantKind::dubins, 3000);
  CHECK((arc.samples.back().xi.x - vec(1, 1)).norm() <= 0.3);
}

TEST_CASE("arc structure: timer, displacement, grammar, time") {
  AlgorithmConfig cfg;
  for (PlantKind k : {PlantKind::point_mass, PlantKind::dubins}) {
    const HybridArc arc = run_reference(k == PlantKind::dubins ? "rosenbrock" : "quadratic", k, 1500);
    CHECK(max_timer_error(arc, cfg.tau_star) <= 1e-12);
    CHECK(max_displacement_error(arc) <= 1e-6);
    const auto g = check_grammar(arc.jumps);
    CHECK(g.ok);
    CHECK(g.completed > 0);
    for (std::size_t i = 1; i < arc.samples.size(); ++i) {
      REQUIRE(arc.samples[i].t >= arc.samples[i - 1].t);
    }
    for (std::size_t i = 0; i < arc.jumps.size(); ++i) {
      REQUIRE(arc.jumps[i].j == i + 1);
      REQUIRE(arc.jumps[i].t == doctest::Approx(cfg.tau_star * static_cast<double>(i + 1)));
    }
  }
}

TEST_CASE("check_grammar") {
  using enum JumpCase;
  CHECK(check_grammar(labels({D1, D1, D2, D5, D2, D3, D4, D4, D2, D5, D2, D3, D2, D5})).ok);
  CHECK(check_grammar(labels({D1, D1, D2, D5, D2, D3, D4, D4, D2, D5, D2, D3, D2, D5})).completed == 3);
  const auto bad = check_grammar(labels({D1, D5}));
  CHECK_FALSE(bad.ok);
  CHECK(bad.first_violation == std::optional<std::size_t>(1));
  CHECK_FALSE(check_grammar(labels({D2, D4, D2, D5})).ok);
  CHECK_FALSE(check_grammar(labels({D3})).ok);
  // An unfinished line minimization at the end is fine.
  CHECK(check_grammar(labels({D1, D2, D5, D1, D1})).ok);
}

TEST_CASE("flow samples lie strictly inside the period") {
  const auto f = make_objective("quadratic", {});
  NoiseModel noise;
  const PlantState xi{vec(1.5, 0.0), Vector()};
  const HybridArc arc =
      run_closed_loop(plant_of(PlantKind::point_mass), f, noise, xi, reference_controller(), AlgorithmConfig{}, {20, 3});
  CHECK(arc.samples.size() == 1 + 20 * 4);
  CHECK(arc.jump_samples().size() == 20);
  for (const auto& s : arc.samples) {
    if (!s.jump && s.t > 0.0) {
      REQUIRE(s.xc.tau > 0.0);
      REQUIRE(s.xc.tau < 0.1);
    }
  }
}

TEST_CASE("z is nonincreasing after warm-up over seeded initializations") {
  AlgorithmConfig cfg;
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> u(-2.0, 2.0), ang(0.0, kPi), step(0.005, 0.2);
  std::size_t runs = 0;
  for (const char* name : {"sphere", "quadratic", "rosenbrock"}) {
    const auto f = make_objective(name, {2});
    for (int seed = 0; seed < 100; ++seed) {
      const double s = step(gen);
      const ControllerState xc = initial_controller(uniform_direction_set(rotated_directions(2, ang(gen)), s), s,
                                                    u(gen) > 0.0 ? 0.0 : 10.0);
      const PlantState xi{vec(u(gen), u(gen)), Vector()};
      NoiseModel noise;
      const HybridArc arc = run_closed_loop(plant_of(PlantKind::point_mass), f, noise, xi, xc, cfg, {300, 0});
      REQUIRE(z_increase_count(arc, 3) == 0);
      ++runs;
    }
  }
  CHECK(runs == 300);
}

TEST_CASE("phi is nonincreasing, and floored in robust mode") {
  for (double floor : {0.0, 0.004}) {
    AlgorithmConfig cfg;
    cfg.phi_min = floor;
    const HybridArc arc = run_reference("quadratic", PlantKind::point_mass, 2000, cfg);
    double prev = arc.samples.front().xc.phi;
    for (const auto& s : arc.samples) {
      REQUIRE(s.xc.phi <= prev);
      REQUIRE(s.xc.phi >= floor);
      prev = s.xc.phi;
    }
    if (floor > 0.0) CHECK(prev == floor);
  }
}

TEST_CASE("direction matrix keeps |det| >= delta_det") {
  AlgorithmConfig cfg;
  for (const char* name : {"quadratic", "rosenbrock"}) {
    const HybridArc arc = run_reference(name, PlantKind::exact, 3000, cfg);
    std::size_t replaced = 0;
    for (std::size_t i = 1; i < arc.samples.size(); ++i) {
      REQUIRE(std::abs(direction_determinant(arc.samples[i].xc.ds)) >= cfg.delta_det);
      if (arc.samples[i].xc.ds.directions != arc.samples[i - 1].xc.ds.directions) ++replaced;
    }
    CHECK(replaced > 0);
  }
}

TEST_CASE("zero phi and zero directions stall the plant") {
  AlgorithmConfig cfg;
  const auto f = make_objective("quadratic", {});
  NoiseModel noise;
  const ControllerState xc = initial_controller(DirectionSet{{vec(0, 0), vec(0, 0)}, {0.0, 0.0}}, 0.0, 0.0);
  const PlantState xi{vec(1.5, 0.0), Vector()};
  const HybridArc arc = run_closed_loop(plant_of(PlantKind::point_mass), f, noise, xi, xc, cfg, {200, 0});
  for (const auto& s : arc.samples) REQUIRE(s.xi.x == xi.x);
}

TEST_CASE("noise is added to the jump measurement only") {
  AlgorithmConfig cfg;
  const auto f = make_objective("quadratic", {});
  NoiseSpec spec;
  spec.kind = NoiseKind::bounded_random;
  spec.bound = 1e-3;
  spec.seed = 3;
  NoiseModel noise(spec, cfg.theta);
  const PlantState xi{vec(1.5, 0.0), Vector()};
  const HybridArc arc =
      run_closed_loop(plant_of(PlantKind::point_mass), f, noise, xi, reference_controller(), cfg, {100, 0});
  bool nonzero = false;
  for (const auto* s : arc.jump_samples()) {
    REQUIRE(s->measured == s->f + s->noise);
    REQUIRE(std::abs(s->noise) <= 1e-3);
    nonzero = nonzero || s->noise != 0.0;
  }
  CHECK(nonzero);
}

TEST_CASE("arc CSV layout") {
  const HybridArc arc = run_reference("quadratic", PlantKind::point_mass, 5);
  std::ostringstream os;
  write_arc_csv(os, arc);
  std::istringstream is(os.str());
  std::string header;
  std::getline(is, header);
  CHECK(header == "t,j,case,x0,x1,f,z,phi,delta,k,q,p,m");
  std::size_t rows = 0;
  for (std::string line; std::getline(is, line);) ++rows;
  CHECK(rows == 6);
  std::ostringstream noisy;
  write_arc_csv(noisy, arc, true);
  CHECK(noisy.str().substr(0, noisy.str().find('\n')) == header + ",measured,noise");
}
