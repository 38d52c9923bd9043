#include "hrsp/hybrid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace hrsp {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double timer_slack(double tau_star) { return 1e-12 * std::max(1.0, tau_star); }

}  // namespace

std::string to_string(JumpCase c) {
  switch (c) {
    case JumpCase::D1: return "D1";
    case JumpCase::D2: return "D2";
    case JumpCase::D3: return "D3";
    case JumpCase::D4: return "D4";
    case JumpCase::D5: return "D5";
  }
  return "D5";
}

ControllerState initial_controller(DirectionSet ds, double phi, double z, std::size_t lead) {
  ds.check_shape();
  if (lead >= ds.size()) throw ShapeError("lead direction index out of range");
  ControllerState xc;
  xc.alpha = Vector::Zero(static_cast<Eigen::Index>(ds.size()));
  xc.v = ds.directions[lead];
  xc.delta = ds.steps[lead];
  xc.ds = std::move(ds);
  xc.phi = phi;
  xc.z = z;
  return xc;
}

void check_controller(const ControllerState& xc, double tau_star) {
  xc.ds.check_shape();
  const auto n = static_cast<Eigen::Index>(xc.ds.size());
  if (xc.alpha.size() != n || xc.v.size() != n) throw ShapeError("controller: alpha or v has the wrong dimension");
  std::vector<std::string> bad;
  if (xc.p != 1 && xc.p != -1) bad.push_back("p must be -1 or 1");
  if (xc.m != 0 && xc.m != 1) bad.push_back("m must be 0 or 1");
  if (xc.q < 0 || xc.q > 2) bad.push_back("q must be 0, 1 or 2");
  if (xc.k > xc.ds.size()) bad.push_back("k must be in 0..n");
  if (!(xc.tau >= 0.0) || xc.tau > tau_star + timer_slack(tau_star)) bad.push_back("tau must be in [0, tau_star]");
  if (!(xc.phi >= 0.0) || !(xc.delta >= 0.0)) bad.push_back("phi and delta must be >= 0");
  for (double s : xc.ds.steps) {
    if (!(s >= 0.0)) {
      bad.push_back("step sizes must be >= 0");
      break;
    }
  }
  if (bad.empty()) return;
  std::string msg = "invalid controller state:";
  for (const auto& b : bad) msg += " " + b + ";";
  throw ConfigError(msg, bad);
}

std::size_t explored_index(std::size_t k, std::size_t n) { return (k == 0 || k == n) ? n - 1 : k - 1; }

JumpCase classify_jump(const ControllerState& xc, double y) {
  if (xc.q == 2) return JumpCase::D5;
  if (xc.m == 1 && xc.p == -1 && xc.q == 1) return JumpCase::D3;
  if (xc.m == 0 && (xc.q == 0 || xc.q == 1) && !std::isnan(y)) {
    const double threshold = xc.z - rho(xc.delta);
    if (y <= threshold) {
      if (xc.p == 1) return JumpCase::D1;
      if (xc.p == -1 && xc.q == 1) return JumpCase::D4;
    }
    if (y >= threshold) return JumpCase::D2;
  }
  std::ostringstream os;
  os << "no jump case matches: p=" << xc.p << " m=" << xc.m << " q=" << xc.q << " k=" << xc.k << " y=" << y
     << " z=" << xc.z;
  throw AutomatonError(os.str());
}

bool direction_accepted(const Vector& candidate, const std::vector<Vector>& trailing, double delta_det) {
  return std::abs(candidate_determinant(trailing, candidate)) >= delta_det;
}

Vector phi_update(const Vector& alpha, const Vector& beta, const std::vector<Vector>& trailing, const Vector& d0,
                  double delta_det) {
  const Vector c = alpha + beta;
  return direction_accepted(c, trailing, delta_det) ? c : d0;
}

ControllerState apply_jump(const ControllerState& xc, JumpCase c, double y, const AlgorithmConfig& cfg) {
  ControllerState out = xc;
  out.tau = 0.0;
  const std::size_t n = xc.ds.size();
  auto& steps = out.ds.steps;
  auto& dirs = out.ds.directions;

  switch (c) {
    case JumpCase::D1:
    case JumpCase::D4: {
      out.z = y;
      if (c == JumpCase::D1) out.q = 1;
      const std::size_t idx = explored_index(xc.k, n);
      out.lambda = xc.lambda + xc.delta * xc.p;
      steps[idx] = std::min(cfg.gamma * steps[idx], cfg.lambda_t * xc.phi);
      out.delta = std::min(cfg.gamma * xc.delta, cfg.lambda_t * xc.phi);
      break;
    }
    case JumpCase::D2:
      out.p = -xc.p;
      out.m = 1;
      out.q = xc.q + 1;
      break;
    case JumpCase::D3:
      out.z = y;
      out.m = 0;
      out.lambda = 0.0;
      break;
    case JumpCase::D5: {
      const Vector travel = xc.lambda * xc.v;
      const double travel_norm = travel.norm();
      if (xc.k < n) {
        const std::size_t idx = explored_index(xc.k, n);
        if (std::abs(xc.lambda) <= steps[idx] / 2.0) {
          steps[idx] = std::max(cfg.theta * steps[idx], cfg.lambda_s * xc.phi);
        }
        if (xc.k == 0 && xc.v == dirs[n - 1]) {
          out.alpha.setZero();
        } else {
          out.alpha = xc.alpha + travel;
        }
        out.alpha_bar = xc.alpha_bar + travel_norm;
        out.v = dirs[xc.k];
        out.delta = steps[xc.k];
        out.k = xc.k + 1;
      } else {
        const double min_step = *std::min_element(steps.begin(), steps.end());
        const bool blocked = xc.alpha_bar + travel_norm <= min_step / 2.0;
        if (std::abs(xc.lambda) <= steps[n - 1] / 2.0) {
          steps[n - 1] = std::max(cfg.theta * steps[n - 1], cfg.lambda_s * xc.phi);
        }
        const Vector candidate = xc.alpha + travel;
        const std::vector<Vector> trailing(dirs.begin() + 1, dirs.end());
        if (direction_accepted(candidate, trailing, cfg.delta_det)) {
          const double new_step = *std::max_element(steps.begin(), steps.end());
          for (std::size_t j = 0; j + 1 < n; ++j) {
            dirs[j] = dirs[j + 1];
            steps[j] = steps[j + 1];
          }
          dirs[n - 1] = candidate;
          steps[n - 1] = new_step;
        }
        if (blocked) {
          out.phi = std::max(cfg.mu * xc.phi, cfg.phi_min);
          for (auto& s : steps) s = std::clamp(s, cfg.lambda_s * out.phi, cfg.lambda_t * out.phi);
        }
        out.alpha.setZero();
        out.alpha_bar = 0.0;
        out.v = dirs[n - 1];
        out.delta = steps[n - 1];
        out.k = 0;
      }
      out.q = 0;
      out.p = 1;
      out.lambda = 0.0;
      out.m = 0;
      out.z = y;
      break;
    }
  }
  return out;
}

ControllerState jump(const ControllerState& xc, double y, const AlgorithmConfig& cfg, JumpCase* taken) {
  if (xc.tau < cfg.tau_star - timer_slack(cfg.tau_star)) {
    std::ostringstream os;
    os << "jump requested at tau = " << xc.tau << " before tau_star = " << cfg.tau_star;
    throw SchedulingError(os.str());
  }
  const JumpCase c = classify_jump(xc, y);
  if (taken) *taken = c;
  return apply_jump(xc, c, y, cfg);
}

ControllerState flow(const ControllerState& xc, double dt, double tau_star) {
  if (!(dt >= 0.0)) throw SchedulingError("flow: dt must be >= 0");
  const double t = xc.tau + dt;
  if (t > tau_star + timer_slack(tau_star)) {
    std::ostringstream os;
    os << "flow past the timer period: tau + dt = " << t << " > tau_star = " << tau_star;
    throw SchedulingError(os.str());
  }
  ControllerState out = xc;
  out.tau = std::min(t, tau_star);
  return out;
}

std::vector<const ArcSample*> HybridArc::jump_samples() const {
  std::vector<const ArcSample*> out;
  for (const auto& s : samples) {
    if (s.jump) out.push_back(&s);
  }
  return out;
}

ClosedLoop::ClosedLoop(const PlantModel& plant, const ObjectiveFunction& f, NoiseModel& noise, PlantState xi0,
                       ControllerState xc0, const AlgorithmConfig& cfg, std::size_t flow_samples)
    : plant_(plant), f_(f), noise_(noise), xi_(std::move(xi0)), xc_(std::move(xc0)), cfg_(cfg),
      flow_samples_(flow_samples) {
  require_valid(cfg_);
  validate_plant(plant_);
  check_plant_state(plant_, xi_);
  check_controller(xc_, cfg_.tau_star);
  if (static_cast<std::size_t>(xi_.x.size()) != xc_.ds.size()) {
    throw ShapeError("plant position and controller directions differ in dimension");
  }
  arc_.n = xc_.ds.size();
  ArcSample s0;
  s0.t = 0.0;
  s0.j = 0;
  s0.xi = xi_;
  s0.xc = xc_;
  s0.f = f_(xi_.x);
  arc_.samples.push_back(std::move(s0));
}

void ClosedLoop::step() {
  const double tau_star = cfg_.tau_star;
  const double tau0 = xc_.tau;
  const double dt = tau_star - tau0;
  // Time of the jump ending this period; the first period may start mid-timer.
  const double t_start = arc_.samples.back().t;
  const double t_end = static_cast<double>(j_ + 1) * tau_star - arc_.samples.front().xc.tau;

  const Vector target = (static_cast<double>(xc_.p) * xc_.delta) * xc_.v;
  const PlantState start = xi_;
  const SteerResult plan = steer(plant_, xi_, target, dt);
  const Trajectory tr = integrate(plant_, xi_, plan.schedule, dt);

  if (flow_samples_ > 0 && tr.states.size() > 2) {
    const std::size_t last = tr.states.size() - 1;
    for (std::size_t i = 1; i <= flow_samples_; ++i) {
      const std::size_t at = std::min(last - 1, std::max<std::size_t>(1, i * last / (flow_samples_ + 1)));
      ArcSample s;
      s.t = t_start + tr.t[at];
      s.j = j_;
      s.xi = tr.states[at];
      s.xc = flow(xc_, tr.t[at], tau_star);
      s.f = f_(s.xi.x);
      arc_.samples.push_back(std::move(s));
    }
  }

  xi_ = tr.states.back();
  xc_ = flow(xc_, dt, tau_star);
  const double fx = f_(xi_.x);
  if (!std::isfinite(fx)) {
    std::ostringstream os;
    os << "objective '" << f_.name << "' returned " << fx << " at x = " << xi_.x.transpose();
    throw EvaluationError(os.str(), xi_.x);
  }
  const double noise = noise_.sample(j_, xc_.delta);
  const double y = fx + noise;

  JumpLabel label;
  label.tau_before = xc_.tau;
  xc_ = jump(xc_, y, cfg_, &label.kind);
  ++j_;
  label.j = j_;
  label.t = t_end;
  label.commanded = target;
  label.realized = xi_.x - start.x;
  arc_.jumps.push_back(label);

  ArcSample s;
  s.t = t_end;
  s.j = j_;
  s.xi = xi_;
  s.xc = xc_;
  s.f = fx;
  s.jump = label.kind;
  s.measured = y;
  s.noise = noise;
  arc_.samples.push_back(std::move(s));
}

HybridArc run_closed_loop(const PlantModel& plant, const ObjectiveFunction& f, NoiseModel& noise,
                          const PlantState& xi0, const ControllerState& xc0, const AlgorithmConfig& cfg,
                          const HybridStop& stop) {
  ClosedLoop loop(plant, f, noise, xi0, xc0, cfg, stop.flow_samples);
  while (loop.jumps() < stop.max_jumps) loop.step();
  return loop.take_arc();
}

RspState rsp_state_from_controller(const Vector& x0, const ControllerState& xc) {
  if (xc.k != 0 || xc.q != 0 || xc.m != 0 || xc.p != 1 || xc.lambda != 0.0) {
    throw InvariantError("rsp start state needs a controller at the start of a cycle");
  }
  RspState s;
  s.x = x0;
  s.ds = xc.ds;
  s.phi = xc.phi;
  s.z = xc.z;
  s.lead = Lead{xc.v, xc.delta};
  return s;
}

EquivalenceResult equivalence_check(const HybridArc& arc, const std::vector<IterateRecord>& rsp_log, double tol) {
  EquivalenceResult r;
  r.ok = true;
  const auto jumps = arc.jump_samples();
  std::size_t li = 0;
  for (std::size_t i = 0; i < jumps.size(); ++i) {
    while (li < rsp_log.size() && rsp_log[li].kind == MeasureKind::initial) ++li;
    if (li >= rsp_log.size()) break;
    const Vector& a = jumps[i]->xi.x;
    const Vector& b = rsp_log[li].x;
    const double dev = a.size() == b.size() ? (a - b).cwiseAbs().maxCoeff() : INFINITY;
    r.max_deviation = std::max(r.max_deviation, dev);
    ++r.compared;
    if (!(dev <= tol)) {
      r.ok = false;
      r.first_divergence = jumps[i]->j;
      break;
    }
    ++li;
  }
  return r;
}

GrammarResult check_grammar(const std::vector<JumpLabel>& jumps) {
  enum class St { start, positive, negative_open, negative, closing };
  GrammarResult g;
  St s = St::start;
  for (std::size_t i = 0; i < jumps.size(); ++i) {
    const JumpCase c = jumps[i].kind;
    bool ok = true;
    switch (s) {
      case St::start:
        if (c == JumpCase::D1) s = St::positive;
        else if (c == JumpCase::D2) s = St::negative_open;
        else ok = false;
        break;
      case St::positive:
        if (c == JumpCase::D1) s = St::positive;
        else if (c == JumpCase::D2) s = St::closing;
        else ok = false;
        break;
      case St::negative_open:
        if (c == JumpCase::D3) s = St::negative;
        else ok = false;
        break;
      case St::negative:
        if (c == JumpCase::D4) s = St::negative;
        else if (c == JumpCase::D2) s = St::closing;
        else ok = false;
        break;
      case St::closing:
        if (c == JumpCase::D5) {
          s = St::start;
          ++g.completed;
        } else {
          ok = false;
        }
        break;
    }
    if (!ok) {
      g.ok = false;
      g.first_violation = i;
      return g;
    }
  }
  return g;
}

double max_displacement_error(const HybridArc& arc) {
  double worst = 0.0;
  for (const auto& j : arc.jumps) {
    const double e = (j.realized - j.commanded).norm() / std::max(1.0, j.commanded.norm());
    worst = std::max(worst, e);
  }
  return worst;
}

double max_timer_error(const HybridArc& arc, double tau_star) {
  double worst = 0.0;
  for (const auto& j : arc.jumps) worst = std::max(worst, std::abs(j.tau_before - tau_star));
  return worst;
}

std::size_t z_increase_count(const HybridArc& arc, std::size_t warmup) {
  std::size_t count = 0;
  double prev = arc.samples.empty() ? 0.0 : arc.samples.front().xc.z;
  for (const auto& s : arc.samples) {
    if (!s.jump) continue;
    const double z = s.xc.z;
    if (s.j >= warmup && z > prev + 1e-12 * std::max(1.0, std::abs(prev))) ++count;
    prev = z;
  }
  return count;
}

std::size_t d5_increase_count(const HybridArc& arc) {
  std::size_t count = 0;
  std::optional<double> prev;
  for (const auto& s : arc.samples) {
    if (s.jump != JumpCase::D5) continue;
    if (prev && s.f > *prev + 1e-12 * std::abs(*prev)) ++count;
    prev = s.f;
  }
  return count;
}

void write_arc_csv(std::ostream& os, const HybridArc& arc, bool with_noise) {
  os << "t,j,case";
  for (std::size_t i = 0; i < arc.n; ++i) os << ",x" << i;
  os << ",f,z,phi,delta,k,q,p,m";
  if (with_noise) os << ",measured,noise";
  os << '\n';
  for (const auto& s : arc.samples) {
    os << num(s.t) << ',' << s.j << ',' << (s.jump ? to_string(*s.jump) : "");
    for (Eigen::Index i = 0; i < s.xi.x.size(); ++i) os << ',' << num(s.xi.x[i]);
    os << ',' << num(s.f) << ',' << num(s.xc.z) << ',' << num(s.xc.phi) << ',' << num(s.xc.delta) << ','
       << s.xc.k << ',' << s.xc.q << ',' << s.xc.p << ',' << s.xc.m;
    if (with_noise) {
      if (s.jump) {
        os << ',' << num(s.measured) << ',' << num(s.noise);
      } else {
        os << ",,";
      }
    }
    os << '\n';
  }
}

}  // namespace hrsp
