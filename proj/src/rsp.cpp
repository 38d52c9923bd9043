#include "hrsp/rsp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hrsp {

std::string to_string(MeasureKind kind) {
  switch (kind) {
    case MeasureKind::initial: return "initial";
    case MeasureKind::trial: return "trial";
    case MeasureKind::restart: return "restart";
    case MeasureKind::final: return "final";
  }
  return "trial";
}

std::string to_string(StopReason reason) {
  switch (reason) {
    case StopReason::max_cycles: return "max_cycles";
    case StopReason::phi_threshold: return "phi_threshold";
    case StopReason::max_evaluations: return "max_evaluations";
  }
  return "max_cycles";
}

Measurer::Measurer(const ObjectiveFunction& f, NoiseModel* noise, std::size_t budget, bool keep_log)
    : f_(f), noise_(noise), budget_(budget), keep_log_(keep_log) {}

double Measurer::measure(const Vector& x, double delta, IterateRecord rec) {
  if (count_ >= budget_) {
    throw EvaluationBudgetExhausted("evaluation budget of " + std::to_string(budget_) + " spent");
  }
  const double fx = f_(x);
  if (!std::isfinite(fx)) {
    std::ostringstream os;
    os << "objective '" << f_.name << "' returned " << fx << " at x = " << x.transpose();
    throw EvaluationError(os.str(), x);
  }
  const double n = noise_ ? noise_->sample(count_, delta) : 0.0;
  const double y = fx + n;
  if (keep_log_) {
    rec.index = count_;
    rec.x = x;
    rec.measured = y;
    rec.noise = n;
    rec.delta = delta;
    log_.push_back(std::move(rec));
  }
  ++count_;
  return y;
}

void Measurer::mark_last_accepted(bool accepted) {
  if (keep_log_ && !log_.empty()) log_.back().accepted = accepted;
}

LineMinResult line_minimize(Measurer& m, const Vector& x0, double z0, const Vector& d, double delta,
                            double stored_delta, double phi, const AlgorithmConfig& cfg, const SlotTag& tag) {
  if (!(delta > 0.0) && delta != 0.0) throw DomainError("line_minimize: step must be >= 0");
  if (d.size() != x0.size()) throw ShapeError("line_minimize: direction and point differ in dimension");

  LineMinResult r;
  r.final_step = delta;
  r.stored_step = stored_delta;
  r.x = x0;
  double z = z0;

  auto label = [&](MeasureKind kind, std::size_t step) {
    IterateRecord rec;
    rec.cycle = tag.cycle;
    rec.slot = tag.slot;
    rec.direction = tag.direction;
    rec.step = step;
    rec.kind = kind;
    rec.reference = z;
    return rec;
  };

  // One trial from the anchor in direction s; true when accepted.
  std::size_t step = 0;
  auto trial = [&](double s) {
    const double active = r.final_step;
    const Vector xt = r.x + (s * active) * d;
    const RhoValue margin = rho_checked(active);
    r.underflow = r.underflow || margin.underflow;
    const double y = m.measure(xt, active, label(MeasureKind::trial, step++));
    const bool ok = y <= z - margin.value;
    m.mark_last_accepted(ok);
    if (!ok) return false;
    z = y;
    r.x = xt;
    r.alpha = r.alpha + active * s;
    ++r.steps_taken;
    r.stored_step = std::min(cfg.gamma * r.stored_step, cfg.lambda_t * phi);
    r.final_step = std::min(cfg.gamma * r.final_step, cfg.lambda_t * phi);
    return true;
  };

  while (trial(+1.0)) {
  }
  if (r.steps_taken == 0) {
    z = m.measure(r.x, r.final_step, label(MeasureKind::restart, step));
    while (trial(-1.0)) {
    }
  }
  z = m.measure(r.x, r.final_step, label(MeasureKind::final, step));
  r.final_value = z;
  return r;
}

LineMinResult line_minimize(const ObjectiveFunction& f, const Vector& x0, const Vector& d, double delta,
                            double phi, const AlgorithmConfig& cfg) {
  Measurer m(f);
  IterateRecord rec;
  rec.kind = MeasureKind::initial;
  const double z0 = m.measure(x0, delta, rec);
  return line_minimize(m, x0, z0, d, delta, delta, phi, cfg);
}

void require_spanning(const DirectionSet& ds, double delta_det) {
  ds.check_shape();
  const double det = direction_determinant(ds);
  if (!(std::abs(det) >= delta_det)) {
    std::ostringstream os;
    os << "direction set is degenerate: |det| = " << std::abs(det) << " < delta_det = " << delta_det;
    throw InvariantError(os.str());
  }
}

RspState rsp_cycle(RspState state, Measurer& m, const AlgorithmConfig& cfg, CycleSummary* summary) {
  require_spanning(state.ds, cfg.delta_det);
  auto& ds = state.ds;
  const std::size_t n = ds.size();
  if (static_cast<std::size_t>(state.x.size()) != n) throw ShapeError("iterate and directions differ in dimension");

  if (!state.z) {
    IterateRecord rec;
    rec.cycle = state.cycle;
    rec.kind = MeasureKind::initial;
    const double active = state.lead ? state.lead->step : ds.steps[n - 1];
    state.z = m.measure(state.x, active, rec);
  }

  CycleSummary s;
  s.cycle = state.cycle;
  s.phi_before = state.phi;
  Vector alpha = Vector::Zero(static_cast<Eigen::Index>(n));
  double alpha_bar = 0.0;
  const double phi = state.phi;

  for (std::size_t slot = 0; slot <= n; ++slot) {
    const std::size_t idx = (slot == 0 || slot == n) ? n - 1 : slot - 1;
    const bool use_lead = slot == 0 && state.lead.has_value();
    const Vector d = use_lead ? state.lead->direction : ds.directions[idx];
    const double active = use_lead ? state.lead->step : ds.steps[idx];

    const LineMinResult r =
        line_minimize(m, state.x, *state.z, d, active, ds.steps[idx], phi, cfg, {state.cycle, slot, idx});
    ds.steps[idx] = r.stored_step;
    state.x = r.x;
    state.z = r.final_value;
    s.travel.push_back(r.alpha);
    const Vector travel = r.alpha * d;
    const double travel_norm = travel.norm();

    if (slot < n) {
      if (std::abs(r.alpha) <= ds.steps[idx] / 2.0) {
        ds.steps[idx] = std::max(cfg.theta * ds.steps[idx], cfg.lambda_s * phi);
      }
      // After a line search along d_{n-1} the iterate is a line minimum
      // parallel to the one slot n ends on; the displacement is measured
      // from there. A lead along any other direction gives no such point
      // and the whole cycle counts.
      if (slot == 0 && d == ds.directions[n - 1]) {
        alpha.setZero();
      } else {
        alpha = alpha + travel;
      }
      alpha_bar = alpha_bar + travel_norm;
      continue;
    }

    const double min_step = ds.min_step();
    s.blocked = alpha_bar + travel_norm <= min_step / 2.0;
    if (std::abs(r.alpha) <= ds.steps[n - 1] / 2.0) {
      ds.steps[n - 1] = std::max(cfg.theta * ds.steps[n - 1], cfg.lambda_s * phi);
    }
    s.candidate = alpha + travel;
    s.candidate_det = candidate_determinant(std::span<const Vector>(ds.directions).subspan(1), s.candidate);
    s.direction_accepted = std::abs(s.candidate_det) >= cfg.delta_det;
    if (s.direction_accepted) {
      const double new_step = ds.max_step();
      for (std::size_t j = 0; j + 1 < n; ++j) {
        ds.directions[j] = ds.directions[j + 1];
        ds.steps[j] = ds.steps[j + 1];
      }
      ds.directions[n - 1] = s.candidate;
      ds.steps[n - 1] = new_step;
    }
    if (s.blocked) {
      state.phi = std::max(cfg.mu * phi, cfg.phi_min);
      for (auto& st : ds.steps) st = std::clamp(st, cfg.lambda_s * state.phi, cfg.lambda_t * state.phi);
    }
  }

  state.lead.reset();
  ++state.cycle;
  s.x = state.x;
  s.z = *state.z;
  s.phi_after = state.phi;
  s.steps_after = ds.steps;
  if (summary) *summary = std::move(s);
  return state;
}

RspRun run(const ObjectiveFunction& f, RspState init, const AlgorithmConfig& cfg, const StopRule& stop,
           NoiseModel* noise, bool keep_log) {
  require_valid(cfg);
  Measurer m(f, noise, stop.max_evaluations, keep_log);
  RspRun out;
  out.state = std::move(init);
  std::size_t done = 0;
  try {
    while (true) {
      if (done >= stop.max_cycles) {
        out.reason = StopReason::max_cycles;
        break;
      }
      if (out.state.phi < stop.phi_threshold) {
        out.reason = StopReason::phi_threshold;
        break;
      }
      CycleSummary s;
      // Copy in, so an exhausted budget leaves the last completed cycle.
      out.state = rsp_cycle(out.state, m, cfg, &s);
      out.cycles.push_back(std::move(s));
      ++done;
    }
  } catch (const EvaluationBudgetExhausted&) {
    out.reason = StopReason::max_evaluations;
  }
  out.evaluations = m.count();
  out.log = m.take_log();
  return out;
}

RspState make_rsp_state(Vector x0, std::vector<Vector> directions, double step, double phi) {
  RspState s;
  s.x = std::move(x0);
  s.ds = uniform_direction_set(std::move(directions), step);
  s.phi = phi;
  return s;
}

double exact_line_search(const Quadratic& q, const Vector& x0, const Vector& d) {
  const double curvature = d.dot(q.hessian * d);
  if (!(curvature > 0.0)) {
    std::ostringstream os;
    os << "exact_line_search: objective is not strictly convex along d (d'Hd = " << curvature << ")";
    throw DomainError(os.str());
  }
  return -q.gradient(x0).dot(d) / curvature;
}

ExactTrace run_exact(const Quadratic& q, const Vector& x0, std::vector<Vector> directions, double delta_det,
                     std::size_t max_line_minimizations) {
  const std::size_t n = directions.size();
  if (n == 0 || static_cast<std::size_t>(x0.size()) != n) throw ShapeError("run_exact: dimension mismatch");
  ExactTrace trace;
  Vector x = x0;
  for (std::size_t c = 0; trace.points.size() < max_line_minimizations; ++c) {
    ExactCycle rec;
    rec.directions_before = directions;
    Vector alpha = Vector::Zero(static_cast<Eigen::Index>(n));
    for (std::size_t slot = 0; slot <= n; ++slot) {
      const std::size_t idx = (slot == 0 || slot == n) ? n - 1 : slot - 1;
      const Vector& d = directions[idx];
      const double t = exact_line_search(q, x, d);
      x += t * d;
      if (slot > 0) alpha += t * d;
      trace.points.push_back(x);
      if (trace.points.size() >= max_line_minimizations) return trace;
    }
    rec.candidate = alpha;
    const double det = candidate_determinant(std::span<const Vector>(directions).subspan(1), alpha);
    rec.accepted = std::abs(det) >= delta_det;
    if (rec.accepted) {
      const std::size_t conj = std::min(c + 1, n - 1);
      for (std::size_t i = n - conj; i < n; ++i) {
        const Vector hd = q.hessian * directions[i];
        rec.conjugacy.emplace_back(i, std::abs(alpha.dot(hd)) / (alpha.norm() * hd.norm()));
      }
      for (std::size_t j = 0; j + 1 < n; ++j) directions[j] = directions[j + 1];
      directions[n - 1] = alpha;
    }
    trace.cycles.push_back(std::move(rec));
  }
  return trace;
}

}  // namespace hrsp
