#include "hrsp/jam_demo.hpp"

namespace hrsp {

JamReport jam_demo(const ObjectiveFunction& f, const Vector& x0, const DirectionSet& ds, double phi,
                   const AlgorithmConfig& cfg, const JamDemoOptions& opts) {
  JamReport rep;
  rep.bounds = opts.bounds ? *opts.bounds : estimate_adversary_bounds(f, x0, ds.directions);

  NoiseSpec spec;
  spec.kind = NoiseKind::adversarial_jam;
  spec.bound = opts.noise_bound;
  spec.adversary = rep.bounds;
  spec.schedule = opts.schedule;
  NoiseModel noise(spec, cfg.theta);

  RspState init;
  init.x = x0;
  init.ds = ds;
  init.phi = phi;
  StopRule stop;
  stop.max_cycles = opts.max_cycles;
  stop.max_evaluations = opts.max_evaluations;
  rep.run = run(f, std::move(init), cfg, stop, &noise);

  rep.max_abs_noise = noise.max_abs();
  rep.within_bound = rep.max_abs_noise <= opts.noise_bound;
  rep.activation_measurement = noise.activation_index();
  rep.activated = rep.activation_measurement.has_value();
  if (!rep.activated) return rep;

  const auto& log = rep.run.log;
  const std::size_t k0 = *rep.activation_measurement;
  // Anchor at activation. Trials are measured away from it, everything else at it.
  const IterateRecord& first = log[k0];
  rep.activation_cycle = first.cycle;
  if (first.kind == MeasureKind::trial) {
    rep.frozen_point = x0;
    for (std::size_t i = k0; i-- > 0;) {
      if (log[i].kind != MeasureKind::trial || log[i].accepted) {
        rep.frozen_point = log[i].x;
        break;
      }
    }
  } else {
    rep.frozen_point = first.x;
  }

  rep.frozen = true;
  for (std::size_t i = k0; i < log.size(); ++i) {
    const IterateRecord& r = log[i];
    ++rep.frozen_measurements;
    if (r.kind == MeasureKind::trial) {
      ++rep.certificate_checks;
      if (r.accepted || !(r.measured >= r.reference - rho(r.delta))) ++rep.certificate_violations;
    } else if (r.x != rep.frozen_point) {
      rep.frozen = false;
    }
  }
  for (const auto& c : rep.run.cycles) {
    if (c.cycle > first.cycle || (c.cycle == first.cycle && first.slot == 0 && first.step == 0)) {
      if (c.x == rep.frozen_point) ++rep.frozen_cycles;
      else rep.frozen = false;
    }
  }
  return rep;
}

}  // namespace hrsp
