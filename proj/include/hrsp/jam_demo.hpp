#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "hrsp/core.hpp"
#include "hrsp/noise.hpp"
#include "hrsp/objectives.hpp"
#include "hrsp/rsp.hpp"

namespace hrsp {

struct JamDemoOptions {
  double noise_bound = 0.5;
  std::size_t max_cycles = 600;
  std::size_t max_evaluations = 1'000'000;
  /// Optional jam/drag alternation; empty means jam from index 0.
  std::vector<NoisePhase> schedule;
  /// Overrides the grid estimate when set.
  std::optional<AdversaryBounds> bounds;
};

struct JamReport {
  bool activated = false;
  std::optional<std::size_t> activation_measurement;
  std::optional<std::size_t> activation_cycle;
  Vector frozen_point;                 // anchor at activation
  std::size_t frozen_cycles = 0;       // completed cycles after activation with x unchanged
  std::size_t frozen_measurements = 0;
  bool frozen = false;                 // every anchor after activation is bit-identical
  std::size_t certificate_checks = 0;  // trials after activation
  std::size_t certificate_violations = 0;
  double max_abs_noise = 0.0;
  bool within_bound = false;  // max |noise| <= noise_bound
  AdversaryBounds bounds;
  RspRun run;
};

/// Runs the rsp under adversarial_jam noise and audits the outcome.
/// The certificate is checked per trial after activation: the measured
/// value is >= z - rho(delta) and the trial was rejected. A run that never
/// activates is reported with activated = false.
JamReport jam_demo(const ObjectiveFunction& f, const Vector& x0, const DirectionSet& ds, double phi,
                   const AlgorithmConfig& cfg, const JamDemoOptions& opts);

}  // namespace hrsp
