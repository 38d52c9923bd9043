#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "hrsp/core.hpp"
#include "hrsp/objectives.hpp"

namespace hrsp {

enum class NoiseKind { zero, bounded_random, adversarial_jam, adversarial_drag };

std::string to_string(NoiseKind kind);
/// Throws ConfigError for unknown names.
NoiseKind noise_kind_from_string(const std::string& name);

/// Upper bounds the adversary needs over the initial sublevel set.
struct AdversaryBounds {
  double gradient_bound = 0.0;   // max ||grad f||
  double direction_bound = 0.0;  // d-bar: max of initial ||d_j|| and the set diameter
  double value_scale = 0.0;      // max |f|, sizes the rounding margin

  bool operator==(const AdversaryBounds&) const = default;
};

/// Noise kind in force from measurement index `start` on.
struct NoisePhase {
  std::size_t start = 0;
  NoiseKind kind = NoiseKind::zero;

  bool operator==(const NoisePhase&) const = default;
};

struct NoiseSpec {
  NoiseKind kind = NoiseKind::zero;
  double bound = 0.0;  // n-bar
  std::uint64_t seed = 0;
  std::optional<AdversaryBounds> adversary;
  // Empty means a single phase of `kind` from index 0.
  std::vector<NoisePhase> schedule;

  bool operator==(const NoiseSpec&) const = default;
};

/// One step of the adversarial recursion magnitude:
/// grad_bound * delta * d_bar + rho(delta), plus a few ulps of the running
/// value so the sufficient-decrease test keeps failing after rounding.
double adversary_increment(const AdversaryBounds& b, double delta, double previous);

/// Throws ConfigError on a negative or non-finite bound, an unsorted
/// schedule, or an adversarial kind without adversary bounds.
void validate_noise(const NoiseSpec& spec);

/// Stateful measurement-noise generator. One instance per run.
///
/// Samples must be drawn in order k = 0, 1, 2, ... because the adversarial
/// kinds are recursions over the previous emission.
class NoiseModel {
 public:
  NoiseModel();  // zero noise
  /// `theta` enters the jam activation test.
  NoiseModel(NoiseSpec spec, double theta);

  /// Noise added to measurement k, taken with active step `delta`.
  double sample(std::size_t k, double delta);

  const NoiseSpec& spec() const { return spec_; }
  std::size_t samples() const { return next_; }
  /// Measurement index at which the jam became active, if it did.
  std::optional<std::size_t> activation_index() const { return activation_; }
  double max_abs() const { return max_abs_; }
  NoiseKind kind_at(std::size_t k) const;

 private:
  NoiseSpec spec_;
  double theta_ = 0.5;
  std::vector<NoisePhase> phases_;
  std::mt19937_64 gen_;
  std::size_t next_ = 0;
  std::size_t phase_ = 0;
  double accumulated_ = 0.0;
  bool jam_active_ = false;
  std::optional<std::size_t> activation_;
  double max_abs_ = 0.0;
};

/// rho(lambda_s * phi_floor) / 2, the largest noise bound the floored
/// algorithm tolerates.
RhoValue robustness_bound(double lambda_s, double phi_floor);

/// Bounds over the sublevel set {f <= level} found by grid search in a box
/// around x0 that grows until the set no longer touches its boundary.
/// Uses the analytic gradient when the objective provides one, central
/// differences otherwise.
AdversaryBounds estimate_adversary_bounds(const ObjectiveFunction& f, const Vector& x0,
                                          const std::vector<Vector>& directions,
                                          std::optional<double> level = std::nullopt);

}  // namespace hrsp
