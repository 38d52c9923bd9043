#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "hrsp/core.hpp"
#include "hrsp/noise.hpp"
#include "hrsp/objectives.hpp"
#include "hrsp/plants.hpp"
#include "hrsp/rsp.hpp"

namespace hrsp {

/// Full controller state x_c.
struct ControllerState {
  double tau = 0.0;
  DirectionSet ds;  // d_j and Delta_j
  double phi = 0.0;
  double lambda = 0.0;
  Vector alpha;
  double alpha_bar = 0.0;
  int p = 1;
  int m = 0;
  std::size_t k = 0;
  int q = 0;
  double z = 0.0;
  double delta = 0.0;
  Vector v;

  bool operator==(const ControllerState&) const = default;
};

/// Controller state at the start of a run: k = q = m = 0, p = 1, lambda = 0,
/// alpha = 0, v = d_{lead}, delta = steps[lead].
ControllerState initial_controller(DirectionSet ds, double phi, double z, std::size_t lead = 0);

/// Throws ShapeError / ConfigError when the state is malformed
/// (dimensions, p, m, q, k out of range, tau outside [0, tau_star]).
void check_controller(const ControllerState& xc, double tau_star);

enum class JumpCase { D1, D2, D3, D4, D5 };
std::string to_string(JumpCase c);

/// Stored step index explored at counter value k: n-1 for k in {0, n},
/// k-1 otherwise.
std::size_t explored_index(std::size_t k, std::size_t n);

/// Picks the jump case for measurement y. Accepting cases win at the
/// sufficient-decrease tie. Throws AutomatonError when nothing matches.
JumpCase classify_jump(const ControllerState& xc, double y);

/// Applies the map of case c. Resets tau to 0.
ControllerState apply_jump(const ControllerState& xc, JumpCase c, double y, const AlgorithmConfig& cfg);

/// classify_jump then apply_jump. Throws SchedulingError when tau < tau_star.
ControllerState jump(const ControllerState& xc, double y, const AlgorithmConfig& cfg, JumpCase* taken = nullptr);

/// |det(trailing..., candidate)| >= delta_det.
bool direction_accepted(const Vector& candidate, const std::vector<Vector>& trailing, double delta_det);

/// alpha + beta when the determinant test passes, d0 otherwise. Exact
/// equality counts as passing.
Vector phi_update(const Vector& alpha, const Vector& beta, const std::vector<Vector>& trailing, const Vector& d0,
                  double delta_det);

/// Advances only the timer. Throws SchedulingError past tau_star (beyond a
/// relative 1e-12 slack) or for negative dt.
ControllerState flow(const ControllerState& xc, double dt, double tau_star);

// ---------------------------------------------------------------------------
// Closed loop
// ---------------------------------------------------------------------------

struct JumpLabel {
  JumpCase kind = JumpCase::D5;
  std::size_t j = 0;  // index after the jump
  double t = 0.0;
  double tau_before = 0.0;
  Vector commanded;  // p * Delta * v of the period that ended here
  Vector realized;   // x(t_j + tau*) - x(t_j)
};

struct ArcSample {
  double t = 0.0;
  std::size_t j = 0;
  PlantState xi;
  ControllerState xc;
  double f = 0.0;  // true objective value
  std::optional<JumpCase> jump;  // set on rows recorded right after a jump
  double measured = 0.0;         // jump rows: f + noise
  double noise = 0.0;            // jump rows
};

struct HybridArc {
  std::vector<ArcSample> samples;
  std::vector<JumpLabel> jumps;
  std::size_t n = 0;

  /// The samples that follow jumps, in order.
  std::vector<const ArcSample*> jump_samples() const;
};

struct HybridStop {
  std::size_t max_jumps = 1000;
  std::size_t flow_samples = 0;  // intra-period rows per period

  bool operator==(const HybridStop&) const = default;
};

/// Steps the closed loop one period at a time, so a caller keeps the partial
/// arc when a step throws.
class ClosedLoop {
 public:
  ClosedLoop(const PlantModel& plant, const ObjectiveFunction& f, NoiseModel& noise, PlantState xi0,
             ControllerState xc0, const AlgorithmConfig& cfg, std::size_t flow_samples = 0);

  /// Flow for tau_star - tau, measure, jump.
  void step();
  std::size_t jumps() const { return j_; }
  const HybridArc& arc() const { return arc_; }
  HybridArc take_arc() { return std::move(arc_); }
  const PlantState& plant_state() const { return xi_; }
  const ControllerState& controller() const { return xc_; }

 private:
  PlantModel plant_;
  const ObjectiveFunction& f_;
  NoiseModel& noise_;
  PlantState xi_;
  ControllerState xc_;
  AlgorithmConfig cfg_;
  std::size_t flow_samples_;
  std::size_t j_ = 0;
  HybridArc arc_;
};

HybridArc run_closed_loop(const PlantModel& plant, const ObjectiveFunction& f, NoiseModel& noise,
                          const PlantState& xi0, const ControllerState& xc0, const AlgorithmConfig& cfg,
                          const HybridStop& stop);

/// The rsp start state that performs the same measurements as a controller
/// at the start of a cycle (k = q = m = 0, p = 1, lambda = 0).
RspState rsp_state_from_controller(const Vector& x0, const ControllerState& xc);

// ---------------------------------------------------------------------------
// Checks
// ---------------------------------------------------------------------------

struct EquivalenceResult {
  bool ok = false;
  std::size_t compared = 0;
  std::optional<std::size_t> first_divergence;  // jump index
  double max_deviation = 0.0;
};

/// Compares x at each jump with the rsp evaluated points (initial records
/// skipped), coordinate-wise within tol.
EquivalenceResult equivalence_check(const HybridArc& arc, const std::vector<IterateRecord>& rsp_log,
                                    double tol = 1e-9);

struct GrammarResult {
  bool ok = true;
  std::optional<std::size_t> first_violation;  // position in arc.jumps
  std::size_t completed = 0;                   // line minimizations closed by D5
};

/// Between D5 jumps each line minimization reads D1+ D2 or D2 D3 D4* D2.
GrammarResult check_grammar(const std::vector<JumpLabel>& jumps);

/// Largest ||realized - commanded|| / max(1, ||commanded||) over all jumps.
double max_displacement_error(const HybridArc& arc);

/// Largest |tau_before - tau_star| over all jumps.
double max_timer_error(const HybridArc& arc, double tau_star);

/// Jumps j >= warmup where z rose above its previous value by more than a
/// rounding slack.
std::size_t z_increase_count(const HybridArc& arc, std::size_t warmup = 3);

/// D5 jumps at which the true f rose above its value at the previous D5 by
/// more than a relative 1e-12 (plant round-off).
std::size_t d5_increase_count(const HybridArc& arc);

/// CSV with columns t, j, case, x0.., f, z, phi, delta, k, q, p, m
/// (+ measured, noise). Doubles printed with %.17g.
void write_arc_csv(std::ostream& os, const HybridArc& arc, bool with_noise = false);

}  // namespace hrsp
