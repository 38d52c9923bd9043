#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "hrsp/core.hpp"
#include "hrsp/noise.hpp"
#include "hrsp/objectives.hpp"

namespace hrsp {

/// Why a point was measured.
enum class MeasureKind {
  initial,  // first value of z, when none was supplied
  trial,    // anchor + s * delta * d
  restart,  // anchor again before the negative search
  final     // anchor again after the line minimization
};

std::string to_string(MeasureKind kind);

struct IterateRecord {
  std::size_t index = 0;      // measurement counter, also the noise index
  std::size_t cycle = 0;      // k
  std::size_t slot = 0;       // 0..n within the cycle
  std::size_t direction = 0;  // stored step index explored in this slot
  std::size_t step = 0;       // i, trial count within the line minimization
  MeasureKind kind = MeasureKind::trial;
  Vector x;
  double measured = 0.0;   // f(x) + noise
  double noise = 0.0;
  double reference = 0.0;  // z before this measurement
  double delta = 0.0;      // active step when measured
  bool accepted = false;   // trials only
};

/// Raised by Measurer once its evaluation budget is spent.
class EvaluationBudgetExhausted : public Error {
 public:
  using Error::Error;
};

/// Objective plus noise plus bookkeeping. Every evaluation the search makes
/// goes through here.
class Measurer {
 public:
  explicit Measurer(const ObjectiveFunction& f, NoiseModel* noise = nullptr,
                    std::size_t budget = std::numeric_limits<std::size_t>::max(), bool keep_log = true);

  /// Measures f(x) + noise. `rec` supplies the labels; index, x, measured and
  /// noise are filled in. Throws EvaluationError on a non-finite value and
  /// EvaluationBudgetExhausted when the budget is spent.
  double measure(const Vector& x, double delta, IterateRecord rec);

  /// Records the acceptance decision on the most recent log entry.
  void mark_last_accepted(bool accepted);

  std::size_t count() const { return count_; }
  const std::vector<IterateRecord>& log() const { return log_; }
  std::vector<IterateRecord> take_log() { return std::move(log_); }
  const ObjectiveFunction& objective() const { return f_; }

 private:
  const ObjectiveFunction& f_;
  NoiseModel* noise_;
  std::size_t budget_;
  bool keep_log_;
  std::size_t count_ = 0;
  std::vector<IterateRecord> log_;
};

struct LineMinResult {
  double alpha = 0.0;           // signed travel, in units of d
  std::size_t steps_taken = 0;  // accepted trials
  double final_value = 0.0;     // z after the closing measurement
  double final_step = 0.0;      // active step after expansions
  double stored_step = 0.0;     // stored step of the explored direction
  Vector x;                     // anchor + alpha * d
  bool underflow = false;       // rho underflowed at some trial
};

/// Labels attached to the measurements of one line minimization.
struct SlotTag {
  std::size_t cycle = 0;
  std::size_t slot = 0;
  std::size_t direction = 0;
};

/// Discrete line minimization along d from x0 with memory z0.
///
/// Trials x + s*delta*d for s = +1 are accepted while the measured value is
/// <= z - rho(delta); each acceptance sets z, moves the anchor and expands
/// both the active and the stored step to min(gamma*step, lambda_t*phi).
/// After the first failure the anchor is measured again. When nothing was
/// accepted that measurement restarts z and the search repeats with s = -1,
/// followed by one more measurement of the anchor.
LineMinResult line_minimize(Measurer& m, const Vector& x0, double z0, const Vector& d, double delta,
                            double stored_delta, double phi, const AlgorithmConfig& cfg,
                            const SlotTag& tag = {});

/// Noise-free convenience form: z0 = f(x0), stored step = delta.
LineMinResult line_minimize(const ObjectiveFunction& f, const Vector& x0, const Vector& d, double delta,
                            double phi, const AlgorithmConfig& cfg);

/// Direction and step of the first slot of the next cycle when they differ
/// from d_{n-1} and its stored step.
struct Lead {
  Vector direction;
  double step = 0.0;
};

struct RspState {
  Vector x;
  DirectionSet ds;
  double phi = 0.0;
  std::optional<double> z;  // measured on first use when empty
  std::optional<Lead> lead;
  std::size_t cycle = 0;
};

struct CycleSummary {
  std::size_t cycle = 0;
  Vector x;
  double z = 0.0;
  double phi_before = 0.0;
  double phi_after = 0.0;
  bool blocked = false;
  Vector candidate;
  double candidate_det = 0.0;
  bool direction_accepted = false;
  std::vector<double> travel;  // lambda per slot
  std::vector<double> steps_after;
};

/// Checks the |det| >= delta_det precondition. Throws InvariantError.
void require_spanning(const DirectionSet& ds, double delta_det);

/// One full cycle: slot 0 along the lead (default d_{n-1}), slots 1..n-1
/// along d_0..d_{n-2}, slot n along d_{n-1} again.
RspState rsp_cycle(RspState state, Measurer& m, const AlgorithmConfig& cfg, CycleSummary* summary = nullptr);

struct StopRule {
  std::size_t max_cycles = 1000;
  double phi_threshold = 0.0;  // stop once phi < this
  std::size_t max_evaluations = 1'000'000;
};

enum class StopReason { max_cycles, phi_threshold, max_evaluations };
std::string to_string(StopReason reason);

struct RspRun {
  RspState state;
  std::vector<IterateRecord> log;
  std::vector<CycleSummary> cycles;
  StopReason reason = StopReason::max_cycles;
  std::size_t evaluations = 0;
};

RspRun run(const ObjectiveFunction& f, RspState init, const AlgorithmConfig& cfg, const StopRule& stop,
           NoiseModel* noise = nullptr, bool keep_log = true);

/// Start state with uniform steps and phi, z measured on first use.
RspState make_rsp_state(Vector x0, std::vector<Vector> directions, double step, double phi);

// ---------------------------------------------------------------------------
// Exact line search reference
// ---------------------------------------------------------------------------

/// argmin_t q(x0 + t d) = -grad q(x0).d / d'Hd. Throws DomainError when
/// d'Hd <= 0.
double exact_line_search(const Quadratic& q, const Vector& x0, const Vector& d);

struct ExactCycle {
  std::vector<Vector> directions_before;
  Vector candidate;
  bool accepted = false;
  /// |cand' H d_i| / (||cand|| ||H d_i||) for the retained directions that
  /// the construction makes conjugate, indexed like directions_before.
  std::vector<std::pair<std::size_t, double>> conjugacy;
};

struct ExactTrace {
  std::vector<Vector> points;  // after each line minimization
  std::vector<ExactCycle> cycles;
};

/// The cycle structure of rsp_cycle with every line minimization exact.
ExactTrace run_exact(const Quadratic& q, const Vector& x0, std::vector<Vector> directions, double delta_det,
                     std::size_t max_line_minimizations);

}  // namespace hrsp
