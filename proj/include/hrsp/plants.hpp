#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "hrsp/core.hpp"

namespace hrsp {

enum class PlantKind {
  exact,       // displacement applied algebraically at the end of the period
  point_mass,  // x' = u
  dubins       // x1' = V cos(zeta), x2' = V sin(zeta), zeta' = u
};

std::string to_string(PlantKind kind);
/// Throws ConfigError for unknown names.
PlantKind plant_kind_from_string(const std::string& name);

struct PlantModel {
  PlantKind kind = PlantKind::point_mass;
  double speed_cap = 10.0;      // Dubins: largest forward speed, units/s
  double turn_rate_max = 40.0;  // Dubins: saturated turn rate, rad/s
  std::size_t substeps = 100;   // RK4 steps per timer period

  bool operator==(const PlantModel&) const = default;
};

/// Throws ConfigError unless speed_cap, turn_rate_max > 0 and substeps >= 1.
void validate_plant(const PlantModel& plant);

struct PlantState {
  Vector x;
  Vector zeta;  // empty, or (heading) for Dubins

  bool operator==(const PlantState&) const = default;
};

/// Piece of a control schedule with constant inputs.
struct ControlSegment {
  double duration = 0.0;
  Vector velocity;         // point-mass input u
  double speed = 0.0;      // Dubins forward speed
  double turn_rate = 0.0;  // Dubins turn input
};

struct ControlSchedule {
  std::vector<ControlSegment> segments;
  Vector displacement;  // the requested target; the exact plant applies it verbatim
  double duration() const;
};

struct SteerResult {
  ControlSchedule schedule;
  PlantState predicted;  // end state of the ideal schedule
};

/// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

/// Plans inputs that move x by `target` in exactly tau_star seconds.
/// Point-mass: constant u = target / tau_star. Dubins: turn in place at the
/// saturated rate toward the target bearing, then drive straight at the
/// speed that arrives at t = tau_star. A zero target holds still.
/// Throws SteeringError when the turn alone takes tau_star or longer, or the
/// straight leg would exceed speed_cap.
SteerResult steer(const PlantModel& plant, const PlantState& xi, const Vector& target, double tau_star);

struct Trajectory {
  std::vector<double> t;  // relative to the start of the period
  std::vector<PlantState> states;
};

/// Fixed-step RK4 over each segment, with max(1, ceil(N * duration / tau_star))
/// steps per segment. Returns every step. Throws IntegrationError on a
/// non-finite state.
Trajectory integrate(const PlantModel& plant, const PlantState& xi, const ControlSchedule& schedule,
                     double tau_star);

/// Dimension of zeta for the plant kind.
std::size_t auxiliary_dimension(PlantKind kind);
/// Throws ShapeError when xi does not fit the plant (Dubins needs n = 2).
void check_plant_state(const PlantModel& plant, const PlantState& xi);

}  // namespace hrsp
