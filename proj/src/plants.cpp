#include "hrsp/plants.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace hrsp {

namespace {

constexpr double kPi = std::numbers::pi;

void require_finite(const PlantState& s) {
  if (!s.x.allFinite() || !s.zeta.allFinite()) {
    std::ostringstream os;
    os << "plant state became non-finite: x = " << s.x.transpose();
    throw IntegrationError(os.str());
  }
}

// Derivative of (x1, x2, zeta) under constant speed and turn rate.
Eigen::Vector3d dubins_rhs(const Eigen::Vector3d& s, double speed, double turn) {
  return {speed * std::cos(s[2]), speed * std::sin(s[2]), turn};
}

}  // namespace

std::string to_string(PlantKind kind) {
  switch (kind) {
    case PlantKind::exact: return "exact";
    case PlantKind::point_mass: return "point_mass";
    case PlantKind::dubins: return "dubins";
  }
  return "point_mass";
}

PlantKind plant_kind_from_string(const std::string& name) {
  if (name == "exact") return PlantKind::exact;
  if (name == "point_mass") return PlantKind::point_mass;
  if (name == "dubins") return PlantKind::dubins;
  throw ConfigError("unknown plant kind '" + name + "'; known: exact point_mass dubins");
}

void validate_plant(const PlantModel& plant) {
  std::vector<std::string> details;
  if (!(plant.speed_cap > 0.0) || !std::isfinite(plant.speed_cap)) details.push_back("speed_cap must be > 0");
  if (!(plant.turn_rate_max > 0.0) || !std::isfinite(plant.turn_rate_max)) {
    details.push_back("turn_rate_max must be > 0");
  }
  if (plant.substeps < 1) details.push_back("substeps must be >= 1");
  if (details.empty()) return;
  std::string msg = "invalid plant:";
  for (const auto& d : details) msg += " " + d + ";";
  throw ConfigError(msg, details);
}

double ControlSchedule::duration() const {
  double t = 0.0;
  for (const auto& s : segments) t += s.duration;
  return t;
}

double wrap_angle(double a) {
  double w = std::remainder(a, 2.0 * kPi);
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

std::size_t auxiliary_dimension(PlantKind kind) { return kind == PlantKind::dubins ? 1 : 0; }

void check_plant_state(const PlantModel& plant, const PlantState& xi) {
  const auto aux = static_cast<Eigen::Index>(auxiliary_dimension(plant.kind));
  if (xi.zeta.size() != aux) {
    throw ShapeError(to_string(plant.kind) + " plant needs " + std::to_string(aux) + " auxiliary states, got " +
                     std::to_string(xi.zeta.size()));
  }
  if (plant.kind == PlantKind::dubins && xi.x.size() != 2) {
    throw ShapeError("dubins plant moves in the plane; got dimension " + std::to_string(xi.x.size()));
  }
}

SteerResult steer(const PlantModel& plant, const PlantState& xi, const Vector& target, double tau_star) {
  check_plant_state(plant, xi);
  if (target.size() != xi.x.size()) throw ShapeError("steer: target and position differ in dimension");
  if (!target.allFinite()) throw SteeringError("steer: target displacement is not finite");
  if (!(tau_star > 0.0)) throw SteeringError("steer: tau_star must be > 0");

  SteerResult out;
  out.schedule.displacement = target;
  out.predicted = xi;
  out.predicted.x = xi.x + target;

  if (plant.kind != PlantKind::dubins) {
    ControlSegment seg;
    seg.duration = tau_star;
    seg.velocity = target / tau_star;
    out.schedule.segments.push_back(seg);
    return out;
  }

  const double dist = target.norm();
  if (dist == 0.0) {
    ControlSegment hold;
    hold.duration = tau_star;
    out.schedule.segments.push_back(hold);
    return out;
  }
  const double bearing = std::atan2(target[1], target[0]);
  const double turn = wrap_angle(bearing - xi.zeta[0]);
  const double t_turn = std::abs(turn) / plant.turn_rate_max;
  if (t_turn >= tau_star) {
    std::ostringstream os;
    os << "dubins: turning " << turn << " rad at " << plant.turn_rate_max << " rad/s takes " << t_turn
       << " s, not less than tau_star = " << tau_star << " s; raise turn_rate_max or tau_star";
    throw SteeringError(os.str());
  }
  const double speed = dist / (tau_star - t_turn);
  if (speed > plant.speed_cap) {
    std::ostringstream os;
    os << "dubins: covering " << dist << " in " << (tau_star - t_turn) << " s needs speed " << speed
       << " > speed_cap = " << plant.speed_cap << "; raise speed_cap or tau_star";
    throw SteeringError(os.str());
  }
  if (t_turn > 0.0) {
    ControlSegment rot;
    rot.duration = t_turn;
    rot.turn_rate = turn > 0.0 ? plant.turn_rate_max : -plant.turn_rate_max;
    out.schedule.segments.push_back(rot);
  }
  ControlSegment run;
  run.duration = tau_star - t_turn;
  run.speed = speed;
  out.schedule.segments.push_back(run);
  out.predicted.zeta[0] = wrap_angle(xi.zeta[0] + turn);
  return out;
}

Trajectory integrate(const PlantModel& plant, const PlantState& xi, const ControlSchedule& schedule,
                     double tau_star) {
  check_plant_state(plant, xi);
  Trajectory tr;
  tr.t.push_back(0.0);
  tr.states.push_back(xi);
  double t0 = 0.0;

  if (plant.kind == PlantKind::exact) {
    const Vector disp = schedule.displacement.size() == xi.x.size() ? schedule.displacement
                                                                    : Vector::Zero(xi.x.size());
    const std::size_t n = plant.substeps;
    for (std::size_t i = 1; i <= n; ++i) {
      PlantState s = xi;
      s.x = i == n ? Vector(xi.x + disp) : Vector(xi.x + (static_cast<double>(i) / static_cast<double>(n)) * disp);
      tr.t.push_back(tau_star * static_cast<double>(i) / static_cast<double>(n));
      tr.states.push_back(std::move(s));
    }
    require_finite(tr.states.back());
    return tr;
  }

  for (const auto& seg : schedule.segments) {
    const auto steps = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(static_cast<double>(plant.substeps) * seg.duration / tau_star)));
    const double h = seg.duration / static_cast<double>(steps);
    for (std::size_t i = 1; i <= steps; ++i) {
      PlantState s = tr.states.back();
      if (plant.kind == PlantKind::point_mass) {
        // x' = u is constant, so the RK4 stages coincide.
        s.x = s.x + h * seg.velocity;
      } else {
        const Eigen::Vector3d y(s.x[0], s.x[1], s.zeta[0]);
        const Eigen::Vector3d k1 = dubins_rhs(y, seg.speed, seg.turn_rate);
        const Eigen::Vector3d k2 = dubins_rhs(y + 0.5 * h * k1, seg.speed, seg.turn_rate);
        const Eigen::Vector3d k3 = dubins_rhs(y + 0.5 * h * k2, seg.speed, seg.turn_rate);
        const Eigen::Vector3d k4 = dubins_rhs(y + h * k3, seg.speed, seg.turn_rate);
        const Eigen::Vector3d next = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        s.x[0] = next[0];
        s.x[1] = next[1];
        s.zeta[0] = wrap_angle(next[2]);
      }
      require_finite(s);
      tr.t.push_back(t0 + h * static_cast<double>(i));
      tr.states.push_back(std::move(s));
    }
    t0 += seg.duration;
  }
  return tr;
}

}  // namespace hrsp
