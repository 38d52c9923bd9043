#include "hrsp/noise.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hrsp {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

bool adversarial(NoiseKind k) {
  return k == NoiseKind::adversarial_jam || k == NoiseKind::adversarial_drag;
}

std::vector<NoisePhase> phases_of(const NoiseSpec& spec) {
  if (spec.schedule.empty()) return {{0, spec.kind}};
  return spec.schedule;
}

}  // namespace

std::string to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::zero: return "zero";
    case NoiseKind::bounded_random: return "bounded_random";
    case NoiseKind::adversarial_jam: return "adversarial_jam";
    case NoiseKind::adversarial_drag: return "adversarial_drag";
  }
  return "zero";
}

NoiseKind noise_kind_from_string(const std::string& name) {
  if (name == "zero") return NoiseKind::zero;
  if (name == "bounded_random") return NoiseKind::bounded_random;
  if (name == "adversarial_jam") return NoiseKind::adversarial_jam;
  if (name == "adversarial_drag") return NoiseKind::adversarial_drag;
  throw ConfigError("unknown noise kind '" + name +
                    "'; known: zero bounded_random adversarial_jam adversarial_drag");
}

void validate_noise(const NoiseSpec& spec) {
  std::vector<std::string> details;
  if (!(spec.bound >= 0.0) || !std::isfinite(spec.bound)) details.push_back("noise bound must be finite and >= 0");
  const auto phases = phases_of(spec);
  if (phases.front().start != 0) details.push_back("noise schedule must start at index 0");
  for (std::size_t i = 1; i < phases.size(); ++i) {
    if (phases[i].start <= phases[i - 1].start) {
      details.push_back("noise schedule start indices must be strictly increasing");
      break;
    }
  }
  const bool needs_bounds = std::any_of(phases.begin(), phases.end(),
                                        [](const NoisePhase& p) { return adversarial(p.kind); });
  if (needs_bounds) {
    if (!spec.adversary) {
      details.push_back("adversarial noise needs gradient and direction bounds");
    } else if (!(spec.adversary->gradient_bound >= 0.0) || !(spec.adversary->direction_bound >= 0.0) ||
               !std::isfinite(spec.adversary->gradient_bound) ||
               !std::isfinite(spec.adversary->direction_bound)) {
      details.push_back("adversary bounds must be finite and >= 0");
    }
  }
  if (details.empty()) return;
  std::string msg = "invalid noise configuration:";
  for (const auto& d : details) msg += " " + d + ";";
  throw ConfigError(msg, details);
}

NoiseModel::NoiseModel() : phases_{{0, NoiseKind::zero}} {}

NoiseModel::NoiseModel(NoiseSpec spec, double theta)
    : spec_(std::move(spec)), theta_(theta), gen_(spec_.seed) {
  validate_noise(spec_);
  phases_ = phases_of(spec_);
}

NoiseKind NoiseModel::kind_at(std::size_t k) const {
  NoiseKind kind = phases_.front().kind;
  for (const auto& p : phases_) {
    if (p.start <= k) kind = p.kind;
  }
  return kind;
}

double adversary_increment(const AdversaryBounds& b, double delta, double previous) {
  const double margin = 8.0 * kEps * (1.0 + b.value_scale + std::abs(previous));
  return b.gradient_bound * delta * b.direction_bound + rho(delta) + margin;
}

double NoiseModel::sample(std::size_t k, double delta) {
  if (k != next_) {
    throw InvariantError("noise samples must be drawn in order: expected index " +
                         std::to_string(next_) + ", got " + std::to_string(k));
  }
  ++next_;
  while (phase_ + 1 < phases_.size() && phases_[phase_ + 1].start <= k) {
    ++phase_;
    accumulated_ = 0.0;
    jam_active_ = false;
  }
  double n = 0.0;
  switch (phases_[phase_].kind) {
    case NoiseKind::zero:
      break;
    case NoiseKind::bounded_random: {
      const double u = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
      n = spec_.bound * (2.0 * u - 1.0);
      break;
    }
    case NoiseKind::adversarial_jam: {
      if (!jam_active_) {
        const auto& b = *spec_.adversary;
        const double lead = (b.gradient_bound * delta * b.direction_bound + rho(delta)) / (1.0 - theta_);
        if (lead < spec_.bound) {
          jam_active_ = true;
          if (!activation_) activation_ = k;
        }
      }
      if (jam_active_) {
        accumulated_ += adversary_increment(*spec_.adversary, delta, accumulated_);
        n = accumulated_;
      }
      break;
    }
    case NoiseKind::adversarial_drag: {
      if (k != phases_[phase_].start) accumulated_ -= adversary_increment(*spec_.adversary, delta, accumulated_);
      n = accumulated_;
      break;
    }
  }
  max_abs_ = std::max(max_abs_, std::abs(n));
  return n;
}

RhoValue robustness_bound(double lambda_s, double phi_floor) {
  const RhoValue r = rho_checked(lambda_s * phi_floor);
  return {r.value / 2.0, r.underflow};
}

AdversaryBounds estimate_adversary_bounds(const ObjectiveFunction& f, const Vector& x0,
                                          const std::vector<Vector>& directions,
                                          std::optional<double> level) {
  const auto n = x0.size();
  if (n == 0) throw ShapeError("empty starting point");
  const double lvl = level.value_or(f(x0));
  const auto per_dim = static_cast<long>(
      std::clamp(std::floor(std::pow(2.0e5, 1.0 / static_cast<double>(n))), 3.0, 101.0));

  // Visits every grid point of the box center +- half.
  auto for_grid = [&](const Vector& center, const Vector& half, auto&& visit) {
    std::vector<long> idx(static_cast<std::size_t>(n), 0);
    Vector p(n);
    while (true) {
      bool on_face = false;
      for (Eigen::Index i = 0; i < n; ++i) {
        const long ii = idx[static_cast<std::size_t>(i)];
        p[i] = center[i] - half[i] + 2.0 * half[i] * static_cast<double>(ii) / static_cast<double>(per_dim - 1);
        on_face = on_face || ii == 0 || ii == per_dim - 1;
      }
      visit(p, on_face);
      Eigen::Index d = 0;
      while (d < n && ++idx[static_cast<std::size_t>(d)] == per_dim) idx[static_cast<std::size_t>(d++)] = 0;
      if (d == n) break;
    }
  };

  double radius = std::max(1.0, x0.norm());
  Vector lo = x0, hi = x0;
  for (int attempt = 0; attempt < 30; ++attempt, radius *= 2.0) {
    bool touches = false;
    lo = x0;
    hi = x0;
    for_grid(x0, Vector::Constant(n, radius), [&](const Vector& p, bool on_face) {
      if (f(p) <= lvl) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
        touches = touches || on_face;
      }
    });
    if (!touches) break;
  }
  // Pad by one grid cell so the set is enclosed between grid lines.
  const double cell = 2.0 * radius / static_cast<double>(per_dim - 1);
  lo.array() -= cell;
  hi.array() += cell;

  const Vector center = 0.5 * (lo + hi);
  const Vector half = 0.5 * (hi - lo);
  AdversaryBounds b;
  for_grid(center, half, [&](const Vector& p, bool) {
    double g = 0.0;
    if (f.gradient) {
      g = f.gradient(p).norm();
    } else {
      Vector grad(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        const double h = 1e-6 * std::max(1.0, std::abs(p[i]));
        Vector a = p, c = p;
        a[i] += h;
        c[i] -= h;
        grad[i] = (f(a) - f(c)) / (2.0 * h);
      }
      g = grad.norm();
    }
    b.gradient_bound = std::max(b.gradient_bound, g);
    b.value_scale = std::max(b.value_scale, std::abs(f(p)));
  });
  // Grid maxima can sit slightly below the true supremum.
  b.gradient_bound *= 1.1;
  double dmax = (hi - lo).norm();
  for (const auto& d : directions) dmax = std::max(dmax, d.norm());
  b.direction_bound = dmax;
  return b;
}

}  // namespace hrsp
