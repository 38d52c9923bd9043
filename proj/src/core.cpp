#include "hrsp/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace hrsp {

namespace {

constexpr double kE = std::numbers::e;
// e^(1/e) - e, the offset that makes the two branches meet at D = e.
const double kUpperOffset = std::exp(1.0 / kE) - kE;

void require_nonnegative(double delta) {
  if (std::isnan(delta) || delta < 0.0) {
    std::ostringstream os;
    os << "rho: step size must be >= 0, got " << delta;
    throw DomainError(os.str());
  }
}

}  // namespace

RhoValue rho_checked(double delta) {
  require_nonnegative(delta);
  if (delta == 0.0) return {0.0, false};
  if (delta > kE) return {delta + kUpperOffset, false};
  const double v = std::exp(std::log(delta) / delta);
  if (v < std::numeric_limits<double>::min()) return {0.0, true};
  return {v, false};
}

double rho(double delta) { return rho_checked(delta).value; }

double log_rho(double delta) {
  require_nonnegative(delta);
  if (delta == 0.0) return -std::numeric_limits<double>::infinity();
  if (delta > kE) return std::log(delta + kUpperOffset);
  return std::log(delta) / delta;
}

void DirectionSet::check_shape() const {
  const std::size_t n = directions.size();
  if (n == 0) throw ShapeError("direction set is empty");
  if (steps.size() != n) {
    throw ShapeError("direction set has " + std::to_string(n) + " directions but " +
                     std::to_string(steps.size()) + " step sizes");
  }
  for (const auto& d : directions) {
    if (static_cast<std::size_t>(d.size()) != n) {
      throw ShapeError("direction of dimension " + std::to_string(d.size()) +
                       " in a set of " + std::to_string(n));
    }
  }
}

double DirectionSet::min_step() const { return *std::min_element(steps.begin(), steps.end()); }
double DirectionSet::max_step() const { return *std::max_element(steps.begin(), steps.end()); }

double determinant_of_rows(std::span<const Vector> rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  if (n == 0) throw ShapeError("determinant of an empty matrix");
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (rows[i].size() != n) {
      throw ShapeError("row " + std::to_string(i) + " has dimension " +
                       std::to_string(rows[i].size()) + ", expected " + std::to_string(n));
    }
    m.row(i) = rows[i].transpose();
  }
  return Eigen::PartialPivLU<Matrix>(m).determinant();
}

double direction_determinant(const DirectionSet& ds) {
  if (ds.directions.empty()) throw ShapeError("direction set is empty");
  return determinant_of_rows(ds.directions);
}

double candidate_determinant(std::span<const Vector> trailing, const Vector& candidate) {
  std::vector<Vector> rows(trailing.begin(), trailing.end());
  rows.push_back(candidate);
  return determinant_of_rows(rows);
}

std::vector<Vector> rotated_directions(std::size_t n, double angle) {
  std::vector<Vector> dirs(n, Vector::Zero(static_cast<Eigen::Index>(n)));
  for (std::size_t i = 0; i < n; ++i) dirs[i][static_cast<Eigen::Index>(i)] = 1.0;
  if (n >= 2) {
    const double c = std::cos(angle), s = std::sin(angle);
    dirs[0][0] = c;
    dirs[0][1] = s;
    dirs[1][0] = -s;
    dirs[1][1] = c;
  }
  return dirs;
}

DirectionSet uniform_direction_set(std::vector<Vector> directions, double step) {
  DirectionSet ds;
  ds.steps.assign(directions.size(), step);
  ds.directions = std::move(directions);
  return ds;
}

std::vector<ConfigViolation> validate_config(const AlgorithmConfig& cfg) {
  std::vector<ConfigViolation> out;
  auto check = [&](bool ok, const char* name, std::initializer_list<std::pair<const char*, double>> vals) {
    if (ok) return;
    std::ostringstream os;
    bool first = true;
    for (const auto& [k, v] : vals) {
      os << (first ? "" : ", ") << k << "=" << v;
      first = false;
    }
    out.push_back({name, os.str()});
  };
  // NaN fails every comparison below, so it is reported as a violation.
  check(cfg.lambda_s > 0.0 && cfg.lambda_s < 1.0, "0 < lambda_s < 1", {{"lambda_s", cfg.lambda_s}});
  check(cfg.lambda_t > 1.0, "lambda_t > 1", {{"lambda_t", cfg.lambda_t}});
  check(cfg.mu > 0.0, "mu > 0", {{"mu", cfg.mu}});
  check(cfg.mu * cfg.lambda_t < 1.0, "mu·lambda_t < 1", {{"mu", cfg.mu}, {"lambda_t", cfg.lambda_t}});
  check(cfg.gamma >= 1.0, "gamma ≥ 1", {{"gamma", cfg.gamma}});
  check(cfg.theta > 0.0 && cfg.theta < 1.0, "theta ∈ (0,1)", {{"theta", cfg.theta}});
  check(cfg.delta_det > 0.0, "delta_det > 0", {{"delta_det", cfg.delta_det}});
  check(cfg.tau_star > 0.0 && std::isfinite(cfg.tau_star), "tau_star > 0", {{"tau_star", cfg.tau_star}});
  check(cfg.phi_min >= 0.0 && std::isfinite(cfg.phi_min), "phi_min ≥ 0", {{"phi_min", cfg.phi_min}});
  return out;
}

void require_valid(const AlgorithmConfig& cfg) {
  const auto violations = validate_config(cfg);
  if (violations.empty()) return;
  std::vector<std::string> details;
  std::string msg = "invalid algorithm configuration:";
  for (const auto& v : violations) {
    details.push_back(v.name + " (" + v.detail + ")");
    msg += " " + details.back() + ";";
  }
  throw ConfigError(msg, std::move(details));
}

}  // namespace hrsp
