#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hrsp/errors.hpp"

namespace hrsp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// ---------------------------------------------------------------------------
// Sufficient-decrease function
// ---------------------------------------------------------------------------

/// Result of evaluating the sufficient-decrease function with underflow
/// reporting. `underflow` is set when the exact value is positive but below
/// the smallest normal double and was therefore returned as 0.
struct RhoValue {
  double value = 0.0;
  bool underflow = false;
};

/// rho(D) = D^(1/D) for 0 < D <= e, D + e^(1/e) - e for D > e, rho(0) = 0.
/// The lower branch is evaluated as exp(ln D / D).
/// Throws DomainError for negative or NaN input.
double rho(double delta);
RhoValue rho_checked(double delta);

/// ln rho(D); -inf at D = 0. Never underflows, so it is the right quantity
/// for comparing tiny margins.
double log_rho(double delta);

// ---------------------------------------------------------------------------
// Directions
// ---------------------------------------------------------------------------

/// Search directions d_0..d_{n-1} with one step size per direction.
struct DirectionSet {
  std::vector<Vector> directions;
  std::vector<double> steps;

  std::size_t size() const { return directions.size(); }
  /// Throws ShapeError unless there are n directions of dimension n and n steps.
  void check_shape() const;
  double min_step() const;
  double max_step() const;

  bool operator==(const DirectionSet&) const = default;
};

/// Determinant of the square matrix whose rows are `rows` (LU, partial pivoting).
double determinant_of_rows(std::span<const Vector> rows);

/// Determinant of the matrix with rows d_0..d_{n-1}.
double direction_determinant(const DirectionSet& ds);

/// Determinant of the matrix with rows trailing..., candidate. This is the
/// quantity compared against delta_det when a new direction is proposed.
double candidate_determinant(std::span<const Vector> trailing, const Vector& candidate);

/// Rows (cos a, sin a), (-sin a, cos a) for n = 2, identity rows otherwise
/// (rotated in the leading plane by `angle` when n > 2).
std::vector<Vector> rotated_directions(std::size_t n, double angle);

DirectionSet uniform_direction_set(std::vector<Vector> directions, double step);

// ---------------------------------------------------------------------------
// Algorithm configuration
// ---------------------------------------------------------------------------

struct AlgorithmConfig {
  double gamma = 1.2;       // step expansion factor on acceptance
  double theta = 0.5;       // per-direction contraction
  double mu = 0.15;         // global contraction on a blocked cycle
  double lambda_s = 0.001;  // lower step box ratio
  double lambda_t = 5.0;    // upper step box ratio
  double delta_det = 0.001; // direction linear-independence threshold
  double tau_star = 0.1;    // timer period, seconds
  double phi_min = 0.0;     // global step floor; 0 selects the nominal algorithm

  bool robust() const { return phi_min > 0.0; }
  bool operator==(const AlgorithmConfig&) const = default;
};

struct ConfigViolation {
  std::string name;    // the violated inequality, e.g. "mu·lambda_t < 1"
  std::string detail;  // offending values
};

/// Every violated parameter inequality, by name. Empty means valid.
std::vector<ConfigViolation> validate_config(const AlgorithmConfig& cfg);

/// Throws ConfigError listing all violations, if any.
void require_valid(const AlgorithmConfig& cfg);

}  // namespace hrsp
