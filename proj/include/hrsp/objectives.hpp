#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hrsp/core.hpp"

namespace hrsp {

/// f(x) = 1/2 (x - center)^T H (x - center) + offset, H symmetric.
struct Quadratic {
  Matrix hessian;
  Vector center;
  double offset = 0.0;

  double value(const Vector& x) const;
  Vector gradient(const Vector& x) const;
};

/// An objective known to the algorithm only through evaluations.
///
/// `gradient`, `known_minimizers`, `known_min_value` and `quadratic` are
/// diagnostics for tests, noise adversaries and summaries. The search code
/// never reads them.
struct ObjectiveFunction {
  std::string name;
  std::size_t dimension = 0;
  std::function<double(const Vector&)> evaluate;
  std::function<Vector(const Vector&)> gradient;
  std::vector<Vector> known_minimizers;
  std::optional<double> known_min_value;
  std::optional<Quadratic> quadratic;

  double operator()(const Vector& x) const { return evaluate(x); }

  /// Distance to the nearest registered minimizer, if any are registered.
  std::optional<double> distance_to_minimizer(const Vector& x) const;
};

ObjectiveFunction make_quadratic(std::string name, Quadratic q);
/// ||x||^2
ObjectiveFunction make_sphere(std::size_t n);
/// x1^2 + 5 x2^2
ObjectiveFunction make_axis_quadratic();
/// (1 - x1)^2 + 10 (x2 - x1^2)^2
ObjectiveFunction make_rosenbrock();
/// 1/2 (x - c)^T H (x - c), H = Q diag(eig) Q^T with eigenvalues in
/// [eig_lo, eig_hi] and c in [-1, 1]^n, drawn from `seed`.
ObjectiveFunction make_random_spd_quadratic(std::size_t n, std::uint64_t seed,
                                            double eig_lo = 0.5, double eig_hi = 10.0);
ObjectiveFunction make_constant(std::size_t n, double value);

/// Registry lookup parameters.
struct ObjectiveParams {
  std::size_t dimension = 2;
  std::uint64_t seed = 0;
  double value = 0.0;

  bool operator==(const ObjectiveParams&) const = default;
};

/// Names: "sphere", "quadratic" (x1^2 + 5 x2^2), "rosenbrock",
/// "random_spd_quadratic", "constant". Throws ConfigError for unknown names
/// or an unsupported dimension.
ObjectiveFunction make_objective(const std::string& name, const ObjectiveParams& params);
std::vector<std::string> objective_names();

}  // namespace hrsp
