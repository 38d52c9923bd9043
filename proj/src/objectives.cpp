#include "hrsp/objectives.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace hrsp {

double Quadratic::value(const Vector& x) const {
  const Vector r = x - center;
  return 0.5 * r.dot(hessian * r) + offset;
}

Vector Quadratic::gradient(const Vector& x) const { return hessian * (x - center); }

std::optional<double> ObjectiveFunction::distance_to_minimizer(const Vector& x) const {
  if (known_minimizers.empty()) return std::nullopt;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& m : known_minimizers) best = std::min(best, (x - m).norm());
  return best;
}

ObjectiveFunction make_quadratic(std::string name, Quadratic q) {
  ObjectiveFunction f;
  f.name = std::move(name);
  f.dimension = static_cast<std::size_t>(q.center.size());
  f.evaluate = [q](const Vector& x) { return q.value(x); };
  f.gradient = [q](const Vector& x) { return q.gradient(x); };
  f.known_minimizers = {q.center};
  f.known_min_value = q.offset;
  f.quadratic = std::move(q);
  return f;
}

ObjectiveFunction make_sphere(std::size_t n) {
  const auto dim = static_cast<Eigen::Index>(n);
  return make_quadratic("sphere", {2.0 * Matrix::Identity(dim, dim), Vector::Zero(dim), 0.0});
}

ObjectiveFunction make_axis_quadratic() {
  Matrix h = Matrix::Zero(2, 2);
  h(0, 0) = 2.0;
  h(1, 1) = 10.0;
  return make_quadratic("quadratic", {h, Vector::Zero(2), 0.0});
}

ObjectiveFunction make_rosenbrock() {
  ObjectiveFunction f;
  f.name = "rosenbrock";
  f.dimension = 2;
  f.evaluate = [](const Vector& x) {
    const double a = 1.0 - x[0];
    const double b = x[1] - x[0] * x[0];
    return a * a + 10.0 * b * b;
  };
  f.gradient = [](const Vector& x) {
    const double b = x[1] - x[0] * x[0];
    Vector g(2);
    g[0] = -2.0 * (1.0 - x[0]) - 40.0 * x[0] * b;
    g[1] = 20.0 * b;
    return g;
  };
  f.known_minimizers = {Vector::Ones(2)};
  f.known_min_value = 0.0;
  return f;
}

ObjectiveFunction make_random_spd_quadratic(std::size_t n, std::uint64_t seed, double eig_lo,
                                            double eig_hi) {
  const auto dim = static_cast<Eigen::Index>(n);
  std::mt19937_64 gen(seed);
  // Portable uniform draws: top 53 bits of the engine output.
  auto uniform = [&gen]() { return static_cast<double>(gen() >> 11) * 0x1.0p-53; };
  auto gaussian = [&uniform]() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  };

  Matrix a(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) a(i, j) = gaussian();
  const Matrix q = Eigen::HouseholderQR<Matrix>(a).householderQ();
  Vector eig(dim);
  for (Eigen::Index i = 0; i < dim; ++i) eig[i] = eig_lo + (eig_hi - eig_lo) * uniform();
  Matrix h = q * eig.asDiagonal() * q.transpose();
  h = 0.5 * (h + h.transpose()).eval();
  Vector c(dim);
  for (Eigen::Index i = 0; i < dim; ++i) c[i] = 2.0 * uniform() - 1.0;
  return make_quadratic("random_spd_quadratic", {h, c, 0.0});
}

ObjectiveFunction make_constant(std::size_t n, double value) {
  ObjectiveFunction f;
  f.name = "constant";
  f.dimension = n;
  f.evaluate = [value](const Vector&) { return value; };
  f.gradient = [n](const Vector&) { return Vector::Zero(static_cast<Eigen::Index>(n)); };
  f.known_min_value = value;
  return f;
}

ObjectiveFunction make_objective(const std::string& name, const ObjectiveParams& params) {
  auto need_dim = [&](std::size_t want) {
    if (params.dimension != want) {
      throw ConfigError("objective '" + name + "' is defined for dimension " +
                        std::to_string(want) + ", got " + std::to_string(params.dimension));
    }
  };
  if (params.dimension == 0) throw ConfigError("objective dimension must be >= 1");
  if (name == "sphere") return make_sphere(params.dimension);
  if (name == "quadratic") {
    need_dim(2);
    return make_axis_quadratic();
  }
  if (name == "rosenbrock") {
    need_dim(2);
    return make_rosenbrock();
  }
  if (name == "random_spd_quadratic") return make_random_spd_quadratic(params.dimension, params.seed);
  if (name == "constant") return make_constant(params.dimension, params.value);
  std::string known;
  for (const auto& n : objective_names()) known += " " + n;
  throw ConfigError("unknown objective '" + name + "'; known:" + known);
}

std::vector<std::string> objective_names() {
  return {"sphere", "quadratic", "rosenbrock", "random_spd_quadratic", "constant"};
}

}  // namespace hrsp
