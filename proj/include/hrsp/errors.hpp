#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace hrsp {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Vector or matrix dimensions do not agree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A configuration (algorithm, noise, experiment) failed validation.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what, std::vector<std::string> details = {})
      : Error(what), details_(std::move(details)) {}
  const std::vector<std::string>& details() const { return details_; }

 private:
  std::vector<std::string> details_;
};

/// An algorithm precondition or internal invariant does not hold.
class InvariantError : public Error {
 public:
  using Error::Error;
};

/// The objective returned a non-finite value.
class EvaluationError : public Error {
 public:
  EvaluationError(const std::string& what, Eigen::VectorXd point)
      : Error(what), point_(std::move(point)) {}
  const Eigen::VectorXd& point() const { return point_; }

 private:
  Eigen::VectorXd point_;
};

/// No jump case matches the controller state.
class AutomatonError : public Error {
 public:
  using Error::Error;
};

/// Flow requested past the timer period, or a jump requested before it.
class SchedulingError : public Error {
 public:
  using Error::Error;
};

/// The plant cannot realize the requested displacement in one period.
class SteeringError : public Error {
 public:
  using Error::Error;
};

/// Plant integration produced a non-finite state.
class IntegrationError : public Error {
 public:
  using Error::Error;
};

}  // namespace hrsp
