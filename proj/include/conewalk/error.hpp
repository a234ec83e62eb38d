#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

namespace conewalk {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A matrix expected to lie in the PSD cone has an eigenvalue below the
/// membership band.
class NotInConeError : public Error {
 public:
  NotInConeError(const std::string& what, double lambda_min)
      : Error(what), lambda_min_(lambda_min) {}
  double lambda_min() const noexcept { return lambda_min_; }

 private:
  double lambda_min_;
};

/// The matrix is numerically on the boundary of the cone (not invertible).
class SingularError : public Error {
 public:
  SingularError(const std::string& what, double lambda_min)
      : Error(what), lambda_min_(lambda_min) {}
  double lambda_min() const noexcept { return lambda_min_; }

 private:
  double lambda_min_;
};

/// Coefficients were requested at a state outside the open cone.
class NotInteriorError : public Error {
 public:
  NotInteriorError(const std::string& what, double lambda_min)
      : Error(what), lambda_min_(lambda_min) {}
  double lambda_min() const noexcept { return lambda_min_; }

 private:
  double lambda_min_;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, Eigen::MatrixXd input)
      : Error(what), input_(std::move(input)) {}
  const Eigen::MatrixXd& input() const noexcept { return input_; }

 private:
  Eigen::MatrixXd input_;
};

class InvalidMarkError : public Error {
 public:
  using Error::Error;
};

/// Failure while advancing a path; carries the base step index.
class SimulationError : public Error {
 public:
  SimulationError(const std::string& what, std::size_t step)
      : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

class GridMismatchError : public Error {
 public:
  using Error::Error;
};

}  // namespace conewalk
