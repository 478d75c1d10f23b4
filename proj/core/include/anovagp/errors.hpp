#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace anovagp {

/// Base class for every library-specific failure.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when the accumulated-mean norm used as the contribution-weight
/// denominator is zero.
class DegenerateReferenceError : public Error {
 public:
  using Error::Error;
};

/// Cholesky factorization of a GP covariance matrix failed.
class IllConditionedKernelError : public Error {
 public:
  using Error::Error;
};

/// Every optimizer restart failed to produce a factorizable covariance.
class TrainingFailedError : public Error {
 public:
  using Error::Error;
};

/// The variance indicator needs at least one retained PCA mode.
class UndefinedIndicatorError : public Error {
 public:
  using Error::Error;
};

/// Linear solve inside a simulator failed.
class SolverError : public Error {
 public:
  using Error::Error;
};

/// A simulator evaluation failed; carries the embedded input that was requested.
class SimulatorError : public Error {
 public:
  SimulatorError(const std::string& what, Eigen::VectorXd point)
      : Error(what), point_(std::move(point)) {}

  const Eigen::VectorXd& point() const { return point_; }

 private:
  Eigen::VectorXd point_;
};

/// Invalid experiment configuration. Message lists every validation problem.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace anovagp
