#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "anovagp/quadrature.hpp"

namespace anovagp {

class Rng;

/// Independent inputs with uniform marginals on per-coordinate intervals.
class InputSpace {
 public:
  InputSpace() = default;
  explicit InputSpace(std::vector<Interval> intervals);
  InputSpace(std::size_t dim, Interval interval)
      : InputSpace(std::vector<Interval>(dim, interval)) {}

  std::size_t dim() const { return intervals_.size(); }
  const Interval& interval(std::size_t i) const { return intervals_.at(i); }
  const std::vector<Interval>& intervals() const { return intervals_; }

  /// Marginal density pi_i(x).
  double marginal_density(std::size_t i, double x) const;
  /// Input mean; the default anchor point.
  Eigen::VectorXd mean() const;
  bool contains(const Eigen::VectorXd& xi) const;

  /// One i.i.d. draw, coordinates sampled in order 0..dim-1.
  Eigen::VectorXd sample(Rng& rng) const;
  /// A draw restricted to the coordinates of `coords` (zero-based).
  Eigen::VectorXd sample(Rng& rng, const std::vector<std::size_t>& coords) const;

 private:
  std::vector<Interval> intervals_;
};

/// A deterministic map from an m-dimensional input to a d-dimensional output.
/// Implementations must be pure and safe to call concurrently.
class Simulator {
 public:
  virtual ~Simulator() = default;

  virtual std::string name() const = 0;
  virtual const InputSpace& inputs() const = 0;
  virtual std::size_t output_dim() const = 0;
  virtual Eigen::VectorXd evaluate(const Eigen::VectorXd& xi) const = 0;

  /// Norm used to score ANOVA terms. Euclidean unless overridden.
  virtual double output_norm(const Eigen::VectorXd& u) const;

  std::size_t input_dim() const { return inputs().dim(); }
};

using SimulatorPtr = std::shared_ptr<const Simulator>;

/// Closed-form simulators with known ANOVA structure, all on [0, 1]^m:
///   "additive"         sum_i (sin(2 xi_i) a_i + xi_i^2 b_i)
///   "rank-one-product" prod_i (1 + xi_i / 2) v
///   "polynomial-mix"   sum_i xi_i a_i + sum_{i<j} (xi_i xi_j + xi_i^2 xi_j^2) b_ij
///   "constant"         a fixed nonzero vector
/// Throws std::invalid_argument for unknown names.
SimulatorPtr analytic_bank(const std::string& name, std::size_t input_dim,
                           std::size_t output_dim);

/// Names accepted by analytic_bank.
const std::vector<std::string>& analytic_bank_names();

}  // namespace anovagp
