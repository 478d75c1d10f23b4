#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "anovagp/anova_index.hpp"

namespace anovagp {

struct Interval {
  double lo = -1.0;
  double hi = 1.0;

  double length() const { return hi - lo; }
  double midpoint() const { return 0.5 * (lo + hi); }
  bool contains(double x) const { return x >= lo && x <= hi; }
};

/// A one-dimensional rule: ascending nodes in `interval` and positive weights
/// summing to the interval length.
struct QuadratureRule1D {
  std::vector<double> nodes;
  std::vector<double> weights;
  Interval interval;

  std::size_t size() const { return nodes.size(); }
};

/// Tensor product of 1-D rules over the coordinates of an ANOVA index.
/// Row k of `points` holds the k-th node tuple; tuples are enumerated
/// lexicographically with the first coordinate varying slowest.
struct TensorQuadrature {
  AnovaIndex index;
  Eigen::MatrixXd points;   // |Xi_t| x |t|
  Eigen::VectorXd weights;  // |Xi_t|

  std::size_t size() const { return static_cast<std::size_t>(weights.size()); }
};

/// Clenshaw-Curtis (Chebyshev extrema) nodes on [-1, 1], ascending.
/// n == 1 gives the midpoint.
std::vector<double> cc_nodes(std::size_t n);

/// Weights making the n-point rule exact for polynomials of degree <= n-1.
/// Obtained from the moment equations in the Chebyshev basis.
std::vector<double> cc_weights(std::size_t n);

/// Clenshaw-Curtis rule on [-1, 1].
QuadratureRule1D cc_rule(std::size_t n);

/// Affine transport of a rule to [target.lo, target.hi].
QuadratureRule1D map_rule(const QuadratureRule1D& rule, const Interval& target);

/// `per_dim_rules[k]` is the rule for coordinate t[k].
TensorQuadrature tensor_grid(const AnovaIndex& t,
                             std::span<const QuadratureRule1D> per_dim_rules);

/// Sum_k values.col(k) * density[k] * w_k. `values` is d x |Xi_t|.
Eigen::VectorXd weighted_mean(const Eigen::MatrixXd& values,
                              const TensorQuadrature& grid,
                              const Eigen::VectorXd& density);

}  // namespace anovagp
