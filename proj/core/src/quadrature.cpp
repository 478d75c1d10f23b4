#include "anovagp/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>

namespace anovagp {

std::vector<double> cc_nodes(std::size_t n) {
  if (n == 0) throw std::invalid_argument("cc_nodes: n must be >= 1");
  if (n == 1) return {0.0};
  std::vector<double> x(n);
  const double step = std::numbers::pi / static_cast<double>(n - 1);
  for (std::size_t j = 0; j < n; ++j) {
    x[j] = -std::cos(static_cast<double>(j) * step);
  }
  // Exact symmetry about the origin; the middle node of an odd rule is 0.
  for (std::size_t j = 0; j < n / 2; ++j) {
    x[n - 1 - j] = -x[j];
  }
  if (n % 2 == 1) x[n / 2] = 0.0;
  x.front() = -1.0;
  x.back() = 1.0;
  return x;
}

std::vector<double> cc_weights(std::size_t n) {
  if (n == 0) throw std::invalid_argument("cc_weights: n must be >= 1");
  const std::vector<double> x = cc_nodes(n);
  const auto size = static_cast<Eigen::Index>(n);

  // Row k: T_k evaluated at the nodes; rhs: integral of T_k over [-1, 1].
  Eigen::MatrixXd system(size, size);
  Eigen::VectorXd moments(size);
  for (Eigen::Index j = 0; j < size; ++j) {
    double t_prev = 1.0;
    double t_curr = x[static_cast<std::size_t>(j)];
    system(0, j) = 1.0;
    if (size > 1) system(1, j) = t_curr;
    for (Eigen::Index k = 2; k < size; ++k) {
      const double t_next = 2.0 * x[static_cast<std::size_t>(j)] * t_curr - t_prev;
      system(k, j) = t_next;
      t_prev = t_curr;
      t_curr = t_next;
    }
  }
  for (Eigen::Index k = 0; k < size; ++k) {
    moments(k) = (k % 2 == 1) ? 0.0 : 2.0 / (1.0 - static_cast<double>(k * k));
  }
  const Eigen::VectorXd w = system.fullPivLu().solve(moments);

  std::vector<double> weights(n);
  for (std::size_t j = 0; j < n; ++j) weights[j] = w(static_cast<Eigen::Index>(j));
  for (std::size_t j = 0; j < n / 2; ++j) {
    const double sym = 0.5 * (weights[j] + weights[n - 1 - j]);
    weights[j] = sym;
    weights[n - 1 - j] = sym;
  }
  return weights;
}

QuadratureRule1D cc_rule(std::size_t n) {
  return QuadratureRule1D{cc_nodes(n), cc_weights(n), Interval{-1.0, 1.0}};
}

QuadratureRule1D map_rule(const QuadratureRule1D& rule, const Interval& target) {
  if (!(target.lo < target.hi)) {
    throw std::invalid_argument("map_rule: target interval must satisfy a < b");
  }
  const Interval& src = rule.interval;
  if (src.lo == target.lo && src.hi == target.hi) return rule;

  const double scale = target.length() / src.length();
  const double src_mid = src.midpoint();
  const double dst_mid = target.midpoint();
  QuadratureRule1D out;
  out.interval = target;
  out.nodes.reserve(rule.size());
  out.weights.reserve(rule.size());
  for (std::size_t j = 0; j < rule.size(); ++j) {
    // Written about the midpoints so a centre node maps exactly onto the centre.
    double y = dst_mid + scale * (rule.nodes[j] - src_mid);
    if (rule.nodes[j] == src.lo) y = target.lo;
    if (rule.nodes[j] == src.hi) y = target.hi;
    out.nodes.push_back(y);
    out.weights.push_back(rule.weights[j] * scale);
  }
  return out;
}

TensorQuadrature tensor_grid(const AnovaIndex& t,
                             std::span<const QuadratureRule1D> per_dim_rules) {
  if (t.empty()) throw std::invalid_argument("tensor_grid: empty index");
  if (per_dim_rules.size() != t.order()) {
    throw std::invalid_argument("tensor_grid: need one rule per coordinate of t");
  }
  const std::size_t dims = t.order();
  std::size_t total = 1;
  for (const auto& r : per_dim_rules) {
    if (r.size() == 0) throw std::invalid_argument("tensor_grid: empty 1-D rule");
    total *= r.size();
  }

  TensorQuadrature grid;
  grid.index = t;
  grid.points.resize(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(dims));
  grid.weights.resize(static_cast<Eigen::Index>(total));

  std::vector<std::size_t> digit(dims, 0);
  for (std::size_t k = 0; k < total; ++k) {
    double w = 1.0;
    for (std::size_t d = 0; d < dims; ++d) {
      grid.points(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(d)) =
          per_dim_rules[d].nodes[digit[d]];
      w *= per_dim_rules[d].weights[digit[d]];
    }
    grid.weights(static_cast<Eigen::Index>(k)) = w;
    // Odometer with the last coordinate varying fastest.
    for (std::size_t d = dims; d-- > 0;) {
      if (++digit[d] < per_dim_rules[d].size()) break;
      digit[d] = 0;
    }
  }
  return grid;
}

Eigen::VectorXd weighted_mean(const Eigen::MatrixXd& values, const TensorQuadrature& grid,
                              const Eigen::VectorXd& density) {
  if (values.cols() != grid.weights.size() || density.size() != grid.weights.size()) {
    throw std::invalid_argument("weighted_mean: values, density and grid sizes differ");
  }
  const Eigen::VectorXd scaled = density.cwiseProduct(grid.weights);
  return values * scaled;
}

}  // namespace anovagp
