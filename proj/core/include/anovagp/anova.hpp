#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <memory>
#include <vector>

#include <Eigen/Core>

#include "anovagp/anova_index.hpp"
#include "anovagp/errors.hpp"
#include "anovagp/quadrature.hpp"
#include "anovagp/sim_cache.hpp"
#include "anovagp/simulator.hpp"

namespace anovagp {

/// Reference input c at which off-index coordinates are frozen.
struct AnchorPoint {
  Eigen::VectorXd c;

  /// Mean of the input distribution.
  static AnchorPoint mean_of(const InputSpace& inputs) { return {inputs.mean()}; }
};

/// Term values u_t on the quadrature grid of t. `values` is d x |Xi_t|.
struct TermDataset {
  AnovaIndex index;
  TensorQuadrature grid;
  Eigen::MatrixXd values;
};

/// Outcome of the adaptive selection.
struct IndexSelection {
  /// selected[i] = J_i, sorted by index_order. selected[0] == {{}}.
  std::vector<std::vector<AnovaIndex>> selected;
  /// candidates[i] = |hat J_i| for i >= 1; candidates[0] == 1.
  std::vector<std::size_t> candidate_counts;
  /// gamma_t for every scored candidate.
  std::map<AnovaIndex, double, IndexLess> weights;

  /// J, all orders, in index_order (starts with the empty index).
  std::vector<AnovaIndex> all() const;
  std::size_t size() const;
  std::size_t selected_count(std::size_t order) const {
    return order < selected.size() ? selected[order].size() : 0;
  }
  std::size_t candidate_count(std::size_t order) const {
    return order < candidate_counts.size() ? candidate_counts[order] : 0;
  }
  bool contains(const AnovaIndex& t) const;
};

/// Which terms form the contribution-weight denominator.
enum class WeightDenominator {
  /// Every term accepted so far, including earlier ones of the current order.
  Running,
  /// Only terms of order strictly below |t|.
  PreviousOrders,
};

struct DecomposeOptions {
  double tol_index = 1e-4;
  std::size_t nodes_per_dim = 5;
  std::size_t max_order = 4;
  WeightDenominator denominator = WeightDenominator::Running;
  /// Worker threads used to evaluate candidate term means within an order.
  std::size_t threads = 1;
};

struct Decomposition {
  AnchorPoint anchor;
  Eigen::VectorXd anchor_output;
  IndexSelection selection;
  /// Theta_t for every selected nonempty t.
  std::map<AnovaIndex, TermDataset, IndexLess> datasets;
};

struct TermMean {
  Eigen::VectorXd mean;
  TermDataset dataset;
};

/// xi^{c,t}: coordinates in t from `xi_t`, all others from the anchor.
Eigen::VectorXd embed(const Eigen::VectorXd& xi_t, const AnovaIndex& t,
                      const AnchorPoint& anchor);

/// u_t(xi_t) = u(xi^{c,t}) - sum_{w proper subset of t} u_w(xi_w), evaluated
/// in the equivalent closed form sum_{w subset t} (-1)^{|t|-|w|} u(xi^{c,w}).
Eigen::VectorXd term_value(const AnovaIndex& t, const Eigen::VectorXd& xi_t,
                           const AnchorPoint& anchor, SimCache& cache);

/// Clenshaw-Curtis rule for coordinate i of the input space.
QuadratureRule1D coordinate_rule(const InputSpace& inputs, std::size_t coord,
                                 std::size_t nodes_per_dim);

/// Quadrature estimate of E[u_t] together with the grid data it consumed.
TermMean term_mean(const AnovaIndex& t, const AnchorPoint& anchor, SimCache& cache,
                   std::size_t nodes_per_dim);

/// gamma_t = norm(mean_t) / norm(accumulated). Throws DegenerateReferenceError
/// if the denominator is zero.
double contribution_weight(const Eigen::VectorXd& mean_t,
                           const Eigen::VectorXd& accumulated, const Simulator& sim);

/// Order-(i+1) indices whose every order-i subset is in `selected_order_i`,
/// sorted by index_order. `input_dim` bounds the coordinates.
std::vector<AnovaIndex> admissible_candidates(const std::vector<AnovaIndex>& selected_order_i,
                                              std::size_t input_dim);

/// Simulator failure during selection; carries the selection reached so far.
class DecompositionError : public Error {
 public:
  DecompositionError(const std::string& what, IndexSelection partial, Eigen::VectorXd point)
      : Error(what), partial_(std::move(partial)), point_(std::move(point)) {}

  const IndexSelection& partial() const { return partial_; }
  const Eigen::VectorXd& point() const { return point_; }

 private:
  IndexSelection partial_;
  Eigen::VectorXd point_;
};

/// Adaptive anchored ANOVA index selection. Simulator calls go through `cache`.
Decomposition adaptive_decompose(SimCache& cache, const AnchorPoint& anchor,
                                 const DecomposeOptions& options);

}  // namespace anovagp
