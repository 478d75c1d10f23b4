#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "anovagp/simulator.hpp"

namespace anovagp {

enum class LinearSolver { Direct, ConjugateGradient };

/// -div(a grad u) = 1 on (-1,1)^2 with u = 0 on the boundary, discretized by
/// bilinear elements on a uniform grid. The coefficient is constant on each
/// cell of a k x k partition of the square.
///
/// Nodes are numbered with x1 varying fastest: node (i, j) -> i + j*(n+1).
/// Subdomains likewise: cell (p, q) -> p + q*k.
struct DiffusionProblem {
  std::size_t elements_per_side = 64;
  std::size_t subdomains_per_side = 6;
  LinearSolver solver = LinearSolver::Direct;
  double cg_tolerance = 1e-12;

  std::size_t nodes_per_side() const { return elements_per_side + 1; }
  std::size_t num_nodes() const { return nodes_per_side() * nodes_per_side(); }
  std::size_t num_subdomains() const {
    return subdomains_per_side * subdomains_per_side;
  }
};

class DiffusionSimulator final : public Simulator {
 public:
  /// Input coefficients live in [0.01, 1]. Throws std::invalid_argument when an
  /// element centroid lies on a subdomain boundary.
  explicit DiffusionSimulator(DiffusionProblem problem);

  std::string name() const override { return "diffusion"; }
  const InputSpace& inputs() const override { return inputs_; }
  std::size_t output_dim() const override { return problem_.num_nodes(); }

  /// Nodal solution including the zero boundary values.
  Eigen::VectorXd evaluate(const Eigen::VectorXd& xi) const override;

  /// sqrt(U^T M U) with the consistent Q1 mass matrix.
  double output_norm(const Eigen::VectorXd& u) const override;

  const DiffusionProblem& problem() const { return problem_; }
  /// Subdomain of every element, element (ex, ey) at ex + ey*n.
  const std::vector<std::size_t>& element_subdomains() const { return element_subdomain_; }
  const Eigen::SparseMatrix<double>& mass_matrix() const { return mass_; }

  /// Stiffness matrix restricted to interior nodes for the given coefficients.
  Eigen::SparseMatrix<double> interior_stiffness(const Eigen::VectorXd& xi) const;

 private:
  DiffusionProblem problem_;
  InputSpace inputs_;
  std::vector<std::size_t> element_subdomain_;
  std::vector<std::ptrdiff_t> interior_of_node_;  // -1 on the boundary
  std::vector<std::size_t> interior_nodes_;
  Eigen::SparseMatrix<double> mass_;
  Eigen::VectorXd interior_load_;
};

}  // namespace anovagp
