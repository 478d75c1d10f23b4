#include "anovagp/diffusion.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include "anovagp/errors.hpp"

namespace anovagp {
namespace {

// Bilinear element matrices on a square, local nodes counter-clockwise from
// the lower-left corner. The Laplace stiffness is independent of h in 2-D.
constexpr std::array<std::array<double, 4>, 4> kUnitStiffness = {{
    {4.0 / 6.0, -1.0 / 6.0, -2.0 / 6.0, -1.0 / 6.0},
    {-1.0 / 6.0, 4.0 / 6.0, -1.0 / 6.0, -2.0 / 6.0},
    {-2.0 / 6.0, -1.0 / 6.0, 4.0 / 6.0, -1.0 / 6.0},
    {-1.0 / 6.0, -2.0 / 6.0, -1.0 / 6.0, 4.0 / 6.0},
}};

constexpr std::array<std::array<double, 4>, 4> kMassPattern = {{
    {4.0, 2.0, 1.0, 2.0},
    {2.0, 4.0, 2.0, 1.0},
    {1.0, 2.0, 4.0, 2.0},
    {2.0, 1.0, 2.0, 4.0},
}};

std::array<std::size_t, 4> element_nodes(std::size_t ex, std::size_t ey, std::size_t nps) {
  const std::size_t n0 = ex + ey * nps;
  return {n0, n0 + 1, n0 + 1 + nps, n0 + nps};
}

}  // namespace

DiffusionSimulator::DiffusionSimulator(DiffusionProblem problem)
    : problem_(problem),
      inputs_(problem.num_subdomains(), Interval{0.01, 1.0}) {
  const std::size_t n = problem_.elements_per_side;
  const std::size_t k = problem_.subdomains_per_side;
  if (n == 0 || k == 0) {
    throw std::invalid_argument("DiffusionProblem: element and subdomain counts must be positive");
  }
  if (k > n) {
    throw std::invalid_argument("DiffusionProblem: more subdomains than elements per side");
  }

  // Element centroid at (2e+1)/n - 1 lies in cell floor((2e+1) k / (2n)).
  std::vector<std::size_t> cell_of(n);
  for (std::size_t e = 0; e < n; ++e) {
    const std::size_t num = (2 * e + 1) * k;
    if (num % (2 * n) == 0) {
      throw std::invalid_argument("DiffusionProblem: element centroid " + std::to_string(e) +
                                  " lies on a subdomain boundary (" + std::to_string(n) +
                                  " elements, " + std::to_string(k) + " subdomains per side)");
    }
    cell_of[e] = num / (2 * n);
  }
  element_subdomain_.resize(n * n);
  for (std::size_t ey = 0; ey < n; ++ey) {
    for (std::size_t ex = 0; ex < n; ++ex) {
      element_subdomain_[ex + ey * n] = cell_of[ex] + cell_of[ey] * k;
    }
  }

  const std::size_t nps = problem_.nodes_per_side();
  interior_of_node_.assign(problem_.num_nodes(), -1);
  for (std::size_t j = 1; j + 1 < nps; ++j) {
    for (std::size_t i = 1; i + 1 < nps; ++i) {
      interior_of_node_[i + j * nps] = static_cast<std::ptrdiff_t>(interior_nodes_.size());
      interior_nodes_.push_back(i + j * nps);
    }
  }

  const double h = 2.0 / static_cast<double>(n);
  std::vector<Eigen::Triplet<double>> mass_entries;
  mass_entries.reserve(16 * n * n);
  interior_load_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(interior_nodes_.size()));
  for (std::size_t ey = 0; ey < n; ++ey) {
    for (std::size_t ex = 0; ex < n; ++ex) {
      const auto nodes = element_nodes(ex, ey, nps);
      for (std::size_t a = 0; a < 4; ++a) {
        for (std::size_t b = 0; b < 4; ++b) {
          mass_entries.emplace_back(static_cast<int>(nodes[a]), static_cast<int>(nodes[b]),
                                    kMassPattern[a][b] * h * h / 36.0);
        }
        if (const auto id = interior_of_node_[nodes[a]]; id >= 0) {
          interior_load_(id) += h * h / 4.0;
        }
      }
    }
  }
  const auto d = static_cast<Eigen::Index>(problem_.num_nodes());
  mass_.resize(d, d);
  mass_.setFromTriplets(mass_entries.begin(), mass_entries.end());
}

Eigen::SparseMatrix<double> DiffusionSimulator::interior_stiffness(const Eigen::VectorXd& xi) const {
  const std::size_t n = problem_.elements_per_side;
  const std::size_t nps = problem_.nodes_per_side();
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(16 * n * n);
  for (std::size_t ey = 0; ey < n; ++ey) {
    for (std::size_t ex = 0; ex < n; ++ex) {
      const double a = xi(static_cast<Eigen::Index>(element_subdomain_[ex + ey * n]));
      const auto nodes = element_nodes(ex, ey, nps);
      for (std::size_t r = 0; r < 4; ++r) {
        const auto row = interior_of_node_[nodes[r]];
        if (row < 0) continue;
        for (std::size_t c = 0; c < 4; ++c) {
          const auto col = interior_of_node_[nodes[c]];
          if (col < 0) continue;
          entries.emplace_back(static_cast<int>(row), static_cast<int>(col),
                               a * kUnitStiffness[r][c]);
        }
      }
    }
  }
  const auto size = static_cast<Eigen::Index>(interior_nodes_.size());
  Eigen::SparseMatrix<double> k(size, size);
  k.setFromTriplets(entries.begin(), entries.end());
  return k;
}

Eigen::VectorXd DiffusionSimulator::evaluate(const Eigen::VectorXd& xi) const {
  if (static_cast<std::size_t>(xi.size()) != problem_.num_subdomains()) {
    throw std::invalid_argument("diffusion: expected " + std::to_string(problem_.num_subdomains()) +
                                " coefficients, got " + std::to_string(xi.size()));
  }
  for (Eigen::Index i = 0; i < xi.size(); ++i) {
    if (!(xi(i) > 0.0) || !std::isfinite(xi(i))) {
      throw std::invalid_argument("diffusion: coefficient " + std::to_string(i) +
                                  " must be positive and finite");
    }
  }

  Eigen::VectorXd u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(problem_.num_nodes()));
  if (interior_nodes_.empty()) return u;

  const Eigen::SparseMatrix<double> k = interior_stiffness(xi);
  Eigen::VectorXd interior;
  if (problem_.solver == LinearSolver::Direct) {
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(k);
    if (llt.info() != Eigen::Success) throw SolverError("diffusion: sparse Cholesky failed");
    interior = llt.solve(interior_load_);
  } else {
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg(k);
    cg.setTolerance(problem_.cg_tolerance);
    cg.setMaxIterations(10 * k.rows());
    interior = cg.solve(interior_load_);
    if (cg.info() != Eigen::Success) throw SolverError("diffusion: conjugate gradient did not converge");
  }
  for (std::size_t q = 0; q < interior_nodes_.size(); ++q) {
    u(static_cast<Eigen::Index>(interior_nodes_[q])) = interior(static_cast<Eigen::Index>(q));
  }
  return u;
}

double DiffusionSimulator::output_norm(const Eigen::VectorXd& u) const {
  if (u.size() != mass_.rows()) throw std::invalid_argument("diffusion: norm dimension mismatch");
  return std::sqrt(std::max(0.0, u.dot(mass_ * u)));
}

}  // namespace anovagp
