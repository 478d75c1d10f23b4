#include "anovagp/pca.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

namespace anovagp {
namespace {

constexpr double kRelativeRankGuard = 1e-12;
// Variance below (kRoundoff * largest |y|)^2 is indistinguishable from zero.
constexpr double kRoundoff = 1e-14;

struct Eigenpairs {
  Eigen::VectorXd values;   // descending, clipped and rank-guarded
  Eigen::MatrixXd vectors;  // d x K, matching values
};

bool use_gram(PcaMethod method, Eigen::Index d, Eigen::Index n) {
  switch (method) {
    case PcaMethod::Gram: return true;
    case PcaMethod::Covariance: return false;
    case PcaMethod::Automatic: break;
  }
  return d > n;
}

Eigenpairs decompose(const Eigen::MatrixXd& centered, double scale, PcaMethod method,
                     bool want_vectors) {
  const Eigen::Index d = centered.rows();
  const Eigen::Index n = centered.cols();
  const double inv_n = 1.0 / static_cast<double>(n);
  const bool gram = use_gram(method, d, n);

  Eigen::MatrixXd small = gram ? Eigen::MatrixXd(centered.transpose() * centered * inv_n)
                               : Eigen::MatrixXd(centered * centered.transpose() * inv_n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      small, want_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw std::runtime_error("fit_pca: eigensolver failed");

  const Eigen::Index k = std::min(d, n);
  const Eigen::Index size = small.rows();
  Eigenpairs out;
  out.values.resize(k);
  for (Eigen::Index j = 0; j < k; ++j) out.values(j) = std::max(0.0, solver.eigenvalues()(size - 1 - j));

  const double lambda_1 = k > 0 ? out.values(0) : 0.0;
  const double floor = std::max(kRelativeRankGuard * lambda_1, (kRoundoff * scale) * (kRoundoff * scale));
  for (Eigen::Index j = 0; j < k; ++j) {
    if (out.values(j) <= floor) out.values(j) = 0.0;
  }

  if (want_vectors) {
    out.vectors.resize(d, k);
    for (Eigen::Index j = 0; j < k; ++j) {
      const Eigen::VectorXd u = solver.eigenvectors().col(size - 1 - j);
      if (!gram) {
        out.vectors.col(j) = u;
      } else if (out.values(j) > 0.0) {
        Eigen::VectorXd v = centered * u;
        out.vectors.col(j) = v / v.norm();
      } else {
        out.vectors.col(j).setZero();
      }
    }
  }
  return out;
}

}  // namespace

Eigen::VectorXd pca_spectrum(const Eigen::MatrixXd& samples, PcaMethod method) {
  if (samples.cols() == 0 || samples.rows() == 0) {
    throw std::invalid_argument("pca_spectrum: empty dataset");
  }
  const Eigen::VectorXd mean = samples.rowwise().mean();
  const Eigen::MatrixXd centered = samples.colwise() - mean;
  return decompose(centered, samples.cwiseAbs().maxCoeff(), method, false).values;
}

PcaFit fit_pca(const Eigen::MatrixXd& samples, double tol, PcaMethod method) {
  if (samples.cols() == 0) throw std::invalid_argument("fit_pca: dataset has no samples");
  if (samples.rows() == 0) throw std::invalid_argument("fit_pca: samples have dimension 0");
  if (!(tol > 0.0 && tol < 1.0)) throw std::invalid_argument("fit_pca: tol must lie in (0, 1)");

  PcaFit fit;
  PcaModel& model = fit.model;
  model.mean = samples.rowwise().mean();
  const Eigen::MatrixXd centered = samples.colwise() - model.mean;
  const Eigenpairs pairs = decompose(centered, samples.cwiseAbs().maxCoeff(), method, true);

  model.total_variance = pairs.values.sum();
  Eigen::Index rank = 0;
  if (model.total_variance > 0.0) {
    double retained = 0.0;
    while (rank < pairs.values.size()) {
      retained += pairs.values(rank);
      ++rank;
      if (retained / model.total_variance > 1.0 - tol) break;
    }
  }

  model.eigenvalues = pairs.values.head(rank);
  model.components = pairs.vectors.leftCols(rank);
  for (Eigen::Index r = 0; r < rank; ++r) {
    Eigen::Index largest = 0;
    model.components.col(r).cwiseAbs().maxCoeff(&largest);
    if (model.components(largest, r) < 0.0) model.components.col(r) *= -1.0;
  }
  fit.targets = centered.transpose() * model.components;
  return fit;
}

Eigen::VectorXd project(const PcaModel& model, const Eigen::VectorXd& y) {
  if (y.size() != model.mean.size()) throw std::invalid_argument("project: dimension mismatch");
  return model.components.transpose() * (y - model.mean);
}

Eigen::VectorXd reconstruct(const PcaModel& model, const Eigen::VectorXd& alpha) {
  if (alpha.size() != model.components.cols()) {
    throw std::invalid_argument("reconstruct: expected " + std::to_string(model.components.cols()) +
                                " coefficients, got " + std::to_string(alpha.size()));
  }
  return model.components * alpha + model.mean;
}

}  // namespace anovagp
