#pragma once

#include <cstddef>

#include <Eigen/Core>

namespace anovagp {

/// Truncated principal-component basis of one output space.
struct PcaModel {
  Eigen::VectorXd mean;         // d
  Eigen::MatrixXd components;   // d x R, orthonormal columns
  Eigen::VectorXd eigenvalues;  // R, descending
  double total_variance = 0.0;  // sum of all eigenvalues of the sample covariance

  std::size_t rank() const { return static_cast<std::size_t>(components.cols()); }
  std::size_t output_dim() const { return static_cast<std::size_t>(mean.size()); }
};

struct PcaFit {
  PcaModel model;
  /// targets(j, r) = v_r^T (y_j - mean). N x R.
  Eigen::MatrixXd targets;
};

enum class PcaMethod {
  /// Gram matrix when d > N, covariance matrix otherwise.
  Automatic,
  /// Eigenvectors of the N x N matrix Y^T Y / N lifted back through Y.
  Gram,
  /// Eigenvectors of the d x d covariance.
  Covariance,
};

/// Snapshot PCA of the columns of `samples` (d x N). Keeps the smallest R whose
/// leading eigenvalues explain more than 1 - tol of the variance; a dataset
/// with zero variance gives R = 0. Eigenvalues below 1e-12 * lambda_1 are
/// dropped, and each component is signed so its largest-magnitude entry is
/// positive.
PcaFit fit_pca(const Eigen::MatrixXd& samples, double tol,
               PcaMethod method = PcaMethod::Automatic);

/// Full nonnegative spectrum of the sample covariance, descending, length
/// min(d, N). Exposed for diagnostics and cross-checks.
Eigen::VectorXd pca_spectrum(const Eigen::MatrixXd& samples,
                             PcaMethod method = PcaMethod::Automatic);

/// V^T (y - mean).
Eigen::VectorXd project(const PcaModel& model, const Eigen::VectorXd& y);

/// V alpha + mean.
Eigen::VectorXd reconstruct(const PcaModel& model, const Eigen::VectorXd& alpha);

}  // namespace anovagp
