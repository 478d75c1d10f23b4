#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Cholesky>

namespace anovagp {

/// Noisy squared-exponential kernel parameters, stored as logarithms:
///   k(x, x') = s * exp(-sum_i (x_i - x'_i)^2 / (2 l_i)) + j * delta(x, x')
/// with l_i the squared correlation lengths, s = rho_1^2 and j = rho_2^2.
/// A jitter of exactly zero is encoded as log_jitter_var = -infinity.
struct Hyperparameters {
  Eigen::VectorXd log_sq_lengths;
  double log_signal_var = 0.0;
  double log_jitter_var = 0.0;

  std::size_t input_dim() const { return static_cast<std::size_t>(log_sq_lengths.size()); }
  double signal_var() const;
  double jitter_var() const;

  /// Packed as [log l_1..log l_M, log s, log j].
  Eigen::VectorXd pack() const;
  static Hyperparameters unpack(const Eigen::VectorXd& packed);
};

/// k(x, x2) including the jitter term when x and x2 are equal coordinate-wise.
double kernel(const Eigen::VectorXd& x, const Eigen::VectorXd& x2,
              const Hyperparameters& hyper);

/// Covariance of the training rows; jitter only on the diagonal.
Eigen::MatrixXd covariance_matrix(const Eigen::MatrixXd& inputs,
                                  const Hyperparameters& hyper);

/// Negative log marginal likelihood. Throws IllConditionedKernelError when
/// the covariance does not factorize.
double nlml(const Hyperparameters& hyper, const Eigen::MatrixXd& inputs,
            const Eigen::VectorXd& targets);

struct NlmlWithGradient {
  double value = 0.0;
  /// Derivatives w.r.t. the packed log-hyperparameters. The jitter entry is
  /// zero when the jitter is exactly zero.
  Eigen::VectorXd gradient;
};

NlmlWithGradient nlml_gradient(const Hyperparameters& hyper,
                               const Eigen::MatrixXd& inputs,
                               const Eigen::VectorXd& targets);

struct GpTrainOptions {
  std::size_t restarts = 5;
  std::size_t max_iters = 200;
  /// Lower bound on rho_2^2 relative to the target variance. Zero pins the
  /// jitter at exactly zero and removes it from the optimization.
  double jitter_floor = 1e-10;
  std::uint64_t seed = 0;
  /// Extra random restarts used on top of a warm start.
  std::size_t warm_restarts = 1;
};

struct Prediction {
  double mean = 0.0;
  double variance = 0.0;
  /// The raw variance came out negative and was clamped to zero.
  bool clamped = false;
};

/// Trained exact GP. Immutable; prediction is thread-safe.
class GpModel {
 public:
  /// Factorizes the covariance for fixed hyperparameters. Throws
  /// IllConditionedKernelError on failure.
  GpModel(Eigen::MatrixXd inputs, Eigen::VectorXd targets, Hyperparameters hyper);

  const Eigen::MatrixXd& inputs() const { return inputs_; }
  const Eigen::VectorXd& targets() const { return targets_; }
  const Hyperparameters& hyper() const { return hyper_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  double nlml() const { return nlml_; }
  std::size_t size() const { return static_cast<std::size_t>(targets_.size()); }
  std::size_t input_dim() const { return static_cast<std::size_t>(inputs_.cols()); }

  /// Predictive mean and variance; the variance is clamped at zero.
  Prediction predict(const Eigen::VectorXd& x) const;
  /// Row-wise predictions for the rows of `points`.
  std::vector<Prediction> predict(const Eigen::MatrixXd& points) const;
  double predict_mean(const Eigen::VectorXd& x) const;

  /// Prior variance k(x, x) at a fresh point.
  double prior_variance() const { return hyper_.signal_var() + hyper_.jitter_var(); }

 private:
  Eigen::MatrixXd inputs_;
  Eigen::VectorXd targets_;
  Hyperparameters hyper_;
  Eigen::LLT<Eigen::MatrixXd> chol_;
  Eigen::VectorXd weights_;
  double nlml_ = 0.0;
};

struct GpTrainReport {
  /// NLML at each restart's starting point (+infinity when not factorizable).
  std::vector<double> initial_nlml;
  std::vector<double> final_nlml;
  std::size_t best_restart = 0;
};

/// Minimizes the NLML over the log-hyperparameters with box-projected L-BFGS
/// from several starting points and keeps the best. With `warm_start`, the
/// first start is the given point followed by `warm_restarts` random ones.
/// Throws TrainingFailedError when no start can be factorized.
GpModel train_gp(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                 const GpTrainOptions& options,
                 const std::optional<Hyperparameters>& warm_start = std::nullopt,
                 GpTrainReport* report = nullptr);

}  // namespace anovagp
