#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include <Eigen/Core>

#include "anovagp/anova.hpp"
#include "anovagp/gp.hpp"
#include "anovagp/pca.hpp"

namespace anovagp {

/// PCA basis plus one GP per retained mode, for one ANOVA term.
struct LocalGpEmulator {
  AnovaIndex index;
  PcaModel pca;
  std::vector<GpModel> mode_gps;
  Eigen::MatrixXd train_inputs;   // N x |t|
  Eigen::MatrixXd train_outputs;  // d x N, term values u_t
  /// Number of leading training rows that came from the quadrature grid.
  std::size_t initial_size = 0;

  std::size_t rank() const { return pca.rank(); }
  std::size_t training_size() const { return static_cast<std::size_t>(train_inputs.rows()); }
};

struct LocalTrainOptions {
  std::size_t n_train = 30;
  std::size_t pool_size = 1000;
  double tol_pca = 1e-2;
  GpTrainOptions gp;
  std::uint64_t seed = 0;
};

/// State handed to the observer just before each active selection.
struct ActiveStep {
  const LocalGpEmulator& current;
  /// Candidates still in the pool, one per row.
  const Eigen::MatrixXd& pool;
  /// Row of `pool` that is about to be added.
  std::size_t chosen;
  double chosen_indicator;
};

using ActiveObserver = std::function<void(const ActiveStep&)>;

/// Fits PCA and per-mode GPs to a term's data (no active training).
LocalGpEmulator fit_local(const AnovaIndex& t, Eigen::MatrixXd inputs,
                          Eigen::MatrixXd outputs, double tol_pca,
                          const GpTrainOptions& gp_options,
                          const LocalGpEmulator* warm = nullptr);

/// tau(xi_t) = sum_r lambda_r v'_r(xi_t) / sum_r lambda_r. Throws
/// UndefinedIndicatorError when the term has no retained modes.
double variance_indicator(const LocalGpEmulator& local, const Eigen::VectorXd& xi_t);

/// Indicator for every row of `points`.
Eigen::VectorXd variance_indicator(const LocalGpEmulator& local, const Eigen::MatrixXd& points);

/// Candidate pool for a term: `size` uniform draws of xi_t avoiding the grid nodes.
Eigen::MatrixXd candidate_pool(const AnovaIndex& t, const InputSpace& inputs,
                               const TensorQuadrature& grid, std::size_t size,
                               std::uint64_t seed);

/// Local GP modeling with active training. Starts from the quadrature data of
/// `dataset` and adds pool points of maximal variance indicator one at a
/// time, refitting after each, until n_train points are used. New term
/// values are computed through `cache`.
LocalGpEmulator train_local(const TermDataset& dataset, const AnchorPoint& anchor,
                            SimCache& cache, const LocalTrainOptions& options,
                            const ActiveObserver& observer = {});

/// V_t m'(xi_t) + mu_t.
Eigen::VectorXd predict_local_mean(const LocalGpEmulator& local, const Eigen::VectorXd& xi_t);

/// Per-component aggregate sum_r V_t(:, r)^2 v'_r(xi_t).
Eigen::VectorXd predict_local_variance(const LocalGpEmulator& local, const Eigen::VectorXd& xi_t);

/// u(c) plus one local emulator per selected nonempty index.
class AnovaGpEmulator {
 public:
  AnovaGpEmulator() = default;
  /// Throws std::invalid_argument unless the local keys are exactly the
  /// nonempty selected indices.
  AnovaGpEmulator(IndexSelection selection, AnchorPoint anchor, Eigen::VectorXd anchor_output,
                  std::map<AnovaIndex, LocalGpEmulator, IndexLess> locals);

  const IndexSelection& selection() const { return selection_; }
  const AnchorPoint& anchor() const { return anchor_; }
  const Eigen::VectorXd& anchor_output() const { return anchor_output_; }
  const std::map<AnovaIndex, LocalGpEmulator, IndexLess>& locals() const { return locals_; }
  std::size_t input_dim() const { return static_cast<std::size_t>(anchor_.c.size()); }
  std::size_t output_dim() const { return static_cast<std::size_t>(anchor_output_.size()); }

  /// u(c) + sum_t mean of the local emulator at xi_t.
  Eigen::VectorXd predict_mean(const Eigen::VectorXd& xi) const;
  /// Diagnostic only: sum of local per-component variances, treating terms as
  /// independent.
  Eigen::VectorXd predict_variance(const Eigen::VectorXd& xi) const;

 private:
  IndexSelection selection_;
  AnchorPoint anchor_;
  Eigen::VectorXd anchor_output_;
  std::map<AnovaIndex, LocalGpEmulator, IndexLess> locals_;
};

/// Throws std::invalid_argument if a selected nonempty index has no local.
AnovaGpEmulator assemble(const IndexSelection& selection, const AnchorPoint& anchor,
                         Eigen::VectorXd anchor_output,
                         std::map<AnovaIndex, LocalGpEmulator, IndexLess> locals);

struct AnovaGpOptions {
  DecomposeOptions decompose;
  LocalTrainOptions local;
  std::size_t threads = 1;
};

struct AnovaGpBuild {
  Decomposition decomposition;
  AnovaGpEmulator emulator;
};

/// Trains a local emulator for every dataset of the decomposition. Pool and
/// GP seeds are derived per index from `options`, so results do not depend
/// on the thread count.
std::map<AnovaIndex, LocalGpEmulator, IndexLess> train_locals(
    const Decomposition& decomposition, SimCache& cache, const LocalTrainOptions& options,
    std::size_t threads);

/// Decompose, train every local emulator, assemble.
AnovaGpBuild build_anova_gp(SimCache& cache, const AnchorPoint& anchor,
                            const AnovaGpOptions& options);

/// PCA over raw outputs with GPs over the full input.
struct SgpEmulator {
  PcaModel pca;
  std::vector<GpModel> mode_gps;
  Eigen::MatrixXd train_inputs;  // N x m

  std::size_t rank() const { return pca.rank(); }
  Eigen::VectorXd predict_mean(const Eigen::VectorXd& xi) const;
};

struct SgpOptions {
  std::size_t n_train = 100;
  double tol_pca = 1e-2;
  GpTrainOptions gp;
  std::uint64_t seed = 0;
};

/// Standard GP baseline on `n_train` i.i.d. uniform inputs.
SgpEmulator train_sgp(const Simulator& sim, const SgpOptions& options);

/// Fits the baseline to given inputs (N x m) and outputs (d x N).
SgpEmulator fit_sgp(Eigen::MatrixXd inputs, const Eigen::MatrixXd& outputs, double tol_pca,
                    const GpTrainOptions& gp_options);

/// Matched budget N_train * (|J| - 1).
std::size_t matched_sgp_budget(std::size_t n_train, const IndexSelection& selection);

}  // namespace anovagp
