#include "anovagp/emulator.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "anovagp/errors.hpp"
#include "anovagp/rng.hpp"
#include "parallel.hpp"

namespace anovagp {
namespace {

Eigen::VectorXd restrict_to(const Eigen::VectorXd& xi, const AnovaIndex& t) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(t.order()));
  for (std::size_t k = 0; k < t.order(); ++k) {
    out(static_cast<Eigen::Index>(k)) = xi(static_cast<Eigen::Index>(t[k]));
  }
  return out;
}

void check_term_input(const LocalGpEmulator& local, const Eigen::VectorXd& xi_t) {
  if (static_cast<std::size_t>(xi_t.size()) != local.index.order()) {
    throw std::invalid_argument("local emulator " + local.index.to_string() + ": expected " +
                                std::to_string(local.index.order()) + " inputs, got " +
                                std::to_string(xi_t.size()));
  }
}

std::vector<GpModel> train_modes(const Eigen::MatrixXd& inputs, const PcaFit& fit,
                                 const GpTrainOptions& gp_options,
                                 const std::vector<GpModel>* warm) {
  std::vector<GpModel> gps;
  gps.reserve(fit.model.rank());
  for (std::size_t r = 0; r < fit.model.rank(); ++r) {
    GpTrainOptions opts = gp_options;
    opts.seed = derive_seed(gp_options.seed,
                            static_cast<std::uint64_t>(inputs.rows()) * 4096u + r);
    std::optional<Hyperparameters> start;
    if (warm && r < warm->size()) start = (*warm)[r].hyper();
    gps.push_back(train_gp(inputs, fit.targets.col(static_cast<Eigen::Index>(r)), opts, start));
  }
  return gps;
}

}  // namespace

LocalGpEmulator fit_local(const AnovaIndex& t, Eigen::MatrixXd inputs, Eigen::MatrixXd outputs,
                          double tol_pca, const GpTrainOptions& gp_options,
                          const LocalGpEmulator* warm) {
  if (inputs.rows() != outputs.cols()) {
    throw std::invalid_argument("fit_local: inputs and outputs disagree on the sample count");
  }
  LocalGpEmulator local;
  local.index = t;
  PcaFit fit = fit_pca(outputs, tol_pca);
  local.mode_gps = train_modes(inputs, fit, gp_options, warm ? &warm->mode_gps : nullptr);
  local.pca = std::move(fit.model);
  local.train_inputs = std::move(inputs);
  local.train_outputs = std::move(outputs);
  local.initial_size = static_cast<std::size_t>(local.train_inputs.rows());
  return local;
}

double variance_indicator(const LocalGpEmulator& local, const Eigen::VectorXd& xi_t) {
  check_term_input(local, xi_t);
  if (local.rank() == 0) {
    throw UndefinedIndicatorError("variance indicator: term " + local.index.to_string() +
                                  " has no retained PCA modes");
  }
  double weighted = 0.0;
  for (std::size_t r = 0; r < local.rank(); ++r) {
    weighted += local.pca.eigenvalues(static_cast<Eigen::Index>(r)) * local.mode_gps[r].predict(xi_t).variance;
  }
  return weighted / local.pca.eigenvalues.sum();
}

Eigen::VectorXd variance_indicator(const LocalGpEmulator& local, const Eigen::MatrixXd& points) {
  if (static_cast<std::size_t>(points.cols()) != local.index.order()) {
    throw std::invalid_argument("variance indicator: point dimension mismatch");
  }
  if (local.rank() == 0) {
    throw UndefinedIndicatorError("variance indicator: term " + local.index.to_string() +
                                  " has no retained PCA modes");
  }
  Eigen::VectorXd tau = Eigen::VectorXd::Zero(points.rows());
  for (std::size_t r = 0; r < local.rank(); ++r) {
    const double lambda = local.pca.eigenvalues(static_cast<Eigen::Index>(r));
    const auto preds = local.mode_gps[r].predict(points);
    for (Eigen::Index j = 0; j < points.rows(); ++j) {
      tau(j) += lambda * preds[static_cast<std::size_t>(j)].variance;
    }
  }
  return tau / local.pca.eigenvalues.sum();
}

Eigen::MatrixXd candidate_pool(const AnovaIndex& t, const InputSpace& inputs,
                               const TensorQuadrature& grid, std::size_t size,
                               std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd pool(static_cast<Eigen::Index>(size), static_cast<Eigen::Index>(t.order()));
  for (Eigen::Index k = 0; k < pool.rows();) {
    const Eigen::VectorXd x = inputs.sample(rng, t.coords());
    bool on_grid = false;
    for (Eigen::Index g = 0; g < grid.points.rows() && !on_grid; ++g) {
      on_grid = grid.points.row(g) == x.transpose();
    }
    if (on_grid) continue;
    pool.row(k++) = x.transpose();
  }
  return pool;
}

LocalGpEmulator train_local(const TermDataset& dataset, const AnchorPoint& anchor, SimCache& cache,
                            const LocalTrainOptions& options, const ActiveObserver& observer) {
  const AnovaIndex& t = dataset.index;
  if (t.empty()) throw std::invalid_argument("train_local: the empty term is the constant u(c)");
  if (options.n_train < 1) throw std::invalid_argument("train_local: n_train must be >= 1");
  if (dataset.values.cols() != dataset.grid.points.rows()) {
    throw std::invalid_argument("train_local: dataset values do not match its grid");
  }
  const auto initial = static_cast<std::size_t>(dataset.grid.points.rows());
  if (options.n_train <= initial) {
    return fit_local(t, dataset.grid.points, dataset.values, options.tol_pca, options.gp);
  }
  if (options.pool_size <= options.n_train) {
    throw std::invalid_argument("train_local: pool_size must exceed n_train");
  }

  Eigen::MatrixXd pool = candidate_pool(t, cache.simulator().inputs(), dataset.grid,
                                        options.pool_size, options.seed);
  GpTrainOptions refit = options.gp;
  refit.warm_restarts = std::min<std::size_t>(options.gp.warm_restarts, options.gp.restarts);
  GpTrainOptions final_fit = options.gp;
  final_fit.warm_restarts = options.gp.restarts;

  LocalGpEmulator local = fit_local(t, dataset.grid.points, dataset.values, options.tol_pca, options.gp);
  local.initial_size = initial;
  while (local.training_size() < options.n_train && local.rank() > 0) {
    const Eigen::VectorXd tau = variance_indicator(local, pool);
    Eigen::Index best = 0;
    tau.maxCoeff(&best);
    if (observer) observer(ActiveStep{local, pool, static_cast<std::size_t>(best), tau(best)});

    const Eigen::VectorXd xi_star = pool.row(best).transpose();
    const Eigen::VectorXd value = term_value(t, xi_star, anchor, cache);

    Eigen::MatrixXd inputs(local.train_inputs.rows() + 1, local.train_inputs.cols());
    inputs << local.train_inputs, xi_star.transpose();
    Eigen::MatrixXd outputs(local.train_outputs.rows(), local.train_outputs.cols() + 1);
    outputs << local.train_outputs, value;

    // Drop the chosen row, keeping the order of the rest.
    const Eigen::Index tail = pool.rows() - best - 1;
    if (tail > 0) pool.middleRows(best, tail) = pool.bottomRows(tail).eval();
    pool.conservativeResize(pool.rows() - 1, Eigen::NoChange);

    const bool last = static_cast<std::size_t>(inputs.rows()) == options.n_train;
    LocalGpEmulator next = fit_local(t, std::move(inputs), std::move(outputs), options.tol_pca,
                                     last ? final_fit : refit, &local);
    next.initial_size = initial;
    local = std::move(next);
  }
  return local;
}

Eigen::VectorXd predict_local_mean(const LocalGpEmulator& local, const Eigen::VectorXd& xi_t) {
  check_term_input(local, xi_t);
  Eigen::VectorXd alpha(static_cast<Eigen::Index>(local.rank()));
  for (std::size_t r = 0; r < local.rank(); ++r) {
    alpha(static_cast<Eigen::Index>(r)) = local.mode_gps[r].predict_mean(xi_t);
  }
  return reconstruct(local.pca, alpha);
}

Eigen::VectorXd predict_local_variance(const LocalGpEmulator& local, const Eigen::VectorXd& xi_t) {
  check_term_input(local, xi_t);
  Eigen::VectorXd var = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(local.pca.output_dim()));
  for (std::size_t r = 0; r < local.rank(); ++r) {
    const double v = local.mode_gps[r].predict(xi_t).variance;
    var += v * local.pca.components.col(static_cast<Eigen::Index>(r)).array().square().matrix();
  }
  return var;
}

AnovaGpEmulator::AnovaGpEmulator(IndexSelection selection, AnchorPoint anchor,
                                 Eigen::VectorXd anchor_output,
                                 std::map<AnovaIndex, LocalGpEmulator, IndexLess> locals)
    : selection_(std::move(selection)),
      anchor_(std::move(anchor)),
      anchor_output_(std::move(anchor_output)),
      locals_(std::move(locals)) {
  std::size_t nonempty = 0;
  for (const AnovaIndex& t : selection_.all()) {
    if (t.empty()) continue;
    ++nonempty;
    if (!locals_.count(t)) {
      throw std::invalid_argument("assemble: no local emulator for selected index " + t.to_string());
    }
  }
  if (nonempty != locals_.size()) {
    throw std::invalid_argument("assemble: local emulators for indices outside the selection");
  }
  for (const auto& [t, local] : locals_) {
    if (local.pca.output_dim() != static_cast<std::size_t>(anchor_output_.size())) {
      throw std::invalid_argument("assemble: output dimension mismatch for " + t.to_string());
    }
  }
}

Eigen::VectorXd AnovaGpEmulator::predict_mean(const Eigen::VectorXd& xi) const {
  if (static_cast<std::size_t>(xi.size()) != input_dim()) {
    throw std::invalid_argument("AnovaGpEmulator: expected " + std::to_string(input_dim()) +
                                " inputs, got " + std::to_string(xi.size()));
  }
  Eigen::VectorXd u = anchor_output_;
  for (const auto& [t, local] : locals_) u += predict_local_mean(local, restrict_to(xi, t));
  return u;
}

Eigen::VectorXd AnovaGpEmulator::predict_variance(const Eigen::VectorXd& xi) const {
  if (static_cast<std::size_t>(xi.size()) != input_dim()) {
    throw std::invalid_argument("AnovaGpEmulator: input dimension mismatch");
  }
  Eigen::VectorXd v = Eigen::VectorXd::Zero(anchor_output_.size());
  for (const auto& [t, local] : locals_) v += predict_local_variance(local, restrict_to(xi, t));
  return v;
}

AnovaGpEmulator assemble(const IndexSelection& selection, const AnchorPoint& anchor,
                         Eigen::VectorXd anchor_output,
                         std::map<AnovaIndex, LocalGpEmulator, IndexLess> locals) {
  return AnovaGpEmulator(selection, anchor, std::move(anchor_output), std::move(locals));
}

std::map<AnovaIndex, LocalGpEmulator, IndexLess> train_locals(
    const Decomposition& decomposition, SimCache& cache, const LocalTrainOptions& options,
    std::size_t threads) {
  std::vector<const TermDataset*> work;
  for (const auto& [t, data] : decomposition.datasets) work.push_back(&data);
  std::vector<LocalGpEmulator> trained(work.size());
  detail::parallel_for(work.size(), threads, [&](std::size_t k) {
    const std::string tag = work[k]->index.to_string();
    LocalTrainOptions opts = options;
    opts.seed = derive_seed(options.seed, "pool" + tag);
    opts.gp.seed = derive_seed(options.gp.seed, "gp" + tag);
    trained[k] = train_local(*work[k], decomposition.anchor, cache, opts);
  });

  std::map<AnovaIndex, LocalGpEmulator, IndexLess> locals;
  for (auto& local : trained) {
    AnovaIndex t = local.index;
    locals.emplace(std::move(t), std::move(local));
  }
  return locals;
}

AnovaGpBuild build_anova_gp(SimCache& cache, const AnchorPoint& anchor,
                            const AnovaGpOptions& options) {
  AnovaGpBuild build;
  build.decomposition = adaptive_decompose(cache, anchor, options.decompose);
  build.emulator = assemble(build.decomposition.selection, anchor, build.decomposition.anchor_output,
                            train_locals(build.decomposition, cache, options.local, options.threads));
  return build;
}

Eigen::VectorXd SgpEmulator::predict_mean(const Eigen::VectorXd& xi) const {
  if (xi.size() != train_inputs.cols()) throw std::invalid_argument("SgpEmulator: input dimension mismatch");
  Eigen::VectorXd alpha(static_cast<Eigen::Index>(rank()));
  for (std::size_t r = 0; r < rank(); ++r) alpha(static_cast<Eigen::Index>(r)) = mode_gps[r].predict_mean(xi);
  return reconstruct(pca, alpha);
}

SgpEmulator fit_sgp(Eigen::MatrixXd inputs, const Eigen::MatrixXd& outputs, double tol_pca,
                    const GpTrainOptions& gp_options) {
  if (inputs.rows() != outputs.cols()) {
    throw std::invalid_argument("fit_sgp: inputs and outputs disagree on the sample count");
  }
  SgpEmulator sgp;
  PcaFit fit = fit_pca(outputs, tol_pca);
  sgp.mode_gps = train_modes(inputs, fit, gp_options, nullptr);
  sgp.pca = std::move(fit.model);
  sgp.train_inputs = std::move(inputs);
  return sgp;
}

SgpEmulator train_sgp(const Simulator& sim, const SgpOptions& options) {
  if (options.n_train < 1) throw std::invalid_argument("train_sgp: N must be >= 1");
  Rng rng(options.seed);
  const auto n = static_cast<Eigen::Index>(options.n_train);
  Eigen::MatrixXd inputs(n, static_cast<Eigen::Index>(sim.input_dim()));
  Eigen::MatrixXd outputs(static_cast<Eigen::Index>(sim.output_dim()), n);
  for (Eigen::Index j = 0; j < n; ++j) inputs.row(j) = sim.inputs().sample(rng).transpose();
  for (Eigen::Index j = 0; j < n; ++j) {
    const Eigen::VectorXd xi = inputs.row(j).transpose();
    try {
      outputs.col(j) = sim.evaluate(xi);
    } catch (const std::exception& e) {
      throw SimulatorError(sim.name() + " failed: " + e.what(), xi);
    }
  }
  return fit_sgp(std::move(inputs), outputs, options.tol_pca, options.gp);
}

std::size_t matched_sgp_budget(std::size_t n_train, const IndexSelection& selection) {
  return n_train * (selection.size() - 1);
}

}  // namespace anovagp
