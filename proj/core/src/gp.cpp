#include "anovagp/gp.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "anovagp/errors.hpp"
#include "anovagp/rng.hpp"

namespace anovagp {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_data(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                const Hyperparameters& hyper) {
  if (inputs.rows() != targets.size()) {
    throw std::invalid_argument("gp: " + std::to_string(inputs.rows()) + " inputs but " +
                                std::to_string(targets.size()) + " targets");
  }
  if (static_cast<std::size_t>(inputs.cols()) != hyper.input_dim()) {
    throw std::invalid_argument("gp: input dimension does not match the hyperparameters");
  }
}

/// Squared-exponential part of the covariance (no jitter).
Eigen::MatrixXd se_matrix(const Eigen::MatrixXd& inputs, const Hyperparameters& hyper) {
  const Eigen::Index n = inputs.rows();
  const Eigen::VectorXd inv_l = (-hyper.log_sq_lengths).array().exp();
  const double s = hyper.signal_var();
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    k(a, a) = s;
    for (Eigen::Index b = a + 1; b < n; ++b) {
      const double r = (inputs.row(a) - inputs.row(b)).array().square().matrix().dot(inv_l);
      k(a, b) = k(b, a) = s * std::exp(-0.5 * r);
    }
  }
  return k;
}

/// Cholesky with a pivot-size check: tiny pivots mean numerically singular.
bool factorize(const Eigen::MatrixXd& c, Eigen::LLT<Eigen::MatrixXd>& llt) {
  llt.compute(c);
  if (llt.info() != Eigen::Success) return false;
  const double scale = c.diagonal().cwiseAbs().maxCoeff();
  const double threshold = static_cast<double>(c.rows()) * std::numeric_limits<double>::epsilon() * scale;
  const Eigen::VectorXd pivots = llt.matrixLLT().diagonal();
  for (Eigen::Index i = 0; i < pivots.size(); ++i) {
    if (!std::isfinite(pivots(i)) || pivots(i) * pivots(i) <= threshold) return false;
  }
  return true;
}

double nlml_from(const Eigen::LLT<Eigen::MatrixXd>& llt, const Eigen::VectorXd& targets,
                 const Eigen::VectorXd& weights) {
  const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  const double n = static_cast<double>(targets.size());
  return 0.5 * log_det + 0.5 * targets.dot(weights) + 0.5 * n * std::log(2.0 * std::numbers::pi);
}

/// Everything the gradient needs from one Cholesky factorization.
struct Factorization {
  Eigen::MatrixXd se;
  Eigen::LLT<Eigen::MatrixXd> llt;
  Eigen::VectorXd w;
  double value = 0.0;
};

bool factorize_at(const Hyperparameters& hyper, const Eigen::MatrixXd& inputs,
                  const Eigen::VectorXd& targets, Factorization& f) {
  f.se = se_matrix(inputs, hyper);
  Eigen::MatrixXd c = f.se;
  c.diagonal().array() += hyper.jitter_var();
  if (!factorize(c, f.llt)) return false;
  f.w = f.llt.solve(targets);
  f.value = nlml_from(f.llt, targets, f.w);
  return true;
}

/// In-place inverse of the lower triangle of `l` (upper triangle untouched).
void lower_inverse(Eigen::Ref<Eigen::MatrixXd> l) {
  const Eigen::Index n = l.rows();
  if (n <= 64) {
    const Eigen::MatrixXd inv =
        l.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(n, n));
    l.triangularView<Eigen::Lower>() = inv;
    return;
  }
  const Eigen::Index h = n / 2;
  lower_inverse(l.topLeftCorner(h, h));
  lower_inverse(l.bottomRightCorner(n - h, n - h));
  // [A 0; B C]^{-1} has lower-left block -C^{-1} B A^{-1}.
  Eigen::MatrixXd t = l.bottomRightCorner(n - h, n - h).triangularView<Eigen::Lower>() *
                      l.bottomLeftCorner(n - h, h);
  l.bottomLeftCorner(n - h, h).noalias() =
      -(t * l.topLeftCorner(h, h).triangularView<Eigen::Lower>());
}

/// Overwrites the lower triangle of a lower-triangular `l` with that of l^T l.
void lower_gram(Eigen::Ref<Eigen::MatrixXd> l) {
  const Eigen::Index n = l.rows();
  if (n <= 64) {
    const Eigen::MatrixXd tri = l.triangularView<Eigen::Lower>();
    const Eigen::MatrixXd g = tri.transpose() * tri;
    l.triangularView<Eigen::Lower>() = g;
    return;
  }
  const Eigen::Index h = n / 2;
  // [A 0; B C]^T [A 0; B C] = [A^T A + B^T B, .; C^T B, C^T C]
  lower_gram(l.topLeftCorner(h, h));
  l.topLeftCorner(h, h).selfadjointView<Eigen::Lower>().rankUpdate(
      l.bottomLeftCorner(n - h, h).transpose());
  Eigen::MatrixXd t = l.bottomRightCorner(n - h, n - h).triangularView<Eigen::Lower>().transpose() *
                      l.bottomLeftCorner(n - h, h);
  l.bottomLeftCorner(n - h, h) = t;
  lower_gram(l.bottomRightCorner(n - h, n - h));
}

Eigen::VectorXd gradient_at(const Factorization& f, const Hyperparameters& hyper,
                            const Eigen::MatrixXd& inputs) {
  const Eigen::Index n = inputs.rows();
  const Eigen::Index m = inputs.cols();
  const double jitter = hyper.jitter_var();
  // dM/dtheta = 1/2 tr((C^{-1} - w w^T) dC/dtheta); only the lower triangle of C^{-1} is formed.
  Eigen::MatrixXd cinv = f.llt.matrixLLT();
  lower_inverse(cinv);
  lower_gram(cinv);

  Eigen::VectorXd grad = Eigen::VectorXd::Zero(m + 2);
  const Eigen::VectorXd inv_l = (-hyper.log_sq_lengths).array().exp();
  double signal = 0.0;
  double trace = 0.0;
  for (Eigen::Index b = 0; b < n; ++b) {
    const double qd = cinv(b, b) - f.w(b) * f.w(b);
    trace += qd;
    signal += qd * f.se(b, b);
    for (Eigen::Index a = b + 1; a < n; ++a) {
      const double qk = (cinv(a, b) - f.w(a) * f.w(b)) * f.se(a, b);
      // Off-diagonal pairs appear twice in the trace.
      signal += 2.0 * qk;
      for (Eigen::Index i = 0; i < m; ++i) {
        const double diff = inputs(a, i) - inputs(b, i);
        grad(i) += qk * diff * diff * inv_l(i);
      }
    }
  }
  grad.head(m) *= 0.5;  // 1/2 trace * 2 (symmetry) * 1/2 (kernel derivative)
  grad(m) = 0.5 * signal;
  grad(m + 1) = jitter > 0.0 ? 0.5 * jitter * trace : 0.0;
  return grad;
}

}  // namespace

double Hyperparameters::signal_var() const { return std::exp(log_signal_var); }
double Hyperparameters::jitter_var() const { return std::exp(log_jitter_var); }

Eigen::VectorXd Hyperparameters::pack() const {
  const Eigen::Index m = log_sq_lengths.size();
  Eigen::VectorXd p(m + 2);
  p.head(m) = log_sq_lengths;
  p(m) = log_signal_var;
  p(m + 1) = log_jitter_var;
  return p;
}

Hyperparameters Hyperparameters::unpack(const Eigen::VectorXd& packed) {
  if (packed.size() < 2) throw std::invalid_argument("Hyperparameters::unpack: too few entries");
  const Eigen::Index m = packed.size() - 2;
  return Hyperparameters{packed.head(m), packed(m), packed(m + 1)};
}

double kernel(const Eigen::VectorXd& x, const Eigen::VectorXd& x2, const Hyperparameters& hyper) {
  if (x.size() != x2.size() || static_cast<std::size_t>(x.size()) != hyper.input_dim()) {
    throw std::invalid_argument("kernel: dimension mismatch");
  }
  const Eigen::VectorXd inv_l = (-hyper.log_sq_lengths).array().exp();
  const double r = (x - x2).array().square().matrix().dot(inv_l);
  double k = hyper.signal_var() * std::exp(-0.5 * r);
  if (x == x2) k += hyper.jitter_var();
  return k;
}

Eigen::MatrixXd covariance_matrix(const Eigen::MatrixXd& inputs, const Hyperparameters& hyper) {
  if (static_cast<std::size_t>(inputs.cols()) != hyper.input_dim()) {
    throw std::invalid_argument("covariance_matrix: dimension mismatch");
  }
  Eigen::MatrixXd c = se_matrix(inputs, hyper);
  c.diagonal().array() += hyper.jitter_var();
  return c;
}

double nlml(const Hyperparameters& hyper, const Eigen::MatrixXd& inputs,
            const Eigen::VectorXd& targets) {
  check_data(inputs, targets, hyper);
  Eigen::LLT<Eigen::MatrixXd> llt;
  if (!factorize(covariance_matrix(inputs, hyper), llt)) {
    throw IllConditionedKernelError("nlml: covariance matrix is not positive definite");
  }
  return nlml_from(llt, targets, llt.solve(targets));
}

NlmlWithGradient nlml_gradient(const Hyperparameters& hyper, const Eigen::MatrixXd& inputs,
                               const Eigen::VectorXd& targets) {
  check_data(inputs, targets, hyper);
  Factorization f;
  if (!factorize_at(hyper, inputs, targets, f)) {
    throw IllConditionedKernelError("nlml_gradient: covariance matrix is not positive definite");
  }
  return {f.value, gradient_at(f, hyper, inputs)};
}

GpModel::GpModel(Eigen::MatrixXd inputs, Eigen::VectorXd targets, Hyperparameters hyper)
    : inputs_(std::move(inputs)), targets_(std::move(targets)), hyper_(std::move(hyper)) {
  check_data(inputs_, targets_, hyper_);
  if (inputs_.rows() == 0) throw std::invalid_argument("GpModel: no training data");
  if (!factorize(covariance_matrix(inputs_, hyper_), chol_)) {
    throw IllConditionedKernelError("GpModel: covariance matrix is not positive definite");
  }
  weights_ = chol_.solve(targets_);
  nlml_ = nlml_from(chol_, targets_, weights_);
}

Prediction GpModel::predict(const Eigen::VectorXd& x) const {
  if (static_cast<std::size_t>(x.size()) != input_dim()) {
    throw std::invalid_argument("GpModel::predict: dimension mismatch");
  }
  const Eigen::VectorXd inv_l = (-hyper_.log_sq_lengths).array().exp();
  const double s = hyper_.signal_var();
  Eigen::VectorXd k_star(inputs_.rows());
  for (Eigen::Index a = 0; a < inputs_.rows(); ++a) {
    const double r = (inputs_.row(a).transpose() - x).array().square().matrix().dot(inv_l);
    k_star(a) = s * std::exp(-0.5 * r);
  }
  Prediction p;
  p.mean = k_star.dot(weights_);
  const Eigen::VectorXd v = chol_.matrixL().solve(k_star);
  const double raw = prior_variance() - v.squaredNorm();
  p.clamped = raw < 0.0;
  p.variance = std::max(0.0, raw);
  return p;
}

std::vector<Prediction> GpModel::predict(const Eigen::MatrixXd& points) const {
  if (static_cast<std::size_t>(points.cols()) != input_dim()) {
    throw std::invalid_argument("GpModel::predict: dimension mismatch");
  }
  const Eigen::VectorXd inv_l = (-hyper_.log_sq_lengths).array().exp();
  const double s = hyper_.signal_var();
  const Eigen::Index n = inputs_.rows();
  const Eigen::Index p = points.rows();
  Eigen::MatrixXd k_star(n, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    for (Eigen::Index a = 0; a < n; ++a) {
      const double r = (inputs_.row(a) - points.row(j)).array().square().matrix().dot(inv_l);
      k_star(a, j) = s * std::exp(-0.5 * r);
    }
  }
  const Eigen::VectorXd means = k_star.transpose() * weights_;
  chol_.matrixL().solveInPlace(k_star);
  const double prior = prior_variance();
  std::vector<Prediction> out(static_cast<std::size_t>(p));
  for (Eigen::Index j = 0; j < p; ++j) {
    const double raw = prior - k_star.col(j).squaredNorm();
    auto& pred = out[static_cast<std::size_t>(j)];
    pred.mean = means(j);
    pred.clamped = raw < 0.0;
    pred.variance = std::max(0.0, raw);
  }
  return out;
}

double GpModel::predict_mean(const Eigen::VectorXd& x) const { return predict(x).mean; }

namespace {

struct Box {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  Eigen::VectorXd project(const Eigen::VectorXd& x) const { return x.cwiseMax(lo).cwiseMin(hi); }
};

/// Objective in the optimizer's variables: the packed log-hyperparameters,
/// without the jitter entry when the jitter is pinned at zero.
class Objective {
 public:
  Objective(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets, bool free_jitter)
      : inputs_(inputs), targets_(targets), free_jitter_(free_jitter) {}

  Hyperparameters hyper(const Eigen::VectorXd& x) const {
    const Eigen::Index m = inputs_.cols();
    return Hyperparameters{x.head(m), x(m), free_jitter_ ? x(m + 1) : -kInf};
  }

  /// +infinity when the covariance does not factorize.
  double value(const Eigen::VectorXd& x, Factorization& f) const {
    if (!factorize_at(hyper(x), inputs_, targets_, f) || !std::isfinite(f.value)) return kInf;
    return f.value;
  }

  /// Gradient at the point `f` was last factorized at.
  Eigen::VectorXd gradient(const Eigen::VectorXd& x, const Factorization& f) const {
    Eigen::VectorXd g = gradient_at(f, hyper(x), inputs_);
    return free_jitter_ ? g : Eigen::VectorXd(g.head(x.size()));
  }

 private:
  const Eigen::MatrixXd& inputs_;
  const Eigen::VectorXd& targets_;
  bool free_jitter_;
};

struct MinimizeResult {
  Eigen::VectorXd x;
  double initial = kInf;
  double value = kInf;
};

/// Box-projected L-BFGS with a monotone backtracking line search.
MinimizeResult minimize(const Objective& f, const Box& box, Eigen::VectorXd x, std::size_t max_iters) {
  constexpr std::size_t kMemory = 8;
  // Same stopping rules as L-BFGS-B's defaults (factr = 1e7, pgtol = 1e-5).
  constexpr double kRelDecreaseTol = 1e7 * std::numeric_limits<double>::epsilon();
  constexpr double kGradTol = 1e-5;
  MinimizeResult res;
  x = box.project(x);
  Factorization state;
  double fx = f.value(x, state);
  res.initial = fx;
  res.x = x;
  res.value = fx;
  if (!std::isfinite(fx)) return res;
  Eigen::VectorXd g = f.gradient(x, state);
  if (!g.allFinite()) return res;

  std::deque<std::pair<Eigen::VectorXd, Eigen::VectorXd>> history;
  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    const Eigen::VectorXd projected_grad = x - box.project(x - g);
    if (projected_grad.lpNorm<Eigen::Infinity>() < kGradTol) break;

    // Two-loop recursion.
    Eigen::VectorXd d = -g;
    std::vector<double> alpha(history.size());
    for (std::size_t k = history.size(); k-- > 0;) {
      const auto& [s, y] = history[k];
      alpha[k] = s.dot(d) / y.dot(s);
      d -= alpha[k] * y;
    }
    if (!history.empty()) {
      const auto& [s, y] = history.back();
      d *= s.dot(y) / y.squaredNorm();
    } else {
      d /= std::max(1.0, g.norm());
    }
    for (std::size_t k = 0; k < history.size(); ++k) {
      const auto& [s, y] = history[k];
      const double beta = y.dot(d) / y.dot(s);
      d += (alpha[k] - beta) * s;
    }
    if (g.dot(d) >= 0.0) {
      history.clear();
      d = -g / std::max(1.0, g.norm());
    }

    double step = 1.0;
    bool accepted = false;
    Eigen::VectorXd x_new;
    double f_new = kInf;
    for (int ls = 0; ls < 40; ++ls) {
      x_new = box.project(x + step * d);
      f_new = f.value(x_new, state);
      const double decrease = std::min(0.0, g.dot(x_new - x));
      if (std::isfinite(f_new) && f_new <= fx + 1e-4 * decrease && f_new <= fx) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    const Eigen::VectorXd g_new = f.gradient(x_new, state);
    if (!g_new.allFinite()) break;

    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd y = g_new - g;
    const double improvement = fx - f_new;
    x = x_new;
    g = g_new;
    fx = f_new;
    if (s.dot(y) > 1e-12 * s.norm() * y.norm()) {
      history.emplace_back(s, y);
      if (history.size() > kMemory) history.pop_front();
    }
    if (improvement <= kRelDecreaseTol * std::max({1.0, std::abs(fx), std::abs(fx + improvement)})) break;
  }
  res.x = x;
  res.value = fx;
  return res;
}

}  // namespace

GpModel train_gp(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                 const GpTrainOptions& options, const std::optional<Hyperparameters>& warm_start,
                 GpTrainReport* report) {
  if (inputs.rows() == 0) throw std::invalid_argument("train_gp: no training data");
  if (inputs.rows() != targets.size()) throw std::invalid_argument("train_gp: inputs/targets size mismatch");
  if (options.jitter_floor < 0.0) throw std::invalid_argument("train_gp: negative jitter floor");
  const Eigen::Index m = inputs.cols();
  const bool free_jitter = options.jitter_floor > 0.0;

  // Zero prior mean: scale by the second moment of the targets.
  double scale = targets.squaredNorm() / static_cast<double>(targets.size());
  if (!(scale > 0.0)) scale = 1.0;
  Eigen::VectorXd span2(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double span = inputs.col(i).maxCoeff() - inputs.col(i).minCoeff();
    span2(i) = span > 0.0 ? span * span : 1.0;
  }

  const Eigen::Index nvars = m + (free_jitter ? 2 : 1);
  Box box{Eigen::VectorXd(nvars), Eigen::VectorXd(nvars)};
  box.lo.head(m) = (span2 * 1e-6).array().log();
  box.hi.head(m) = (span2 * 1e6).array().log();
  box.lo(m) = std::log(scale * 1e-8);
  box.hi(m) = std::log(scale * 1e4);
  const double log_floor = free_jitter ? std::log(options.jitter_floor * scale) : -kInf;
  if (free_jitter) {
    box.lo(m + 1) = log_floor;
    box.hi(m + 1) = std::max(log_floor, std::log(scale));
  }

  Rng rng(options.seed);
  auto random_start = [&] {
    Eigen::VectorXd x(nvars);
    for (Eigen::Index i = 0; i < m; ++i) {
      x(i) = rng.uniform(std::log(0.01 * span2(i)), std::log(10.0 * span2(i)));
    }
    x(m) = std::log(scale);
    if (free_jitter) x(m + 1) = log_floor;
    return x;
  };

  std::vector<Eigen::VectorXd> starts;
  if (warm_start && warm_start->input_dim() == static_cast<std::size_t>(m)) {
    Eigen::VectorXd x(nvars);
    x.head(m) = warm_start->log_sq_lengths;
    x(m) = warm_start->log_signal_var;
    if (free_jitter) x(m + 1) = std::max(warm_start->log_jitter_var, log_floor);
    starts.push_back(x);
    for (std::size_t r = 0; r < options.warm_restarts; ++r) starts.push_back(random_start());
  } else {
    for (std::size_t r = 0; r < std::max<std::size_t>(1, options.restarts); ++r) {
      starts.push_back(random_start());
    }
  }

  const Objective objective(inputs, targets, free_jitter);
  GpTrainReport local_report;
  double best = kInf;
  Eigen::VectorXd best_x;
  for (std::size_t r = 0; r < starts.size(); ++r) {
    // A start whose covariance does not factorize is pulled toward shorter length scales,
    // where the kernel matrix of distinct inputs approaches a multiple of the identity.
    Factorization probe;
    for (int shrink = 0; shrink < 40 && !std::isfinite(objective.value(starts[r], probe)); ++shrink) {
      starts[r].head(m) = (starts[r].head(m).array() - std::log(4.0)).max(box.lo.head(m).array());
    }
    const MinimizeResult res = minimize(objective, box, starts[r], options.max_iters);
    local_report.initial_nlml.push_back(res.initial);
    local_report.final_nlml.push_back(res.value);
    if (res.value < best) {
      best = res.value;
      best_x = res.x;
      local_report.best_restart = r;
    }
  }
  if (report) *report = local_report;
  if (!std::isfinite(best)) {
    throw TrainingFailedError("train_gp: covariance not factorizable at any of " +
                              std::to_string(starts.size()) + " starting points (N = " +
                              std::to_string(inputs.rows()) + ", jitter floor " +
                              std::to_string(options.jitter_floor) + ")");
  }
  return GpModel(inputs, targets, objective.hyper(best_x));
}

}  // namespace anovagp
