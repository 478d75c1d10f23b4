#include "anovagp/anova.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "parallel.hpp"

namespace anovagp {

std::vector<AnovaIndex> IndexSelection::all() const {
  std::vector<AnovaIndex> out;
  for (const auto& order : selected) out.insert(out.end(), order.begin(), order.end());
  std::sort(out.begin(), out.end(), IndexLess{});
  return out;
}

std::size_t IndexSelection::size() const {
  std::size_t n = 0;
  for (const auto& order : selected) n += order.size();
  return n;
}

bool IndexSelection::contains(const AnovaIndex& t) const {
  if (t.order() >= selected.size()) return false;
  const auto& level = selected[t.order()];
  return std::binary_search(level.begin(), level.end(), t, IndexLess{});
}

Eigen::VectorXd embed(const Eigen::VectorXd& xi_t, const AnovaIndex& t,
                      const AnchorPoint& anchor) {
  if (static_cast<std::size_t>(xi_t.size()) != t.order()) {
    throw std::invalid_argument("embed: xi_t has " + std::to_string(xi_t.size()) +
                                " entries but t has order " + std::to_string(t.order()));
  }
  if (t.span() > static_cast<std::size_t>(anchor.c.size())) {
    throw std::invalid_argument("embed: index " + t.to_string() + " exceeds input dimension");
  }
  Eigen::VectorXd x = anchor.c;
  for (std::size_t k = 0; k < t.order(); ++k) {
    x(static_cast<Eigen::Index>(t[k])) = xi_t(static_cast<Eigen::Index>(k));
  }
  return x;
}

Eigen::VectorXd term_value(const AnovaIndex& t, const Eigen::VectorXd& xi_t,
                           const AnchorPoint& anchor, SimCache& cache) {
  if (static_cast<std::size_t>(xi_t.size()) != t.order()) {
    throw std::invalid_argument("term_value: xi_t does not match the order of " + t.to_string());
  }
  const std::size_t order = t.order();
  // Unrolling the recursion gives the Moebius sum over all subsets of t.
  Eigen::VectorXd full = cache.evaluate(embed(xi_t, t, anchor));
  for (std::size_t mask = 0; mask + 1 < (std::size_t{1} << order); ++mask) {
    Eigen::VectorXd x = anchor.c;
    std::size_t bits = 0;
    for (std::size_t k = 0; k < order; ++k) {
      if (mask & (std::size_t{1} << k)) {
        x(static_cast<Eigen::Index>(t[k])) = xi_t(static_cast<Eigen::Index>(k));
        ++bits;
      }
    }
    const Eigen::VectorXd u = cache.evaluate(x);
    if ((order - bits) % 2 == 1) {
      full -= u;
    } else {
      full += u;
    }
  }
  return full;
}

QuadratureRule1D coordinate_rule(const InputSpace& inputs, std::size_t coord,
                                 std::size_t nodes_per_dim) {
  return map_rule(cc_rule(nodes_per_dim), inputs.interval(coord));
}

TermMean term_mean(const AnovaIndex& t, const AnchorPoint& anchor, SimCache& cache,
                   std::size_t nodes_per_dim) {
  if (t.empty()) throw std::invalid_argument("term_mean: the empty term has no quadrature");
  const InputSpace& inputs = cache.simulator().inputs();
  std::vector<QuadratureRule1D> rules;
  rules.reserve(t.order());
  for (std::size_t coord : t.coords()) rules.push_back(coordinate_rule(inputs, coord, nodes_per_dim));

  TermMean out;
  out.dataset.index = t;
  out.dataset.grid = tensor_grid(t, rules);
  const TensorQuadrature& grid = out.dataset.grid;
  const auto points = static_cast<Eigen::Index>(grid.size());
  out.dataset.values.resize(static_cast<Eigen::Index>(cache.simulator().output_dim()), points);
  Eigen::VectorXd density(points);
  for (Eigen::Index k = 0; k < points; ++k) {
    const Eigen::VectorXd xi_t = grid.points.row(k).transpose();
    out.dataset.values.col(k) = term_value(t, xi_t, anchor, cache);
    double pi = 1.0;
    for (std::size_t j = 0; j < t.order(); ++j) {
      pi *= inputs.marginal_density(t[j], xi_t(static_cast<Eigen::Index>(j)));
    }
    density(k) = pi;
  }
  out.mean = weighted_mean(out.dataset.values, grid, density);
  return out;
}

double contribution_weight(const Eigen::VectorXd& mean_t, const Eigen::VectorXd& accumulated,
                           const Simulator& sim) {
  const double denom = sim.output_norm(accumulated);
  if (!(denom > 0.0)) {
    throw DegenerateReferenceError(
        "contribution weight: the accumulated mean has zero norm; supply an absolute-weight fallback");
  }
  return sim.output_norm(mean_t) / denom;
}

std::vector<AnovaIndex> admissible_candidates(const std::vector<AnovaIndex>& selected_order_i,
                                              std::size_t input_dim) {
  if (selected_order_i.empty()) return {};
  const std::set<AnovaIndex, IndexLess> accepted(selected_order_i.begin(), selected_order_i.end());
  std::set<AnovaIndex, IndexLess> out;
  for (const AnovaIndex& s : selected_order_i) {
    for (std::size_t j = 0; j < input_dim; ++j) {
      if (s.contains(j)) continue;
      AnovaIndex t = s.with(j);
      if (out.count(t)) continue;
      bool admissible = true;
      for (std::size_t coord : t.coords()) {
        if (!accepted.count(t.without(coord))) {
          admissible = false;
          break;
        }
      }
      if (admissible) out.insert(std::move(t));
    }
  }
  return {out.begin(), out.end()};
}

Decomposition adaptive_decompose(SimCache& cache, const AnchorPoint& anchor,
                                 const DecomposeOptions& options) {
  if (!(options.tol_index > 0.0)) throw std::invalid_argument("adaptive_decompose: tol_index must be > 0");
  if (options.max_order < 1) throw std::invalid_argument("adaptive_decompose: max_order must be >= 1");
  if (options.nodes_per_dim < 1) throw std::invalid_argument("adaptive_decompose: nodes_per_dim must be >= 1");
  const Simulator& sim = cache.simulator();
  const std::size_t m = sim.input_dim();
  if (static_cast<std::size_t>(anchor.c.size()) != m) {
    throw std::invalid_argument("adaptive_decompose: anchor dimension mismatch");
  }
  if (!sim.inputs().contains(anchor.c)) {
    throw std::invalid_argument("adaptive_decompose: anchor outside the input support");
  }

  Decomposition out;
  out.anchor = anchor;
  IndexSelection& selection = out.selection;
  selection.selected.push_back({AnovaIndex{}});
  selection.candidate_counts.push_back(1);

  try {
    out.anchor_output = cache.evaluate(anchor.c);
  } catch (const SimulatorError& e) {
    throw DecompositionError(std::string("decomposition aborted at u(c): ") + e.what(), selection,
                             e.point());
  }
  Eigen::VectorXd accumulated = out.anchor_output;

  std::vector<AnovaIndex> candidates;
  for (std::size_t i = 0; i < m; ++i) candidates.push_back(AnovaIndex{i});

  const std::size_t chunk = std::max<std::size_t>(1, options.threads);
  for (std::size_t order = 1; !candidates.empty(); ++order) {
    selection.candidate_counts.push_back(candidates.size());
    selection.selected.emplace_back();
    const Eigen::VectorXd lower_orders = accumulated;

    // Means within a chunk are independent; acceptance runs in candidate order.
    for (std::size_t begin = 0; begin < candidates.size(); begin += chunk) {
      const std::size_t end = std::min(candidates.size(), begin + chunk);
      std::vector<TermMean> means(end - begin);
      try {
        detail::parallel_for(end - begin, options.threads, [&](std::size_t k) {
          means[k] = term_mean(candidates[begin + k], anchor, cache, options.nodes_per_dim);
        });
      } catch (const SimulatorError& e) {
        throw DecompositionError("decomposition aborted at order " + std::to_string(order) +
                                     ": " + e.what(),
                                 selection, e.point());
      }
      for (std::size_t k = 0; k < means.size(); ++k) {
        const AnovaIndex& t = candidates[begin + k];
        const Eigen::VectorXd& denom =
            options.denominator == WeightDenominator::Running ? accumulated : lower_orders;
        const double gamma = contribution_weight(means[k].mean, denom, sim);
        selection.weights[t] = gamma;
        if (gamma > options.tol_index) {
          selection.selected.back().push_back(t);
          accumulated += means[k].mean;
          out.datasets.emplace(t, std::move(means[k].dataset));
        }
      }
    }
    if (order == options.max_order) break;
    candidates = admissible_candidates(selection.selected.back(), m);
  }
  return out;
}

}  // namespace anovagp
