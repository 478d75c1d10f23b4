#include "anovagp/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "anovagp/archive.hpp"
#include "anovagp/rng.hpp"
#include "parallel.hpp"

namespace anovagp {
namespace {

using nlohmann::json;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json summary_json(const FiveNumberSummary& s) {
  return json{{"min", s.min}, {"q1", s.q1}, {"median", s.median}, {"q3", s.q3}, {"max", s.max}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("write to " + path.string() + " failed");
}

MethodErrors score(std::string method, const std::vector<std::optional<double>>& errors) {
  MethodErrors m;
  m.method = std::move(method);
  m.errors = errors;
  std::vector<double> defined;
  for (const auto& e : errors) {
    if (e) {
      defined.push_back(*e);
    } else {
      ++m.undefined;
    }
  }
  if (!defined.empty()) m.summary = five_number_summary(defined);
  return m;
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace

std::optional<double> relative_error(const Eigen::VectorXd& predicted, const Eigen::VectorXd& truth) {
  if (predicted.size() != truth.size()) throw std::invalid_argument("relative_error: dimension mismatch");
  const double denom = truth.squaredNorm();
  if (!(denom > 0.0)) return std::nullopt;
  return (predicted - truth).squaredNorm() / denom;
}

FiveNumberSummary five_number_summary(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("five_number_summary: empty sample");
  std::sort(values.begin(), values.end());
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
  };
  return {values.front(), quantile(0.25), quantile(0.5), quantile(0.75), values.back()};
}

std::vector<OrderRow> order_table(const IndexSelection& selection) {
  std::vector<OrderRow> rows;
  for (std::size_t i = 1; i < selection.candidate_counts.size(); ++i) {
    rows.push_back({i, selection.candidate_count(i), selection.selected_count(i)});
  }
  return rows;
}

std::vector<TermRow> term_table(const AnovaGpEmulator& emulator) {
  std::vector<TermRow> rows;
  const auto& weights = emulator.selection().weights;
  for (const auto& [t, local] : emulator.locals()) {
    const auto w = weights.find(t);
    rows.push_back({t, w == weights.end() ? 0.0 : w->second, local.rank(), local.training_size()});
  }
  return rows;
}

std::string errors_csv(const ExperimentReport& report) {
  std::string out = "test_index,method,relative_error\n";
  for (const auto& m : report.methods) {
    for (std::size_t j = 0; j < m.errors.size(); ++j) {
      out += std::to_string(j) + ',' + m.method + ',' +
             (m.errors[j] ? format_double(*m.errors[j]) : std::string("undefined")) + '\n';
    }
  }
  return out;
}

std::string report_json(const ExperimentReport& report) {
  json doc;
  doc["config"] = json::parse(to_json(report.config));
  json orders = json::array();
  for (const auto& r : report.orders) {
    orders.push_back(json{{"order", r.order}, {"candidates", r.candidates}, {"selected", r.selected}});
  }
  doc["orders"] = orders;
  json terms = json::array();
  for (const auto& t : report.terms) {
    std::vector<std::size_t> one_based;
    for (std::size_t c : t.index.coords()) one_based.push_back(c + 1);
    terms.push_back(json{{"index", one_based},
                         {"label", t.index.to_string()},
                         {"weight", t.weight},
                         {"pca_modes", t.modes},
                         {"training_size", t.training_size}});
  }
  doc["terms"] = terms;
  doc["sgp"] = json{{"n_train", report.sgp_n}, {"pca_modes", report.sgp_modes}};
  json methods = json::object();
  for (const auto& m : report.methods) {
    methods[m.method] = json{{"summary", summary_json(m.summary)},
                             {"n_test", m.errors.size()},
                             {"undefined", m.undefined}};
  }
  doc["methods"] = methods;
  doc["simulator_calls"] = json{{"decomposition", report.calls.decomposition},
                                {"active_training", report.calls.active_training},
                                {"anova_gp_total", report.calls.anova_gp_total},
                                {"sgp", report.calls.sgp},
                                {"test", report.calls.test}};
  doc["timings_seconds"] = report.timings;
  if (report.failed_stage) {
    doc["failure"] = json{{"stage", *report.failed_stage}, {"message", report.failure.value_or("")}};
  }
  return doc.dump(2) + "\n";
}

StageSeeds stage_seeds(std::uint64_t master) {
  return {derive_seed(master, "pools"), derive_seed(master, "local-gp"),
          derive_seed(master, "sgp-samples"), derive_seed(master, "sgp-gp"),
          derive_seed(master, "test-points")};
}

Eigen::MatrixXd sample_inputs(const InputSpace& inputs, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(inputs.dim()));
  for (Eigen::Index j = 0; j < out.rows(); ++j) out.row(j) = inputs.sample(rng).transpose();
  return out;
}

ExperimentArtifacts run_experiment(const ExperimentConfig& config,
                                   const std::optional<std::filesystem::path>& out_dir) {
  if (const auto problems = validate(config); !problems.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw ConfigError(msg);
  }
  ExperimentArtifacts art;
  ExperimentReport& report = art.report;
  report.config = config;
  std::string stage = "setup";

  auto flush = [&] {
    if (!out_dir) return;
    std::filesystem::create_directories(*out_dir);
    write_text(*out_dir / "config.json", to_json(config) + "\n");
    write_text(*out_dir / "report.json", report_json(report));
    if (!report.methods.empty()) write_text(*out_dir / "errors.csv", errors_csv(report));
  };

  try {
    Stopwatch total;
    const SimulatorPtr sim = make_simulator(config.problem);
    const StageSeeds seeds = stage_seeds(config.seed);
    SimCache cache(sim);
    const AnchorPoint anchor = AnchorPoint::mean_of(sim->inputs());

    stage = "decompose";
    Stopwatch t_decompose;
    art.anova_gp.decomposition = adaptive_decompose(cache, anchor, decompose_options(config));
    report.timings["decompose"] = t_decompose.seconds();
    report.calls.decomposition = cache.misses();
    report.orders = order_table(art.anova_gp.decomposition.selection);

    stage = "train-local";
    Stopwatch t_local;
    LocalTrainOptions local;
    local.n_train = config.n_train;
    local.pool_size = config.pool_size;
    local.tol_pca = config.tol_pca;
    local.gp = gp_options(config.local_gp, seeds.local_gp);
    local.seed = seeds.pools;
    auto locals = train_locals(art.anova_gp.decomposition, cache, local, config.threads);
    report.timings["train_local"] = t_local.seconds();
    report.calls.anova_gp_total = cache.misses();
    report.calls.active_training = report.calls.anova_gp_total - report.calls.decomposition;

    stage = "assemble";
    art.anova_gp.emulator = assemble(art.anova_gp.decomposition.selection, anchor,
                                     art.anova_gp.decomposition.anchor_output, std::move(locals));
    report.terms = term_table(art.anova_gp.emulator);

    stage = "train-sgp";
    Stopwatch t_sgp;
    SgpOptions sgp;
    sgp.n_train = config.sgp_budget == SgpBudgetRule::Matched
                      ? matched_sgp_budget(config.n_train, art.anova_gp.decomposition.selection)
                      : config.sgp_n;
    // With J = {empty} the matched budget is zero; the baseline still needs data.
    sgp.n_train = std::max<std::size_t>(sgp.n_train, 1);
    sgp.tol_pca = config.tol_pca;
    sgp.gp = gp_options(config.sgp_gp, seeds.sgp_gp);
    sgp.seed = seeds.sgp_samples;
    art.sgp = train_sgp(*sim, sgp);
    report.timings["train_sgp"] = t_sgp.seconds();
    report.sgp_n = sgp.n_train;
    report.sgp_modes = art.sgp.rank();
    report.calls.sgp = sgp.n_train;

    stage = "evaluate";
    Stopwatch t_eval;
    const Eigen::MatrixXd tests = sample_inputs(sim->inputs(), config.n_test, seeds.test_points);
    std::vector<std::optional<double>> err_agp(config.n_test), err_sgp(config.n_test);
    detail::parallel_for(config.n_test, config.threads, [&](std::size_t j) {
      const Eigen::VectorXd xi = tests.row(static_cast<Eigen::Index>(j)).transpose();
      const Eigen::VectorXd truth = sim->evaluate(xi);
      err_agp[j] = relative_error(art.anova_gp.emulator.predict_mean(xi), truth);
      err_sgp[j] = relative_error(art.sgp.predict_mean(xi), truth);
    });
    report.calls.test = config.n_test;
    report.methods.push_back(score("anova-gp", err_agp));
    report.methods.push_back(score("s-gp", err_sgp));
    report.timings["evaluate"] = t_eval.seconds();
    report.timings["total"] = total.seconds();

    stage = "write";
    flush();
    if (out_dir) {
      save_emulator(art.anova_gp.emulator, *out_dir / "anova_gp.emu");
      save_emulator(art.sgp, *out_dir / "sgp.emu");
    }
  } catch (const std::exception& e) {
    report.failed_stage = stage;
    report.failure = e.what();
    try {
      flush();
    } catch (...) {
    }
    throw;
  }
  return art;
}

}  // namespace anovagp
