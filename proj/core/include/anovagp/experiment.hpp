#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "anovagp/anova_index.hpp"
#include "anovagp/config.hpp"
#include "anovagp/emulator.hpp"

namespace anovagp {

/// ||predicted - truth||^2 / ||truth||^2 (squared Euclidean ratio).
/// Empty when the truth vector is zero.
std::optional<double> relative_error(const Eigen::VectorXd& predicted,
                                     const Eigen::VectorXd& truth);

struct FiveNumberSummary {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};

/// Quartiles by linear interpolation between order statistics.
/// Throws std::invalid_argument on an empty sample.
FiveNumberSummary five_number_summary(std::vector<double> values);

struct MethodErrors {
  std::string method;
  std::vector<std::optional<double>> errors;
  FiveNumberSummary summary;
  std::size_t undefined = 0;
};

struct OrderRow {
  std::size_t order = 0;
  std::size_t candidates = 0;
  std::size_t selected = 0;
};

struct TermRow {
  AnovaIndex index;
  double weight = 0.0;
  std::size_t modes = 0;
  std::size_t training_size = 0;
};

struct SimulatorCalls {
  std::size_t decomposition = 0;
  std::size_t active_training = 0;
  std::size_t anova_gp_total = 0;
  std::size_t sgp = 0;
  std::size_t test = 0;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<OrderRow> orders;
  std::vector<TermRow> terms;
  std::size_t sgp_n = 0;
  std::size_t sgp_modes = 0;
  std::vector<MethodErrors> methods;
  SimulatorCalls calls;
  std::map<std::string, double> timings;
  std::optional<std::string> failed_stage;
  std::optional<std::string> failure;
};

/// Rows of the order table from a selection (orders >= 1).
std::vector<OrderRow> order_table(const IndexSelection& selection);
/// Per-term rows in index_order.
std::vector<TermRow> term_table(const AnovaGpEmulator& emulator);

/// CSV with header test_index,method,relative_error; one row per test point
/// and method, floats printed with 17 significant digits.
std::string errors_csv(const ExperimentReport& report);
std::string report_json(const ExperimentReport& report);

struct ExperimentArtifacts {
  ExperimentReport report;
  AnovaGpBuild anova_gp;
  SgpEmulator sgp;
};

/// Full comparison: decompose, train local emulators, assemble, train the
/// baseline on the matched budget, score both on n_test fresh inputs.
/// With `out_dir`, writes errors.csv, report.json, config.json,
/// anova_gp.emu and sgp.emu there; on failure the report records the stage
/// and is still written before the exception propagates.
ExperimentArtifacts run_experiment(const ExperimentConfig& config,
                                   const std::optional<std::filesystem::path>& out_dir);

/// Seeds derived from the master seed for each stage.
struct StageSeeds {
  std::uint64_t pools;
  std::uint64_t local_gp;
  std::uint64_t sgp_samples;
  std::uint64_t sgp_gp;
  std::uint64_t test_points;
};
StageSeeds stage_seeds(std::uint64_t master);

/// n i.i.d. uniform test inputs (rows).
Eigen::MatrixXd sample_inputs(const InputSpace& inputs, std::size_t n, std::uint64_t seed);

}  // namespace anovagp
