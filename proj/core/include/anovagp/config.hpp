#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "anovagp/anova.hpp"
#include "anovagp/diffusion.hpp"
#include "anovagp/gp.hpp"
#include "anovagp/simulator.hpp"

namespace anovagp {

struct ProblemConfig {
  /// "diffusion" or an analytic_bank name.
  std::string simulator = "diffusion";
  std::size_t nodes_per_side = 65;
  std::size_t subdomains_per_side = 6;
  LinearSolver solver = LinearSolver::Direct;
  /// Analytic simulators only.
  std::size_t input_dim = 4;
  std::size_t output_dim = 16;

  bool operator==(const ProblemConfig&) const = default;
};

enum class SgpBudgetRule {
  /// N = n_train * (|J| - 1).
  Matched,
  /// N = sgp_n.
  Fixed,
};

struct GpConfig {
  std::size_t restarts = 5;
  std::size_t max_iters = 200;
  double jitter_floor = 1e-10;

  bool operator==(const GpConfig&) const = default;
};

struct ExperimentConfig {
  ProblemConfig problem;
  double tol_index = 1e-4;
  double tol_pca = 1e-2;
  std::size_t nodes_per_dim = 5;
  std::size_t max_order = 4;
  WeightDenominator denominator = WeightDenominator::Running;
  std::size_t n_train = 30;
  std::size_t pool_size = 1000;
  GpConfig local_gp;
  SgpBudgetRule sgp_budget = SgpBudgetRule::Matched;
  std::size_t sgp_n = 0;
  GpConfig sgp_gp{2, 100, 1e-10};
  std::size_t n_test = 200;
  std::uint64_t seed = 1;
  std::string output_dir = "run";
  std::size_t threads = 1;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Validation messages; empty when the config is usable.
std::vector<std::string> validate(const ExperimentConfig& config);

/// Parses a YAML (key/value with nesting) or JSON document. Unknown keys are
/// rejected. Throws ConfigError listing every problem found.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical JSON form; parse_config(to_json(c)) == c.
std::string to_json(const ExperimentConfig& config);
std::string to_yaml(const ExperimentConfig& config);

SimulatorPtr make_simulator(const ProblemConfig& problem);

DecomposeOptions decompose_options(const ExperimentConfig& config);
GpTrainOptions gp_options(const GpConfig& gp, std::uint64_t seed);

}  // namespace anovagp
