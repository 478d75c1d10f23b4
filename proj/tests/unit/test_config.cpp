#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "anovagp/config.hpp"
#include "anovagp/errors.hpp"

using namespace anovagp;

namespace {

ExperimentConfig unusual_config() {
  ExperimentConfig c;
  c.problem.simulator = "polynomial-mix";
  c.problem.input_dim = 7;
  c.problem.output_dim = 3;
  c.problem.solver = LinearSolver::ConjugateGradient;
  c.tol_index = 3.0e-5;
  c.tol_pca = 0.1 + 0.2;  // not exactly representable as written
  c.nodes_per_dim = 7;
  c.max_order = 2;
  c.denominator = WeightDenominator::PreviousOrders;
  c.n_train = 17;
  c.pool_size = 333;
  c.local_gp = {3, 50, 1e-9};
  c.sgp_budget = SgpBudgetRule::Fixed;
  c.sgp_n = 99;
  c.sgp_gp = {1, 20, 0.0};
  c.n_test = 12;
  c.seed = 18446744073709551615ull;
  c.output_dir = "out dir/with: colon";
  c.threads = 2;
  return c;
}

}  // namespace

TEST(Config, DefaultsAreValid) { EXPECT_TRUE(validate(ExperimentConfig{}).empty()); }

TEST(Config, JsonRoundTrip) {
  const ExperimentConfig c = unusual_config();
  EXPECT_EQ(parse_config(to_json(c)), c);
  EXPECT_EQ(parse_config(to_json(ExperimentConfig{})), ExperimentConfig{});
}

TEST(Config, YamlRoundTrip) {
  const ExperimentConfig c = unusual_config();
  EXPECT_EQ(parse_config(to_yaml(c)), c);
  EXPECT_EQ(parse_config(to_yaml(ExperimentConfig{})), ExperimentConfig{});
}

TEST(Config, PartialYamlKeepsDefaults) {
  const ExperimentConfig c = parse_config(
      "problem:\n  simulator: additive\n  input_dim: 3\n"
      "decomposition:\n  tol_index: 1.0e-3\n"
      "seed: 9\n");
  ExperimentConfig expected;
  expected.problem.simulator = "additive";
  expected.problem.input_dim = 3;
  expected.tol_index = 1e-3;
  expected.seed = 9;
  EXPECT_EQ(c, expected);
}

TEST(Config, UnknownKeysAreReported) {
  try {
    parse_config("problem:\n  simulater: diffusion\npca:\n  tolerance: 0.1\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("simulater"), std::string::npos);
    EXPECT_NE(msg.find("tolerance"), std::string::npos);
  }
}

TEST(Config, TypeErrorsAreReported) {
  EXPECT_THROW(parse_config("seed: -1\n"), ConfigError);
  EXPECT_THROW(parse_config("training:\n  n_train: many\n"), ConfigError);
  EXPECT_THROW(parse_config("{\"pca\": {\"tol\": \"small\"}}"), ConfigError);
  EXPECT_THROW(parse_config("problem: [1, 2]\n"), ConfigError);
  EXPECT_THROW(parse_config("problem:\n  solver: lu\n"), ConfigError);
  EXPECT_THROW(parse_config("{not json"), ConfigError);
  EXPECT_THROW(parse_config("a: [unclosed\n"), ConfigError);
}

TEST(Config, ValidationMessages) {
  ExperimentConfig c;
  c.tol_index = 0.0;
  c.tol_pca = 1.0;
  c.n_test = 0;
  c.pool_size = c.n_train;
  const auto errors = validate(c);
  EXPECT_EQ(errors.size(), 4u);
  EXPECT_THROW(parse_config("evaluation:\n  n_test: 0\n"), ConfigError);
}

TEST(Config, ValidationChecksGrid) {
  ExperimentConfig c;
  c.problem.nodes_per_side = 7;  // 6 elements
  c.problem.subdomains_per_side = 4;
  EXPECT_EQ(validate(c).size(), 1u);
  c.problem.subdomains_per_side = 3;
  EXPECT_TRUE(validate(c).empty());
}

TEST(Config, UnknownSimulator) {
  ExperimentConfig c;
  c.problem.simulator = "navier-stokes";
  EXPECT_EQ(validate(c).size(), 1u);
}

TEST(Config, LoadFromFile) {
  const auto path = std::filesystem::temp_directory_path() / "anovagp_config_test.yaml";
  {
    std::ofstream out(path);
    out << to_yaml(unusual_config());
  }
  EXPECT_EQ(load_config(path), unusual_config());
  std::filesystem::remove(path);
  EXPECT_THROW(load_config(path), ConfigError);
}

TEST(Config, MakeSimulator) {
  ExperimentConfig c;
  c.problem.nodes_per_side = 9;
  c.problem.subdomains_per_side = 2;
  const auto diffusion = make_simulator(c.problem);
  EXPECT_EQ(diffusion->input_dim(), 4u);
  EXPECT_EQ(diffusion->output_dim(), 81u);
  c.problem.simulator = "additive";
  const auto additive = make_simulator(c.problem);
  EXPECT_EQ(additive->input_dim(), 4u);
  EXPECT_EQ(additive->output_dim(), 16u);
}

TEST(Config, DerivedOptions) {
  const ExperimentConfig c = unusual_config();
  const DecomposeOptions d = decompose_options(c);
  EXPECT_EQ(d.tol_index, c.tol_index);
  EXPECT_EQ(d.nodes_per_dim, 7u);
  EXPECT_EQ(d.max_order, 2u);
  EXPECT_EQ(d.denominator, WeightDenominator::PreviousOrders);
  EXPECT_EQ(d.threads, 2u);
  const GpTrainOptions g = gp_options(c.local_gp, 42);
  EXPECT_EQ(g.restarts, 3u);
  EXPECT_EQ(g.max_iters, 50u);
  EXPECT_EQ(g.jitter_floor, 1e-9);
  EXPECT_EQ(g.seed, 42u);
}
