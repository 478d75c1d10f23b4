#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "anovagp/emulator.hpp"
#include "anovagp/errors.hpp"
#include "anovagp/rng.hpp"
#include "anovagp/sim_cache.hpp"

using namespace anovagp;

namespace {

struct Fixture {
  SimulatorPtr sim;
  SimCache cache;
  AnchorPoint anchor;
  Decomposition dec;

  explicit Fixture(const std::string& name, std::size_t m = 3, std::size_t d = 8)
      : sim(analytic_bank(name, m, d)), cache(sim), anchor(AnchorPoint::mean_of(sim->inputs())) {
    dec = adaptive_decompose(cache, anchor, {});
  }
};

/// Roundoff scale of the indicator: posterior variances cancel against the prior.
double indicator_roundoff(const LocalGpEmulator& local) {
  double prior = 0.0;
  for (std::size_t r = 0; r < local.rank(); ++r) {
    prior += local.pca.eigenvalues(static_cast<Eigen::Index>(r)) * local.mode_gps[r].prior_variance();
  }
  return 1e3 * std::numeric_limits<double>::epsilon() * prior / local.pca.eigenvalues.sum();
}

LocalTrainOptions small_options() {
  LocalTrainOptions o;
  o.n_train = 12;
  o.pool_size = 200;
  o.gp.restarts = 2;
  o.gp.max_iters = 60;
  o.seed = 5;
  return o;
}

}  // namespace

TEST(VarianceIndicator, WeightedAverageOfModeVariances) {
  Fixture f("polynomial-mix");
  const auto& data = f.dec.datasets.at(AnovaIndex{0, 1});
  const LocalGpEmulator local = fit_local(data.index, data.grid.points, data.values, 1e-6, {});
  ASSERT_GE(local.rank(), 1u);
  const Eigen::VectorXd x = Eigen::Vector2d(0.3, 0.7);
  double num = 0.0;
  for (std::size_t r = 0; r < local.rank(); ++r) {
    num += local.pca.eigenvalues(static_cast<Eigen::Index>(r)) * local.mode_gps[r].predict(x).variance;
  }
  EXPECT_NEAR(variance_indicator(local, x), num / local.pca.eigenvalues.sum(), 1e-15);
  Eigen::MatrixXd pts(2, 2);
  pts << 0.3, 0.7, 0.1, 0.2;
  const Eigen::VectorXd batch = variance_indicator(local, pts);
  const double tol = indicator_roundoff(local);
  EXPECT_NEAR(batch(0), variance_indicator(local, x), tol);
  EXPECT_NEAR(batch(1), variance_indicator(local, Eigen::VectorXd(Eigen::Vector2d(0.1, 0.2))), tol);
}

TEST(VarianceIndicator, RankZeroIsUndefined) {
  const AnovaIndex t{0};
  Eigen::MatrixXd x(3, 1);
  x << 0.1, 0.5, 0.9;
  const LocalGpEmulator local = fit_local(t, x, Eigen::MatrixXd::Zero(4, 3), 1e-2, {});
  EXPECT_EQ(local.rank(), 0u);
  EXPECT_THROW(variance_indicator(local, Eigen::VectorXd(Eigen::VectorXd::Constant(1, 0.2))), UndefinedIndicatorError);
  EXPECT_EQ(predict_local_mean(local, Eigen::VectorXd::Constant(1, 0.2)), Eigen::VectorXd::Zero(4));
}

TEST(CandidatePool, AvoidsGridAndStaysInSupport) {
  Fixture f("additive");
  const auto& data = f.dec.datasets.at(AnovaIndex{1});
  const Eigen::MatrixXd pool = candidate_pool(data.index, f.sim->inputs(), data.grid, 500, 3);
  ASSERT_EQ(pool.rows(), 500);
  ASSERT_EQ(pool.cols(), 1);
  for (Eigen::Index j = 0; j < pool.rows(); ++j) {
    EXPECT_GE(pool(j, 0), 0.0);
    EXPECT_LE(pool(j, 0), 1.0);
    for (Eigen::Index g = 0; g < data.grid.points.rows(); ++g) EXPECT_NE(pool(j, 0), data.grid.points(g, 0));
  }
  EXPECT_EQ(pool, candidate_pool(data.index, f.sim->inputs(), data.grid, 500, 3));
}

TEST(TrainLocal, AddsMaximalIndicatorPoints) {
  Fixture f("polynomial-mix");
  for (const AnovaIndex& t : {AnovaIndex{2}, AnovaIndex{0, 2}}) {
    const auto& data = f.dec.datasets.at(t);
    LocalTrainOptions opts = small_options();
    opts.n_train = data.grid.size() + 7;
    std::size_t steps = 0;
    const auto local = train_local(data, f.anchor, f.cache, opts, [&](const ActiveStep& s) {
      ++steps;
      // Pointwise recomputation: nothing in the pool beats the chosen point beyond roundoff.
      double best_tau = -1.0;
      for (Eigen::Index j = 0; j < s.pool.rows(); ++j) {
        best_tau = std::max(best_tau, variance_indicator(s.current, Eigen::VectorXd(s.pool.row(j).transpose())));
      }
      const Eigen::VectorXd chosen = s.pool.row(static_cast<Eigen::Index>(s.chosen)).transpose();
      EXPECT_GE(variance_indicator(s.current, chosen), best_tau - indicator_roundoff(s.current));
      EXPECT_EQ(s.chosen_indicator, variance_indicator(s.current, s.pool).maxCoeff());
    });
    EXPECT_EQ(local.training_size(), opts.n_train);
    EXPECT_EQ(steps, 7u);
    EXPECT_EQ(local.initial_size, data.grid.size());
    // Training outputs are exact term values.
    for (Eigen::Index j = 0; j < local.train_inputs.rows(); ++j) {
      const Eigen::VectorXd x = local.train_inputs.row(j).transpose();
      EXPECT_LT((local.train_outputs.col(j) - term_value(t, x, f.anchor, f.cache)).norm(), 1e-12);
    }
  }
}

TEST(TrainLocal, NoActiveStepsWhenGridSuffices) {
  Fixture f("additive");
  LocalTrainOptions o = small_options();
  o.n_train = 5;
  const auto& data = f.dec.datasets.at(AnovaIndex{0});
  const auto local = train_local(data, f.anchor, f.cache, o, [](const ActiveStep&) { FAIL(); });
  EXPECT_EQ(local.training_size(), 5u);
}

TEST(TrainLocal, Deterministic) {
  Fixture f("polynomial-mix");
  const auto& data = f.dec.datasets.at(AnovaIndex{1});
  const auto a = train_local(data, f.anchor, f.cache, small_options());
  const auto b = train_local(data, f.anchor, f.cache, small_options());
  EXPECT_EQ(a.train_inputs, b.train_inputs);
  const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, 0.77);
  EXPECT_EQ(predict_local_mean(a, x), predict_local_mean(b, x));
}

TEST(TrainLocal, PoolMustExceedBudget) {
  Fixture f("additive");
  LocalTrainOptions o = small_options();
  o.pool_size = 12;
  EXPECT_THROW(train_local(f.dec.datasets.at(AnovaIndex{0}), f.anchor, f.cache, o), std::invalid_argument);
}

TEST(AnovaGp, AdditiveIsAccurate) {
  Fixture f("additive", 3, 8);
  AnovaGpOptions opts;
  opts.local = small_options();
  SimCache cache(f.sim);
  const auto build = build_anova_gp(cache, f.anchor, opts);
  Rng rng(17);
  for (int k = 0; k < 20; ++k) {
    const Eigen::VectorXd xi = f.sim->inputs().sample(rng);
    const Eigen::VectorXd truth = f.sim->evaluate(xi);
    EXPECT_LT((build.emulator.predict_mean(xi) - truth).squaredNorm() / truth.squaredNorm(), 1e-6);
    EXPECT_TRUE((build.emulator.predict_variance(xi).array() >= 0.0).all());
  }
  // Every term vanishes at the anchor; the fitted jitter leaves a small residue.
  const Eigen::VectorXd at_anchor = f.sim->evaluate(f.anchor.c);
  EXPECT_LT((build.emulator.predict_mean(f.anchor.c) - at_anchor).norm(), 1e-5 * at_anchor.norm());
}

TEST(AnovaGp, ConstantSimulatorIsExact) {
  const auto sim = analytic_bank("constant", 3, 4);
  SimCache cache(sim);
  const auto build = build_anova_gp(cache, AnchorPoint::mean_of(sim->inputs()), {});
  EXPECT_TRUE(build.emulator.locals().empty());
  EXPECT_EQ(build.emulator.predict_mean(Eigen::Vector3d(0.1, 0.2, 0.3)), sim->evaluate(Eigen::Vector3d(0.4, 0.5, 0.6)));
}

TEST(AnovaGp, ThreadCountDoesNotChangeResult) {
  Fixture f("polynomial-mix", 3, 5);
  AnovaGpOptions opts;
  opts.local = small_options();
  SimCache c1(f.sim), c3(f.sim);
  const auto a = build_anova_gp(c1, f.anchor, opts);
  opts.threads = 3;
  opts.decompose.threads = 3;
  const auto b = build_anova_gp(c3, f.anchor, opts);
  const Eigen::Vector3d xi(0.2, 0.4, 0.9);
  EXPECT_EQ(a.emulator.predict_mean(xi), b.emulator.predict_mean(xi));
}

TEST(AnovaGp, ConstructorChecksKeys) {
  Fixture f("additive", 2, 3);
  std::map<AnovaIndex, LocalGpEmulator, IndexLess> none;
  EXPECT_THROW(AnovaGpEmulator(f.dec.selection, f.anchor, f.dec.anchor_output, none), std::invalid_argument);
  std::map<AnovaIndex, LocalGpEmulator, IndexLess> locals;
  for (const auto& [t, data] : f.dec.datasets) {
    locals.emplace(t, fit_local(t, data.grid.points, data.values, 1e-2, {}));
  }
  EXPECT_NO_THROW(AnovaGpEmulator(f.dec.selection, f.anchor, f.dec.anchor_output, locals));
  locals.emplace(AnovaIndex{0, 1}, locals.at(AnovaIndex{0}));
  EXPECT_THROW(AnovaGpEmulator(f.dec.selection, f.anchor, f.dec.anchor_output, locals), std::invalid_argument);
}

TEST(Sgp, MatchedBudget) {
  IndexSelection sel;
  sel.selected = {{AnovaIndex{}}, {AnovaIndex{0}, AnovaIndex{1}, AnovaIndex{2}}, {AnovaIndex{0, 1}}};
  EXPECT_EQ(matched_sgp_budget(30, sel), 120u);
}

TEST(Sgp, LearnsSmoothSimulator) {
  const auto sim = analytic_bank("rank-one-product", 2, 6);
  SgpOptions o;
  o.n_train = 40;
  o.seed = 3;
  o.gp.restarts = 2;
  const SgpEmulator sgp = train_sgp(*sim, o);
  EXPECT_EQ(sgp.train_inputs.rows(), 40);
  EXPECT_GE(sgp.rank(), 1u);
  Rng rng(8);
  for (int k = 0; k < 10; ++k) {
    const Eigen::VectorXd xi = sim->inputs().sample(rng);
    const Eigen::VectorXd truth = sim->evaluate(xi);
    EXPECT_LT((sgp.predict_mean(xi) - truth).squaredNorm() / truth.squaredNorm(), 1e-3);
  }
}
