#include <gtest/gtest.h>

#include <cmath>

#include "anovagp/pca.hpp"
#include "anovagp/rng.hpp"

using namespace anovagp;

namespace {

Eigen::MatrixXd random_low_rank(Eigen::Index d, Eigen::Index n, Eigen::Index rank, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd a(d, rank), b(rank, n);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = rng.uniform(-1.0, 1.0);
  for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = rng.uniform(-1.0, 1.0) * std::pow(0.3, i % rank);
  Eigen::MatrixXd y = a * b;
  for (Eigen::Index i = 0; i < d; ++i) y.row(i).array() += rng.uniform(-2.0, 2.0);
  return y;
}

}  // namespace

TEST(Pca, LineDataHandOracle) {
  // Samples a_j * v with a = (-1, 0, 1) and unit v: covariance (1/N) sum a^2 = 2/3.
  Eigen::VectorXd v(2);
  v << 0.6, -0.8;
  Eigen::MatrixXd y(2, 3);
  y << -v, Eigen::VectorXd::Zero(2), v;
  const PcaFit fit = fit_pca(y, 1e-2);
  ASSERT_EQ(fit.model.rank(), 1u);
  EXPECT_NEAR(fit.model.eigenvalues(0), 2.0 / 3.0, 1e-14);
  EXPECT_NEAR(fit.model.total_variance, 2.0 / 3.0, 1e-14);
  // Largest-magnitude entry positive: -v.
  EXPECT_NEAR(fit.model.components(0, 0), -0.6, 1e-14);
  EXPECT_NEAR(fit.model.components(1, 0), 0.8, 1e-14);
  EXPECT_NEAR(fit.targets(0, 0), 1.0, 1e-14);
  EXPECT_NEAR(fit.targets(2, 0), -1.0, 1e-14);
}

TEST(Pca, GramAndCovariancePathsAgree) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Eigen::Index d = 5 + static_cast<Eigen::Index>(seed * 4);
    const Eigen::MatrixXd y = random_low_rank(d, 15, 6, seed);
    const PcaFit g = fit_pca(y, 1e-6, PcaMethod::Gram);
    const PcaFit c = fit_pca(y, 1e-6, PcaMethod::Covariance);
    ASSERT_EQ(g.model.rank(), c.model.rank());
    EXPECT_LT((g.model.eigenvalues - c.model.eigenvalues).norm(), 1e-10 * c.model.eigenvalues.norm());
    EXPECT_LT((g.model.components - c.model.components).norm(), 1e-8 * std::sqrt(static_cast<double>(g.model.rank())));
    EXPECT_NEAR(g.model.total_variance, c.model.total_variance, 1e-12 * c.model.total_variance);
  }
}

TEST(Pca, RetainsRequestedVarianceWithSmallestRank) {
  const Eigen::MatrixXd y = random_low_rank(30, 12, 8, 3);
  const Eigen::VectorXd spectrum = pca_spectrum(y);
  for (double tol : {0.5, 0.1, 1e-2, 1e-4}) {
    const PcaFit fit = fit_pca(y, tol);
    const std::size_t r = fit.model.rank();
    const double total = spectrum.sum();
    EXPECT_GE(spectrum.head(static_cast<Eigen::Index>(r)).sum() / total, 1.0 - tol);
    if (r > 0) {
      EXPECT_LE(spectrum.head(static_cast<Eigen::Index>(r) - 1).sum() / total, 1.0 - tol);
    }
  }
}

TEST(Pca, ReconstructionErrorIsDiscardedVariance) {
  const Eigen::MatrixXd y = random_low_rank(20, 16, 10, 5);
  const Eigen::VectorXd spectrum = pca_spectrum(y);
  const PcaFit fit = fit_pca(y, 5e-2);
  const auto r = static_cast<Eigen::Index>(fit.model.rank());
  double err = 0.0;
  for (Eigen::Index j = 0; j < y.cols(); ++j) {
    err += (reconstruct(fit.model, fit.targets.row(j).transpose()) - y.col(j)).squaredNorm();
  }
  err /= static_cast<double>(y.cols());
  const double discarded = spectrum.tail(spectrum.size() - r).sum();
  EXPECT_NEAR(err, discarded, 1e-8 * discarded);
}

TEST(Pca, ComponentsOrthonormalAndProjectionConsistent) {
  const Eigen::MatrixXd y = random_low_rank(40, 10, 5, 9);
  const PcaFit fit = fit_pca(y, 1e-3);
  const auto r = static_cast<Eigen::Index>(fit.model.rank());
  const Eigen::MatrixXd gram = fit.model.components.transpose() * fit.model.components;
  EXPECT_LT((gram - Eigen::MatrixXd::Identity(r, r)).norm(), 1e-12);
  for (Eigen::Index j = 0; j < y.cols(); ++j) {
    EXPECT_LT((project(fit.model, y.col(j)) - fit.targets.row(j).transpose()).norm(), 1e-12);
  }
  for (Eigen::Index k = 0; k < r; ++k) {
    Eigen::Index arg;
    fit.model.components.col(k).cwiseAbs().maxCoeff(&arg);
    EXPECT_GT(fit.model.components(arg, k), 0.0);
  }
  for (Eigen::Index k = 1; k < r; ++k) EXPECT_GE(fit.model.eigenvalues(k - 1), fit.model.eigenvalues(k));
}

TEST(Pca, ZeroVarianceGivesRankZero) {
  const Eigen::MatrixXd y = Eigen::VectorXd::LinSpaced(6, 1.0, 2.0).replicate(1, 4);
  const PcaFit fit = fit_pca(y, 1e-2);
  EXPECT_EQ(fit.model.rank(), 0u);
  EXPECT_EQ(fit.targets.cols(), 0);
  EXPECT_EQ(fit.targets.rows(), 4);
  EXPECT_LT((fit.model.mean - y.col(0)).norm(), 1e-15);
  EXPECT_LT((reconstruct(fit.model, Eigen::VectorXd()) - y.col(0)).norm(), 1e-15);
}

TEST(Pca, SingleSampleGivesRankZero) {
  const PcaFit fit = fit_pca(Eigen::MatrixXd::Ones(5, 1), 1e-2);
  EXPECT_EQ(fit.model.rank(), 0u);
}

TEST(Pca, InvalidArguments) {
  EXPECT_THROW(fit_pca(Eigen::MatrixXd(3, 0), 1e-2), std::invalid_argument);
  EXPECT_THROW(fit_pca(Eigen::MatrixXd::Ones(3, 2), 0.0), std::invalid_argument);
  EXPECT_THROW(fit_pca(Eigen::MatrixXd::Ones(3, 2), 1.0), std::invalid_argument);
  const PcaFit fit = fit_pca(random_low_rank(4, 6, 2, 1), 1e-3);
  EXPECT_THROW(project(fit.model, Eigen::VectorXd::Zero(3)), std::invalid_argument);
  EXPECT_THROW(reconstruct(fit.model, Eigen::VectorXd::Zero(fit.model.rank() + 1)), std::invalid_argument);
}
