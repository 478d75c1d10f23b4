#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "anovagp/diffusion.hpp"
#include "anovagp/errors.hpp"
#include "anovagp/rng.hpp"

using namespace anovagp;

namespace {

// -Laplace(u) = 1 on (-1,1)^2, u = 0 on the boundary, at the origin:
// sum over odd m, n of 64 (-1)^((m+n)/2 - 1) / (pi^4 m n (m^2 + n^2)).
double series_center(int terms) {
  const double pi4 = std::pow(std::numbers::pi, 4);
  double s = 0.0;
  for (int m = 1; m < 2 * terms; m += 2) {
    for (int n = 1; n < 2 * terms; n += 2) {
      const double sign = ((m + n) / 2 - 1) % 2 == 0 ? 1.0 : -1.0;
      s += 64.0 * sign / (pi4 * m * n * (m * m + n * n));
    }
  }
  return s;
}

double center_value(std::size_t elements) {
  DiffusionSimulator sim({elements, 1});
  const Eigen::VectorXd u = sim.evaluate(Eigen::VectorXd::Ones(1));
  const std::size_t mid = elements / 2;
  return u(static_cast<Eigen::Index>(mid + mid * (elements + 1)));
}

}  // namespace

TEST(DiffusionOracle, SeriesConverged) {
  EXPECT_NEAR(series_center(400), series_center(800), 5e-9);
  EXPECT_NEAR(series_center(800), 0.2946854, 1e-6);
}

TEST(Diffusion, CenterValueMatchesSeries) {
  const double exact = series_center(800);
  EXPECT_LT(std::abs(center_value(32) - exact) / exact, 1e-3);
}

TEST(Diffusion, SecondOrderConvergenceAtCenter) {
  const double exact = series_center(800);
  const double e8 = std::abs(center_value(8) - exact);
  const double e16 = std::abs(center_value(16) - exact);
  const double e32 = std::abs(center_value(32) - exact);
  EXPECT_GE(e8 / e16, 3.0);
  EXPECT_LE(e8 / e16, 5.0);
  EXPECT_GE(e16 / e32, 3.0);
  EXPECT_LE(e16 / e32, 5.0);
}

TEST(Diffusion, ScalingIdentity) {
  // u(alpha xi) = u(xi) / alpha
  DiffusionSimulator sim({16, 2});
  Rng rng(3);
  const Eigen::VectorXd xi = sim.inputs().sample(rng) * 0.5;
  const Eigen::VectorXd u1 = sim.evaluate(xi);
  const Eigen::VectorXd u2 = sim.evaluate(1.7 * xi);
  EXPECT_LT((u1 - 1.7 * u2).norm(), 1e-10 * u1.norm());
}

TEST(Diffusion, BoundaryIsZeroAndSolutionPositive) {
  DiffusionSimulator sim({8, 2});
  Rng rng(4);
  const Eigen::VectorXd u = sim.evaluate(sim.inputs().sample(rng));
  ASSERT_EQ(u.size(), 81);
  for (int j = 0; j <= 8; ++j) {
    for (int i = 0; i <= 8; ++i) {
      const double v = u(i + 9 * j);
      if (i == 0 || j == 0 || i == 8 || j == 8) {
        EXPECT_EQ(v, 0.0);
      } else {
        EXPECT_GT(v, 0.0);
      }
    }
  }
}

TEST(Diffusion, ConstantCoefficientIsSymmetric) {
  DiffusionSimulator sim({12, 3});
  const Eigen::VectorXd u = sim.evaluate(Eigen::VectorXd::Constant(9, 0.3));
  for (int j = 0; j <= 12; ++j) {
    for (int i = 0; i <= 12; ++i) {
      EXPECT_NEAR(u(i + 13 * j), u(j + 13 * i), 1e-13);
      EXPECT_NEAR(u(i + 13 * j), u((12 - i) + 13 * j), 1e-13);
    }
  }
}

TEST(Diffusion, CgMatchesDirect) {
  DiffusionSimulator direct({16, 2, LinearSolver::Direct});
  DiffusionSimulator cg({16, 2, LinearSolver::ConjugateGradient, 1e-13});
  Rng rng(5);
  const Eigen::VectorXd xi = direct.inputs().sample(rng);
  const Eigen::VectorXd a = direct.evaluate(xi);
  EXPECT_LT((a - cg.evaluate(xi)).norm(), 1e-9 * a.norm());
}

TEST(Diffusion, MassNormOfConstantIsDomainArea) {
  DiffusionSimulator sim({10, 2});
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(sim.output_dim()));
  EXPECT_NEAR(sim.output_norm(ones), 2.0, 1e-13);
  // Linear function x on the grid: integral of x^2 over the square is 4/3.
  Eigen::VectorXd x(ones.size());
  for (int j = 0; j <= 10; ++j) {
    for (int i = 0; i <= 10; ++i) x(i + 11 * j) = -1.0 + 0.2 * i;
  }
  EXPECT_NEAR(sim.output_norm(x) * sim.output_norm(x), 4.0 / 3.0, 1e-12);
}

TEST(Diffusion, SubdomainLayout) {
  DiffusionSimulator conforming({6, 3});
  const auto& sub = conforming.element_subdomains();
  ASSERT_EQ(sub.size(), 36u);
  EXPECT_EQ(sub[0], 0u);
  EXPECT_EQ(sub[2], 1u);    // (ex=2, ey=0)
  EXPECT_EQ(sub[5 + 6 * 5], 8u);
  EXPECT_EQ(sub[0 + 6 * 2], 3u);

  // 64 elements into 6 strips: every element lands in exactly one cell.
  DiffusionSimulator full({64, 6});
  std::vector<std::size_t> counts(36, 0);
  for (std::size_t s : full.element_subdomains()) ++counts.at(s);
  for (std::size_t c : counts) EXPECT_GT(c, 0u);
  EXPECT_EQ(full.inputs().dim(), 36u);
  EXPECT_EQ(full.output_dim(), 65u * 65u);
}

TEST(Diffusion, InvalidProblems) {
  EXPECT_THROW(DiffusionSimulator({0, 1}), std::invalid_argument);
  EXPECT_THROW(DiffusionSimulator({4, 0}), std::invalid_argument);
  EXPECT_THROW(DiffusionSimulator({2, 3}), std::invalid_argument);
  // Centroid of element 1 sits exactly on the first internal boundary.
  EXPECT_THROW(DiffusionSimulator({6, 4}), std::invalid_argument);
}

TEST(Diffusion, InvalidCoefficients) {
  DiffusionSimulator sim({4, 2});
  EXPECT_THROW(sim.evaluate(Eigen::VectorXd::Ones(3)), std::invalid_argument);
  Eigen::VectorXd xi = Eigen::VectorXd::Ones(4);
  xi(2) = 0.0;
  EXPECT_THROW(sim.evaluate(xi), std::invalid_argument);
  xi(2) = std::nan("");
  EXPECT_THROW(sim.evaluate(xi), std::invalid_argument);
}
