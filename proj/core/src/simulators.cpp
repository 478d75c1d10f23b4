#include "anovagp/simulator.hpp"

#include <cmath>
#include <stdexcept>

#include "anovagp/rng.hpp"

namespace anovagp {

InputSpace::InputSpace(std::vector<Interval> intervals) : intervals_(std::move(intervals)) {
  for (const auto& iv : intervals_) {
    if (!(iv.lo < iv.hi)) throw std::invalid_argument("InputSpace: empty interval");
  }
}

double InputSpace::marginal_density(std::size_t i, double x) const {
  const Interval& iv = interval(i);
  return iv.contains(x) ? 1.0 / iv.length() : 0.0;
}

Eigen::VectorXd InputSpace::mean() const {
  Eigen::VectorXd c(static_cast<Eigen::Index>(dim()));
  for (std::size_t i = 0; i < dim(); ++i) c(static_cast<Eigen::Index>(i)) = intervals_[i].midpoint();
  return c;
}

bool InputSpace::contains(const Eigen::VectorXd& xi) const {
  if (static_cast<std::size_t>(xi.size()) != dim()) return false;
  for (std::size_t i = 0; i < dim(); ++i) {
    if (!intervals_[i].contains(xi(static_cast<Eigen::Index>(i)))) return false;
  }
  return true;
}

Eigen::VectorXd InputSpace::sample(Rng& rng) const {
  Eigen::VectorXd x(static_cast<Eigen::Index>(dim()));
  for (std::size_t i = 0; i < dim(); ++i) {
    x(static_cast<Eigen::Index>(i)) = rng.uniform(intervals_[i].lo, intervals_[i].hi);
  }
  return x;
}

Eigen::VectorXd InputSpace::sample(Rng& rng, const std::vector<std::size_t>& coords) const {
  Eigen::VectorXd x(static_cast<Eigen::Index>(coords.size()));
  for (std::size_t k = 0; k < coords.size(); ++k) {
    const Interval& iv = interval(coords[k]);
    x(static_cast<Eigen::Index>(k)) = rng.uniform(iv.lo, iv.hi);
  }
  return x;
}

double Simulator::output_norm(const Eigen::VectorXd& u) const { return u.norm(); }

namespace {

Eigen::VectorXd pattern(std::size_t d, double a, double b, double phase) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(d));
  for (std::size_t j = 0; j < d; ++j) {
    v(static_cast<Eigen::Index>(j)) = std::cos(a + b * static_cast<double>(j + 1) + phase);
  }
  return v;
}

class AnalyticSimulator : public Simulator {
 public:
  AnalyticSimulator(std::string name, std::size_t m, std::size_t d)
      : name_(std::move(name)), inputs_(m, Interval{0.0, 1.0}), d_(d) {
    if (m == 0 || d == 0) throw std::invalid_argument("analytic_bank: dimensions must be >= 1");
  }
  std::string name() const override { return name_; }
  const InputSpace& inputs() const override { return inputs_; }
  std::size_t output_dim() const override { return d_; }

 protected:
  void check(const Eigen::VectorXd& xi) const {
    if (static_cast<std::size_t>(xi.size()) != inputs_.dim()) {
      throw std::invalid_argument(name_ + ": input dimension mismatch");
    }
  }
  std::size_t m() const { return inputs_.dim(); }

 private:
  std::string name_;
  InputSpace inputs_;
  std::size_t d_;
};

class Additive final : public AnalyticSimulator {
 public:
  Additive(std::size_t m, std::size_t d) : AnalyticSimulator("additive", m, d) {
    for (std::size_t i = 0; i < m; ++i) {
      a_.push_back(pattern(d, 0.3, 0.7 * static_cast<double>(i + 1), 0.0));
      b_.push_back(pattern(d, 1.1 * static_cast<double>(i + 1), 0.4, 0.5));
    }
  }
  Eigen::VectorXd evaluate(const Eigen::VectorXd& xi) const override {
    check(xi);
    Eigen::VectorXd u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(output_dim()));
    for (std::size_t i = 0; i < m(); ++i) {
      const double x = xi(static_cast<Eigen::Index>(i));
      u += std::sin(2.0 * x) * a_[i] + (x * x) * b_[i];
    }
    return u;
  }

 private:
  std::vector<Eigen::VectorXd> a_, b_;
};

class RankOneProduct final : public AnalyticSimulator {
 public:
  RankOneProduct(std::size_t m, std::size_t d)
      : AnalyticSimulator("rank-one-product", m, d),
        v_(Eigen::VectorXd::Ones(static_cast<Eigen::Index>(d)) + 0.5 * pattern(d, 0.0, 1.0, 0.0)) {}
  Eigen::VectorXd evaluate(const Eigen::VectorXd& xi) const override {
    check(xi);
    double s = 1.0;
    for (Eigen::Index i = 0; i < xi.size(); ++i) s *= 1.0 + 0.5 * xi(i);
    return s * v_;
  }

 private:
  Eigen::VectorXd v_;
};

class PolynomialMix final : public AnalyticSimulator {
 public:
  PolynomialMix(std::size_t m, std::size_t d) : AnalyticSimulator("polynomial-mix", m, d) {
    for (std::size_t i = 0; i < m; ++i) {
      a_.push_back(pattern(d, 0.2, 0.9 * static_cast<double>(i + 1), 0.1));
      for (std::size_t j = i + 1; j < m; ++j) {
        b_.push_back(0.5 * pattern(d, 0.3 * static_cast<double>(i + 1) + 0.7 * static_cast<double>(j + 1),
                                   0.11, 0.0));
      }
    }
  }
  Eigen::VectorXd evaluate(const Eigen::VectorXd& xi) const override {
    check(xi);
    Eigen::VectorXd u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(output_dim()));
    std::size_t pair = 0;
    for (std::size_t i = 0; i < m(); ++i) {
      const double xi_i = xi(static_cast<Eigen::Index>(i));
      u += xi_i * a_[i];
      for (std::size_t j = i + 1; j < m(); ++j, ++pair) {
        const double p = xi_i * xi(static_cast<Eigen::Index>(j));
        u += (p + p * p) * b_[pair];
      }
    }
    return u;
  }

 private:
  std::vector<Eigen::VectorXd> a_, b_;
};

class Constant final : public AnalyticSimulator {
 public:
  Constant(std::size_t m, std::size_t d) : AnalyticSimulator("constant", m, d) {
    value_ = Eigen::VectorXd::LinSpaced(static_cast<Eigen::Index>(d), 1.0, 2.0);
  }
  Eigen::VectorXd evaluate(const Eigen::VectorXd& xi) const override {
    check(xi);
    return value_;
  }

 private:
  Eigen::VectorXd value_;
};

}  // namespace

const std::vector<std::string>& analytic_bank_names() {
  static const std::vector<std::string> names = {"additive", "rank-one-product",
                                                 "polynomial-mix", "constant"};
  return names;
}

SimulatorPtr analytic_bank(const std::string& name, std::size_t input_dim,
                           std::size_t output_dim) {
  if (name == "additive") return std::make_shared<Additive>(input_dim, output_dim);
  if (name == "rank-one-product") return std::make_shared<RankOneProduct>(input_dim, output_dim);
  if (name == "polynomial-mix") return std::make_shared<PolynomialMix>(input_dim, output_dim);
  if (name == "constant") return std::make_shared<Constant>(input_dim, output_dim);
  throw std::invalid_argument("analytic_bank: unknown simulator '" + name + "'");
}

}  // namespace anovagp
