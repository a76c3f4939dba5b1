#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "json.hpp"

#include "cyclordf/asymptotic.hpp"
#include "cyclordf/errors.hpp"
#include "cyclordf/waterfill.hpp"

using namespace cyclordf;

namespace {

// Reverse water-filling by active-set enumeration over the sorted eigenvalues.
std::pair<double, double> enumerate_water_level(std::vector<double> lam, double d) {
  std::sort(lam.begin(), lam.end());
  const int n = static_cast<int>(lam.size());
  double below = 0.0;
  for (int k = 0; k < n; ++k) {
    const double theta = (n * d - below) / (n - k);
    if ((k == 0 || lam[k - 1] <= theta) && theta <= lam[k]) {
      double r = 0.0;
      for (double l : lam) r += std::max(0.0, 0.5 * std::log2(l / theta));
      return {theta, r / n};
    }
    below += lam[k];
  }
  return {lam.back(), 0.0};
}

nlohmann::json fixture() {
  std::ifstream in(std::string(CYCLORDF_FIXTURE_DIR) + "/two_phase_oracle.json");
  return nlohmann::json::parse(in);
}

}  // namespace

TEST(SolveTheta, ScalarClosedForm) {
  const std::vector<double> v{4.0};
  for (double d : {0.1, 0.5, 1.0, 2.0, 3.9}) {
    const auto pt = solve_theta(flat_field(v, 8), d);
    EXPECT_NEAR(pt.rate, 0.5 * std::log2(4.0 / d), 1e-9);
    EXPECT_NEAR(pt.theta, d, 1e-9);
  }
}

TEST(SolveTheta, StationaryPipelineSigma4) {
  SamplingPlan plan;
  plan.p = 1;
  plan.epsilon = Epsilon::from_double(0.0);
  plan.n = 1;
  PipelineOptions opt;
  opt.field.grid_size = 64;
  const auto e = rdf_sync(AfModel::white(4.0), plan, 1.0, opt);
  EXPECT_NEAR(e.point.rate, 1.0, 1e-9);
}

TEST(SolveTheta, TwoPhaseFixture) {
  const auto fx = fixture();
  const auto vars = fx.at("variances").get<std::vector<double>>();
  const double d = fx.at("D").get<double>();
  const auto [theta, rate] = enumerate_water_level(vars, d);
  EXPECT_DOUBLE_EQ(theta, fx.at("theta").get<double>());
  EXPECT_NEAR(rate, fx.at("rate").get<double>(), 1e-15);
  EXPECT_NEAR(rate, std::log2(9.0) / 4, 1e-15);
  const auto pt = solve_theta(flat_field(vars, 16), d);
  EXPECT_NEAR(pt.rate, fx.at("rate").get<double>(), 1e-9);
  EXPECT_NEAR(pt.theta, theta, 1e-9);
}

TEST(SolveTheta, RandomSpectraMatchEnumeration) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.01, 10.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> lam(1 + trial % 17);
    for (auto& l : lam) l = u(rng);
    const double avg = std::accumulate(lam.begin(), lam.end(), 0.0) / lam.size();
    const double d = avg * std::uniform_real_distribution<double>(0.02, 0.98)(rng);
    const auto [theta, rate] = enumerate_water_level(lam, d);
    const auto pt = solve_theta(flat_field(lam, 4), d);
    EXPECT_NEAR(pt.theta, theta, 1e-9 * avg);
    EXPECT_NEAR(pt.rate, rate, 1e-9);
    EXPECT_NEAR(distortion_of_theta(flat_field(lam, 4), pt.theta), d, 1e-11 * avg);
  }
}

TEST(SolveTheta, ConstraintInactive) {
  const std::vector<double> v{1.0, 9.0};
  const auto pt = solve_theta(flat_field(v, 4), 6.0);
  EXPECT_TRUE(pt.constraint_inactive);
  EXPECT_EQ(pt.rate, 0.0);
  EXPECT_DOUBLE_EQ(pt.theta, 9.0);
  const auto edge = solve_theta(flat_field(v, 4), 5.0);
  EXPECT_FALSE(edge.constraint_inactive);
  EXPECT_EQ(edge.rate, 0.0);
}

TEST(SolveTheta, RejectsNonPositiveDistortion) {
  const std::vector<double> v{1.0};
  EXPECT_THROW(solve_theta(flat_field(v, 4), 0.0), DomainError);
  EXPECT_THROW(solve_theta(flat_field(v, 4), -1.0), DomainError);
  EXPECT_THROW(rate_of_theta(flat_field(v, 4), 0.0), DomainError);
}

TEST(SolveTheta, PropertyDecreasingConvexInD) {
  const auto m = AfModel::trapezoid_example(0.4);
  SamplingPlan plan;
  plan.epsilon = Epsilon::parse("pi/7");
  plan.n = 4;
  PipelineOptions opt;
  opt.field.grid_size = 64;
  const auto field = field_for_plan(m, resolve(plan, m), opt);
  std::vector<double> r;
  for (int k = 1; k <= 40; ++k) r.push_back(solve_theta(field, 0.1 * k).rate);
  for (std::size_t i = 1; i < r.size(); ++i) EXPECT_LT(r[i], r[i - 1]);
  for (std::size_t i = 2; i < r.size(); ++i) EXPECT_GE(r[i] - 2 * r[i - 1] + r[i - 2], -1e-9);
}

TEST(FiniteBlock, DiagonalMatchesEnumeration) {
  Eigen::MatrixXd c = Eigen::Vector3d(0.5, 2.0, 6.0).asDiagonal();
  const auto b = finite_block_rdf(c, 1.0);
  const auto [theta, rate] = enumerate_water_level({0.5, 2.0, 6.0}, 1.0);
  EXPECT_NEAR(b.theta, theta, 1e-10);
  EXPECT_NEAR(b.rate, rate, 1e-10);
}

TEST(FiniteBlock, ErrorCovarianceHasTraceLD) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  Eigen::MatrixXd a(6, 6);
  for (int i = 0; i < 36; ++i) a(i / 6, i % 6) = g(rng);
  const Eigen::MatrixXd c = a * a.transpose();
  const double d = 0.3 * c.trace() / 6;
  const auto b = finite_block_rdf(c, d);
  const auto s = test_channel_error_covariance(c, b.theta);
  EXPECT_NEAR(s.trace() / 6, d, 1e-9 * c.trace());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c - s);
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-9 * c.trace());
}

TEST(FiniteBlock, RejectsIndefinite) {
  Eigen::Matrix2d c;
  c << 1, 2, 2, 1;
  EXPECT_THROW(finite_block_rdf(c, 0.5), DomainError);
}
