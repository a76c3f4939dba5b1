#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "cyclordf/af_model.hpp"
#include "cyclordf/errors.hpp"

using namespace cyclordf;

namespace {

// Independent trapezoid: rise on [0, r), top on [r, r+d), fall on [r+d, 2r+d).
double trap(double x, double r, double d) {
  x -= std::floor(x);
  if (x < r) return x / r;
  if (x < r + d) return 1.0;
  if (x < 2 * r + d) return 1.0 - (x - r - d) / r;
  return 0.0;
}

double oracle_af(double t, double lag, double duty) {
  const double tc = 5e-6, a = std::pow(10.0, 6.1);
  if (lag < 0) {
    t += lag;
    lag = -lag;
  }
  if (lag > 4e-6) return 0.0;
  return std::exp(-a * lag) * (2.0 + 8.0 * trap(t / tc, 0.01, duty));
}

}  // namespace

TEST(Pulse, CornerValues) {
  TrapezoidalPulse p{0.01, 0.4};
  EXPECT_DOUBLE_EQ(p(0.0), 0.0);
  EXPECT_DOUBLE_EQ(p(0.005), 0.5);
  EXPECT_DOUBLE_EQ(p(0.01), 1.0);
  EXPECT_DOUBLE_EQ(p(0.2), 1.0);
  EXPECT_NEAR(p(0.415), 0.5, 1e-12);
  EXPECT_DOUBLE_EQ(p(0.5), 0.0);
  EXPECT_DOUBLE_EQ(p(1.2), p(0.2));
  EXPECT_DOUBLE_EQ(p(-0.8), p(0.2));
}

TEST(Pulse, Validation) {
  EXPECT_THROW((TrapezoidalPulse{0.0, 0.4}).validate(), ConfigError);
  EXPECT_THROW((TrapezoidalPulse{0.01, -0.1}).validate(), ConfigError);
  EXPECT_THROW((TrapezoidalPulse{0.01, 0.99}).validate(), ConfigError);
  EXPECT_NO_THROW((TrapezoidalPulse{0.01, 0.98}).validate());
}

TEST(AfModel, MatchesIndependentFormula) {
  for (double duty : {0.4, 0.7}) {
    const auto m = AfModel::trapezoid_example(duty);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> t(-2e-5, 2e-5), lag(-5e-6, 5e-6);
    for (int i = 0; i < 2000; ++i) {
      const double a = t(rng), b = lag(rng);
      EXPECT_NEAR(m(a, b), oracle_af(a, b, duty), 1e-12) << a << " " << b;
    }
  }
}

TEST(AfModel, VarianceProfileAtZeroLag) {
  const auto m = AfModel::trapezoid_example(0.4);
  EXPECT_DOUBLE_EQ(m(0.0, 0.0), 2.0);
  EXPECT_DOUBLE_EQ(m(0.1 * 5e-6, 0.0), 10.0);
  EXPECT_DOUBLE_EQ(m.variance(0.7 * 5e-6), 2.0);
}

TEST(AfModel, CutoffBeyondMaxLag) {
  const auto m = AfModel::trapezoid_example(0.4);
  EXPECT_GT(m(1e-6, 4e-6), 0.0);
  EXPECT_EQ(m(1e-6, 4.0001e-6), 0.0);
  EXPECT_EQ(m(1e-6, -4.0001e-6), 0.0);
}

TEST(AfModel, PropertyPeriodicMirroredBounded) {
  for (double duty : {0.0, 0.4, 0.7, 0.98}) {
    const auto m = AfModel::trapezoid_example(duty);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> t(0, 5e-6), lag(-6e-6, 6e-6);
    for (int i = 0; i < 1000; ++i) {
      const double a = t(rng), b = lag(rng);
      EXPECT_NEAR(m(a, b), m(a + 5e-6, b), 1e-12);
      EXPECT_NEAR(m(a, b), m(a + b, -b), 1e-12);
      EXPECT_LE(std::abs(m(a, b)), m.gamma_bound());
    }
  }
}

TEST(AfModel, WhiteModel) {
  const auto w = AfModel::white(4.0);
  EXPECT_DOUBLE_EQ(w(0.3e-6, 0.0), 4.0);
  EXPECT_EQ(w(0.3e-6, 1e-7), 0.0);
  EXPECT_DOUBLE_EQ(w.gamma_bound(), 4.0);
}

TEST(AfModel, ProfileOffsetShiftsInTime) {
  auto a = AfModel::trapezoid_example(0.4);
  auto b = a;
  b.phi_tilde = 0.25;
  for (double t : {0.0, 1e-6, 2.3e-6}) {
    EXPECT_NEAR(b(t + 0.25 * 5e-6, 3e-7), a(t, 3e-7), 1e-12);
  }
}

TEST(FunctionAf, HardCutoff) {
  FunctionAf f([](double, double) { return 1.0; }, 1.0, 0.5, 1.0);
  EXPECT_EQ(f(0.0, 0.4), 1.0);
  EXPECT_EQ(f(0.0, 0.6), 0.0);
  EXPECT_EQ(f(0.0, -0.6), 0.0);
}

TEST(GammaC, MemorylessEqualsVariance) {
  const auto w = AfModel::white(4.0);
  const auto g = gamma_c(w, 2, 256, 256);
  EXPECT_DOUBLE_EQ(g.value, 4.0);
  EXPECT_TRUE(g.positive());
}

// Lower envelope: c(t,0) = 2 where some lag T_c/3 neighbour sits at the
// top variance 10, so the margin is 2 - 2*3*10*exp(-a T_c/3).
TEST(GammaC, NumericalExampleClosedFormAndFrozen) {
  const double closed = 2.0 - 60.0 * std::exp(-std::pow(10.0, 6.1) * 5e-6 / 3.0);
  for (double duty : {0.4, 0.7}) {
    const auto g = gamma_c(AfModel::trapezoid_example(duty), 2);
    EXPECT_EQ(g.tau_c, 3);
    EXPECT_NEAR(g.value, closed, 1e-12);
    EXPECT_NEAR(g.value, -5.3605565093458884, 1e-12);
    EXPECT_FALSE(g.positive());
  }
}

TEST(GammaC, BruteForceDenseGridOracle) {
  const double tc = 5e-6, lo = tc / 3, hi = 4e-6;
  const int nt = 1000, nl = 1000;
  double oracle = INFINITY;
  for (int i = 0; i < nt; ++i) {
    const double t = tc * i / nt;
    double worst = 0.0;
    for (int j = 0; j < nl; ++j) {
      const double lag = lo + (hi - lo) * j / (nl - 1);
      worst = std::max({worst, std::abs(oracle_af(t, lag, 0.4)), std::abs(oracle_af(t, -lag, 0.4))});
    }
    oracle = std::min(oracle, oracle_af(t, 0.0, 0.4) - 2 * 3 * worst);
  }
  const auto g = gamma_c(AfModel::trapezoid_example(0.4), 2, nt, nl);
  EXPECT_NEAR(g.value, oracle, 1e-9);
}

TEST(GammaC, PositiveForShortMemory) {
  auto m = AfModel::trapezoid_example(0.4);
  m.decay_rate = 1e7;  // correlation at T_c/3 is e^-16.7
  const auto g = gamma_c(m, 2, 512, 512);
  EXPECT_TRUE(g.positive());
  EXPECT_NEAR(g.value, 2.0 - 60.0 * std::exp(-1e7 * 5e-6 / 3.0), 1e-9);
}
