#include "spl/ode.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

using namespace spl;

namespace {

auto ignore = [](double, const Matrix&) {};

}  // namespace

TEST(Rk45, ExponentialDecayHitsRecordTimesExactly) {
  Matrix y = Matrix::Constant(1, 1, 1.0);
  const std::vector<double> times = {0.0, 0.5, 1.0, 2.0, 5.0};
  std::vector<double> seen;
  integrate_rk45([](const Matrix& v) { return Matrix(-v); }, y, 0.0, times, Rk45Options{},
                 [&](double t, const Matrix& v) {
                   seen.push_back(t);
                   EXPECT_NEAR(v(0, 0), std::exp(-t), 1e-8);
                 },
                 ignore);
  EXPECT_EQ(seen, times);
}

TEST(Rk45, HarmonicOscillatorConservesEnergy) {
  Matrix y(2, 1);
  y << 1.0, 0.0;
  const std::vector<double> times = {10.0};
  Rk45Options o;
  o.rel_tol = 1e-11;
  o.abs_tol = 1e-11;
  const Rk45Stats stats = integrate_rk45(
      [](const Matrix& v) {
        Matrix d(2, 1);
        d << v(1, 0), -v(0, 0);
        return d;
      },
      y, 0.0, times, o, ignore, ignore);
  EXPECT_NEAR(y(0, 0), std::cos(10.0), 1e-8);
  EXPECT_NEAR(y(1, 0), -std::sin(10.0), 1e-8);
  EXPECT_GT(stats.accepted, 0);
  EXPECT_EQ(stats.rhs_evals, 2 + 6 * (stats.accepted + stats.rejected));  // plus the initial-step probe
}

TEST(Rk45, MatrixStateLinearSystem) {
  Matrix a(2, 2);
  a << 0.0, 1.0, -2.0, -3.0;  // eigenvalues -1, -2
  Matrix y = Matrix::Identity(2, 2);
  const std::vector<double> times = {1.0};
  integrate_rk45([&](const Matrix& v) { return Matrix(a * v); }, y, 0.0, times, Rk45Options{}, ignore, ignore);
  // exp(A) via eigen-decomposition by hand: A = V diag(-1, -2) V^{-1}.
  Matrix v(2, 2);
  v << 1.0, 1.0, -1.0, -2.0;
  const Matrix expected = v * Vector(Eigen::Vector2d(std::exp(-1.0), std::exp(-2.0))).asDiagonal() * v.inverse();
  EXPECT_LT((y - expected).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Rk45, OnStepSeesEveryAcceptedStep) {
  Matrix y = Matrix::Constant(1, 1, 1.0);
  const std::vector<double> times = {3.0};
  long steps = 0;
  double last = 0.0;
  const Rk45Stats stats = integrate_rk45([](const Matrix& v) { return Matrix(-v); }, y, 0.0, times, Rk45Options{},
                                         ignore, [&](double t, const Matrix&) {
                                           EXPECT_GT(t, last);
                                           last = t;
                                           ++steps;
                                         });
  EXPECT_EQ(steps, stats.accepted);
  EXPECT_EQ(last, 3.0);
}

TEST(Rk45, BlowUpUnderflowsTheStep) {
  Matrix y = Matrix::Constant(1, 1, 1.0);
  const std::vector<double> times = {2.0};
  try {
    integrate_rk45([](const Matrix& v) { return Matrix(v.array().square()); }, y, 0.0, times, Rk45Options{}, ignore,
                   ignore);
    FAIL();
  } catch (const Error& e) {
    EXPECT_TRUE(e.kind() == ErrorKind::StepSizeUnderflow || e.kind() == ErrorKind::NonConvergence);
  }
}
