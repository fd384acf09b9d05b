#include "wfc/nelder_mead.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>

using namespace wfc;

TEST(NelderMead, Quadratic) {
  int calls = 0;
  const Objective f = [&](std::span<const double> x) {
    ++calls;
    return (x[0] - 1.0) * (x[0] - 1.0) + 4.0 * (x[1] + 2.0) * (x[1] + 2.0) + 3.0;
  };
  const std::vector<double> step{0.5, 0.5};
  const auto r = nelder_mead(f, {0.0, 0.0}, step);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.x[0], 1.0, 1e-6);
  EXPECT_NEAR(r.x[1], -2.0, 1e-6);
  EXPECT_NEAR(r.value, 3.0, 1e-12);
  EXPECT_EQ(r.evaluations, calls);
  EXPECT_LE(r.evaluations, 500);
}

TEST(NelderMead, Rosenbrock) {
  const Objective f = [](std::span<const double> x) {
    return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2);
  };
  const std::vector<double> step{0.1, 0.1};
  NelderMeadOptions o;
  o.max_evals = 5000;
  const auto r = nelder_mead(f, {-1.2, 1.0}, step, o);
  EXPECT_NEAR(r.x[0], 1.0, 1e-5);
  EXPECT_NEAR(r.x[1], 1.0, 1e-5);
  EXPECT_LT(r.value, 1e-10);
}

TEST(NelderMead, OneDimensionalPeriodic) {
  const Objective f = [](std::span<const double> x) { return -std::cos(x[0] - 0.4); };
  const std::vector<double> step{0.3};
  const auto r = nelder_mead(f, {0.0}, step);
  EXPECT_NEAR(r.x[0], 0.4, 1e-6);
  EXPECT_NEAR(r.value, -1.0, 1e-12);
}

TEST(NelderMead, EvaluationBudget) {
  const Objective f = [](std::span<const double> x) { return x[0] * x[0] + x[1] * x[1] + x[2] * x[2]; };
  const std::vector<double> step{1.0, 1.0, 1.0};
  NelderMeadOptions o;
  o.max_evals = 20;
  const auto r = nelder_mead(f, {5.0, 5.0, 5.0}, step, o);
  EXPECT_FALSE(r.converged);
  EXPECT_LE(r.evaluations, 20 + 3);
  EXPECT_LT(r.value, 75.0);
}

TEST(NelderMead, Deterministic) {
  const Objective f = [](std::span<const double> x) { return std::sin(3 * x[0]) + x[1] * x[1] + 0.1 * x[0] * x[0]; };
  const std::vector<double> step{0.2, 0.2};
  const auto a = nelder_mead(f, {0.3, 0.7}, step);
  const auto b = nelder_mead(f, {0.3, 0.7}, step);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.value, b.value);
}

TEST(NelderMead, RejectsMismatchedStep) {
  const Objective f = [](std::span<const double> x) { return x[0]; };
  const std::vector<double> step{1.0};
  EXPECT_THROW(nelder_mead(f, {0.0, 1.0}, step), std::invalid_argument);
}
