#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "parsimix/optimizer.hpp"

namespace parsimix {
namespace {

const double kInf = std::numeric_limits<double>::infinity();

TEST(NelderMead, Quadratic) {
  auto f = [](const Eigen::VectorXd& x) { return (x - Eigen::Vector3d(1, -2, 3)).squaredNorm() + 5.0; };
  const Eigen::VectorXd lo = Eigen::Vector3d::Constant(-kInf), hi = Eigen::Vector3d::Constant(kInf);
  NelderMeadOptions o;
  o.max_evals = 20000;
  const NelderMeadResult r = nelder_mead_bounded(f, Eigen::Vector3d::Zero(), lo, hi, o);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.x[0], 1.0, 1e-4);
  EXPECT_NEAR(r.x[1], -2.0, 1e-4);
  EXPECT_NEAR(r.x[2], 3.0, 1e-4);
}

TEST(NelderMead, ActiveLowerBound) {
  auto f = [](const Eigen::VectorXd& x) { return (x[0] + 1.0) * (x[0] + 1.0) + (x[1] - 2.0) * (x[1] - 2.0); };
  const Eigen::Vector2d lo(0.0, -kInf), hi = Eigen::Vector2d::Constant(kInf);
  const NelderMeadResult r = nelder_mead_bounded(f, Eigen::Vector2d(1, 1), lo, hi, {});
  EXPECT_EQ(r.x[0], 0.0);
  EXPECT_NEAR(r.x[1], 2.0, 1e-4);
}

TEST(NelderMead, BudgetExhaustionReturnsBest) {
  auto f = [](const Eigen::VectorXd& x) { return x.squaredNorm(); };
  const Eigen::VectorXd lo = Eigen::VectorXd::Constant(10, -kInf), hi = Eigen::VectorXd::Constant(10, kInf);
  NelderMeadOptions o;
  o.max_evals = 30;
  const NelderMeadResult r = nelder_mead_bounded(f, Eigen::VectorXd::Ones(10), lo, hi, o);
  EXPECT_FALSE(r.converged);
  EXPECT_LE(r.evals, 30u);
  EXPECT_LE(r.f, 10.0);
}

TEST(NelderMead, NonFiniteTreatedAsInfinite) {
  auto f = [](const Eigen::VectorXd& x) { return x[0] < 0.5 ? std::nan("") : (x[0] - 2) * (x[0] - 2); };
  const NelderMeadResult r =
      nelder_mead_bounded(f, Eigen::VectorXd::Constant(1, 1.0), Eigen::VectorXd::Constant(1, -kInf),
                          Eigen::VectorXd::Constant(1, kInf), {});
  EXPECT_NEAR(r.x[0], 2.0, 1e-4);
}

TEST(NelderMead, Deterministic) {
  auto f = [](const Eigen::VectorXd& x) { return std::pow(x[0] - 0.3, 2) + 10 * std::pow(x[1] - x[0] * x[0], 2); };
  const Eigen::Vector2d lo = Eigen::Vector2d::Constant(-kInf), hi = Eigen::Vector2d::Constant(kInf);
  const auto a = nelder_mead_bounded(f, Eigen::Vector2d(2, 2), lo, hi, {});
  const auto b = nelder_mead_bounded(f, Eigen::Vector2d(2, 2), lo, hi, {});
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.evals, b.evals);
}

TEST(NelderMead, RejectsBadInput) {
  auto f = [](const Eigen::VectorXd& x) { return x.sum(); };
  EXPECT_THROW(nelder_mead_bounded(f, Eigen::Vector2d(0, 0), Eigen::VectorXd::Zero(1), Eigen::Vector2d(1, 1), {}),
               std::invalid_argument);
  NelderMeadOptions o;
  o.max_evals = 0;
  EXPECT_THROW(nelder_mead_bounded(f, Eigen::Vector2d(0, 0), Eigen::Vector2d(-1, -1), Eigen::Vector2d(1, 1), o),
               std::invalid_argument);
}

TEST(QuasiNewton, Quadratic) {
  auto f = [](const Eigen::VectorXd& x) { return (x - Eigen::Vector3d(1, -2, 3)).squaredNorm() + 5.0; };
  const Eigen::VectorXd lo = Eigen::Vector3d::Constant(-kInf), hi = Eigen::Vector3d::Constant(kInf);
  const NelderMeadResult r = quasi_newton_bounded(f, Eigen::Vector3d::Zero(), lo, hi, {});
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.x[0], 1.0, 1e-6);
  EXPECT_NEAR(r.x[1], -2.0, 1e-6);
  EXPECT_NEAR(r.x[2], 3.0, 1e-6);
}

TEST(QuasiNewton, Rosenbrock) {
  auto f = [](const Eigen::VectorXd& x) {
    return std::pow(1.0 - x[0], 2) + 100.0 * std::pow(x[1] - x[0] * x[0], 2);
  };
  const Eigen::Vector2d lo = Eigen::Vector2d::Constant(-kInf), hi = Eigen::Vector2d::Constant(kInf);
  QuasiNewtonOptions o;
  o.max_evals = 20000;
  const NelderMeadResult r = quasi_newton_bounded(f, Eigen::Vector2d(-1.2, 1.0), lo, hi, o);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.x[0], 1.0, 1e-4);
  EXPECT_NEAR(r.x[1], 1.0, 1e-4);
}

TEST(QuasiNewton, ActiveLowerBound) {
  auto f = [](const Eigen::VectorXd& x) { return (x[0] + 1.0) * (x[0] + 1.0) + (x[1] - 2.0) * (x[1] - 2.0); };
  const Eigen::Vector2d lo(0.0, -kInf), hi = Eigen::Vector2d::Constant(kInf);
  const NelderMeadResult r = quasi_newton_bounded(f, Eigen::Vector2d(1, 1), lo, hi, {});
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.x[0], 0.0);
  EXPECT_NEAR(r.x[1], 2.0, 1e-6);
}

TEST(QuasiNewton, EvenFunctionOfBoundedCoordinate) {
  // f depends on x0 only through x0^2 and prefers x0^2 = 0.25; the gradient
  // vanishes at the bound x0 = 0, which must not stop the search there.
  auto f = [](const Eigen::VectorXd& x) { return std::pow(x[0] * x[0] - 0.25, 2) + std::pow(x[1] - 1.0, 2); };
  const Eigen::Vector2d lo(0.0, -kInf), hi = Eigen::Vector2d::Constant(kInf);
  const NelderMeadResult r = quasi_newton_bounded(f, Eigen::Vector2d(1, 0), lo, hi, {});
  EXPECT_NEAR(r.x[0], 0.5, 1e-5);
  EXPECT_NEAR(r.x[1], 1.0, 1e-5);
}

TEST(QuasiNewton, BudgetExhaustionReturnsBest) {
  auto f = [](const Eigen::VectorXd& x) { return x.squaredNorm(); };
  const Eigen::VectorXd lo = Eigen::VectorXd::Constant(10, -kInf), hi = Eigen::VectorXd::Constant(10, kInf);
  QuasiNewtonOptions o;
  o.max_evals = 15;
  const NelderMeadResult r = quasi_newton_bounded(f, Eigen::VectorXd::Ones(10), lo, hi, o);
  EXPECT_FALSE(r.converged);
  EXPECT_LE(r.evals, 15u);
  EXPECT_LE(r.f, 10.0);
}

TEST(QuasiNewton, Deterministic) {
  auto f = [](const Eigen::VectorXd& x) { return std::pow(x[0] - 0.3, 2) + 10 * std::pow(x[1] - x[0] * x[0], 2); };
  const Eigen::Vector2d lo = Eigen::Vector2d::Constant(-kInf), hi = Eigen::Vector2d::Constant(kInf);
  const auto a = quasi_newton_bounded(f, Eigen::Vector2d(2, 2), lo, hi, {});
  const auto b = quasi_newton_bounded(f, Eigen::Vector2d(2, 2), lo, hi, {});
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.evals, b.evals);
}

TEST(QuasiNewton, RejectsBadInput) {
  auto f = [](const Eigen::VectorXd& x) { return x.squaredNorm(); };
  EXPECT_THROW(quasi_newton_bounded(f, Eigen::Vector2d::Zero(), Eigen::VectorXd::Zero(1), Eigen::Vector2d::Ones(), {}),
               std::invalid_argument);
  QuasiNewtonOptions o;
  o.max_evals = 0;
  EXPECT_THROW(quasi_newton_bounded(f, Eigen::Vector2d::Zero(), Eigen::Vector2d::Constant(-1),
                                    Eigen::Vector2d::Ones(), o),
               std::invalid_argument);
}

}  // namespace
}  // namespace parsimix
