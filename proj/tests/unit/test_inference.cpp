#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "parsimix/fitter.hpp"
#include "parsimix/inference.hpp"
#include "parsimix/simulate.hpp"

namespace parsimix {
namespace {

double round2(double v) { return std::round(v * 100.0) / 100.0; }

TEST(ChisqPValue, ReportedLrtLines) {
  EXPECT_NEAR(round2(chisq_p_value(11.1, 9)), 0.27, 0.005);
  EXPECT_NEAR(round2(chisq_p_value(8.4, 12)), 0.75, 0.005);
  EXPECT_LT(chisq_p_value(16.3, 1), 0.01);
}

TEST(ChisqPValue, MatchesSeriesOracle) {
  for (int df = 1; df <= 40; ++df) {
    for (double x : {0.01, 0.5, 1.0, 3.84, 7.3, 11.1, 20.0, 55.5}) {
      EXPECT_NEAR(chisq_p_value(x, df), testing::chisq_upper_series(x, df), 1e-10) << "x=" << x << " df=" << df;
    }
  }
}

TEST(ChisqPValue, ZeroStatistic) {
  for (int df = 1; df <= 10; ++df) EXPECT_EQ(chisq_p_value(0.0, df), 1.0);
}

TEST(ChisqPValue, DegenerateDf) {
  EXPECT_EQ(chisq_p_value(0.0, 0), 1.0);
  EXPECT_EQ(chisq_p_value(0.3, 0), 0.0);
}

TEST(ChisqPValue, StrictlyDecreasing) {
  for (int df : {1, 2, 5, 12}) {
    double prev = 1.0;
    for (double x = 0.1; x < 60.0; x += 0.1) {
      const double p = chisq_p_value(x, df);
      EXPECT_LT(p, prev);
      prev = p;
    }
  }
}

TEST(ChisqPValue, RejectsInvalid) {
  EXPECT_THROW(chisq_p_value(-1.0, 2), std::invalid_argument);
  EXPECT_THROW(chisq_p_value(1.0, -1), std::invalid_argument);
  EXPECT_THROW(chisq_p_value(std::nan(""), 1), std::invalid_argument);
}

TEST(InformationCriteria, DirectFormula) {
  const InformationCriteria ic = information_criteria(100.0, 5, 100);
  EXPECT_DOUBLE_EQ(ic.aic, 110.0);
  EXPECT_NEAR(ic.bic, 123.03, 0.005);
  EXPECT_EQ(ic.k, 5u);
}

TEST(InformationCriteria, LargerModelPenalisedAtEqualDeviance) {
  const auto a = information_criteria(250.0, 4, 80);
  const auto b = information_criteria(250.0, 5, 80);
  EXPECT_GT(b.aic, a.aic);
  EXPECT_GT(b.bic, a.bic);
}

Dataset slope_data(std::uint64_t seed, double rho = 0.0) {
  Eigen::Matrix2d cov;
  cov << 1.0, rho * 0.5, rho * 0.5, 0.25;
  return simulate_lmm(testing::slope_truth(30, 4, cov, 0.7, seed));
}

TEST(LrTest, ModelAgainstItself) {
  const Dataset d = slope_data(1);
  const FitResult f = fit_model(parse_formula("Y ~ 1 + A + (1 + A | Subject)"), d, {}, {});
  const LrtResult r = lr_test(f, f);
  EXPECT_EQ(r.chisq, 0.0);
  EXPECT_EQ(r.df, 0);
  EXPECT_EQ(r.p_value, 1.0);
  EXPECT_TRUE(r.degenerate);
}

TEST(LrTest, CorrelatedVersusZcpHasOneDf) {
  const Dataset d = slope_data(2, 0.6);
  const FitResult small = fit_model(parse_formula("Y ~ 1 + A + (1 + A || Subject)"), d, {}, {});
  const FitResult large = fit_model(parse_formula("Y ~ 1 + A + (1 + A | Subject)"), d, {}, {});
  const LrtResult r = lr_test(small, large);
  EXPECT_EQ(r.df, 1);
  EXPECT_EQ(r.criterion, Criterion::REML);
  EXPECT_FALSE(r.refit_ml);
  EXPECT_NEAR(r.chisq, std::max(0.0, small.deviance - large.deviance), 1e-12);
  EXPECT_NEAR(r.p_value, chisq_p_value(r.chisq, 1), 1e-15);
}

TEST(LrTest, DifferentFixedEffectsRefitUnderMl) {
  const Dataset d = slope_data(3);
  const FitResult small = fit_model(parse_formula("Y ~ 1 + (1 | Subject)"), d, {}, {});
  const FitResult large = fit_model(parse_formula("Y ~ 1 + A + (1 + A | Subject)"), d, {}, {});
  const LrtResult r = lr_test(small, large);
  EXPECT_TRUE(r.refit_ml);
  EXPECT_EQ(r.criterion, Criterion::ML);
  EXPECT_EQ(r.df, 3);
  FitOptions ml;
  ml.criterion = Criterion::ML;
  const FitResult s2 = fit_model(parse_formula("Y ~ 1 + (1 | Subject)"), d, {}, ml);
  const FitResult l2 = fit_model(parse_formula("Y ~ 1 + A + (1 + A | Subject)"), d, {}, ml);
  EXPECT_NEAR(r.chisq, s2.deviance - l2.deviance, 1e-5);
}

TEST(LrTest, RejectsNonNested) {
  const Dataset d = slope_data(4);
  const FitResult a = fit_model(parse_formula("Y ~ 1 + A + (1 | Subject)"), d, {}, {});
  const FitResult b = fit_model(parse_formula("Y ~ 1 + A + (0 + A | Subject)"), d, {}, {});
  EXPECT_THROW(lr_test(a, b), InferenceError);
}

TEST(LrTest, RejectsDifferentData) {
  const FitResult a = fit_model(parse_formula("Y ~ 1 + A + (1 | Subject)"), slope_data(5), {}, {});
  const FitResult b = fit_model(parse_formula("Y ~ 1 + A + (1 + A | Subject)"), slope_data(6), {}, {});
  EXPECT_THROW(lr_test(a, b), InferenceError);
}

TEST(LrTest, RejectsMixedCriteria) {
  const Dataset d = slope_data(7);
  FitOptions ml;
  ml.criterion = Criterion::ML;
  const FitResult a = fit_model(parse_formula("Y ~ 1 + A + (1 | Subject)"), d, {}, ml);
  const FitResult b = fit_model(parse_formula("Y ~ 1 + A + (1 + A | Subject)"), d, {}, {});
  EXPECT_THROW(lr_test(a, b), InferenceError);
}

TEST(LrTest, ChisqAdditiveAlongMlChain) {
  const Dataset d = slope_data(8, 0.5);
  FitOptions ml;
  ml.criterion = Criterion::ML;
  const FitResult a = fit_model(parse_formula("Y ~ 1 + A + (1 | Subject)"), d, {}, ml);
  const FitResult b = fit_model(parse_formula("Y ~ 1 + A + (1 + A || Subject)"), d, {}, ml);
  const FitResult c = fit_model(parse_formula("Y ~ 1 + A + (1 + A | Subject)"), d, {}, ml);
  const double ab = lr_test(a, b).chisq, bc = lr_test(b, c).chisq, ac = lr_test(a, c).chisq;
  ASSERT_GT(ab, 0.0);
  ASSERT_GT(bc, 0.0);
  EXPECT_NEAR(ab + bc, ac, 1e-6);
}

TEST(FixedEffectsTable, WaldIdentities) {
  const Dataset d = slope_data(9);
  const FitResult f = fit_model(parse_formula("Y ~ 1 + A + (1 + A | Subject)"), d, {}, {});
  const auto rows = fixed_effects_table(f);
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& r : rows) {
    EXPECT_GT(r.se, 0.0);
    EXPECT_NEAR(r.t, r.estimate / r.se, 1e-12);
    EXPECT_NEAR(r.lower, r.estimate - 1.96 * r.se, 1e-12);
    EXPECT_NEAR(r.upper, r.estimate + 1.96 * r.se, 1e-12);
  }
}

TEST(FixedEffectsTable, MatchesDenseGlsCovariance) {
  const Dataset d = slope_data(10, -0.3);
  const auto mm = std::make_shared<const ModelMatrices>(
      build_model_matrices(parse_formula("Y ~ 1 + A + (1 + A | Subject)"), d, {}));
  const FitResult f = optimize(mm, {});
  const Eigen::MatrixXd zl = mm->dense_z() * testing::dense_lambda(*mm, f.theta);
  Eigen::MatrixXd v = zl * zl.transpose();
  v.diagonal().array() += 1.0;
  const Eigen::MatrixXd xvx = mm->X.transpose() * v.ldlt().solve(mm->X);
  const Eigen::MatrixXd cov = f.sigma * f.sigma * xvx.inverse();
  const auto rows = fixed_effects_table(f);
  for (std::size_t j = 0; j < rows.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    EXPECT_NEAR(rows[j].se, std::sqrt(cov(jj, jj)), 1e-8 * std::sqrt(cov(jj, jj)));
  }
}

TEST(FixedEffectsTable, ResponseScalingKeepsT) {
  Dataset d = slope_data(11);
  const FitResult f1 = fit_model(parse_formula("Y ~ 1 + A + (1 + A | Subject)"), d, {}, {});
  std::vector<double> y2;
  for (double v : d.at("Y").numeric) y2.push_back(2.0 * v);
  d.add_numeric("Y2", y2);
  const FitResult f2 = fit_model(parse_formula("Y2 ~ 1 + A + (1 + A | Subject)"), d, {}, {});
  const auto a = fixed_effects_table(f1), b = fixed_effects_table(f2);
  for (std::size_t j = 0; j < a.size(); ++j) {
    EXPECT_NEAR(b[j].estimate, 2.0 * a[j].estimate, 1e-5 * (1.0 + std::abs(a[j].estimate)));
    EXPECT_NEAR(b[j].se, 2.0 * a[j].se, 1e-5 * a[j].se);
    EXPECT_NEAR(b[j].t, a[j].t, 1e-4);
  }
}

TEST(FixedEffectsTable, ZeroEstimateGivesSymmetricInterval) {
  const Dataset d = slope_data(12);
  FitResult f = fit_model(parse_formula("Y ~ 1 + A + (1 | Subject)"), d, {}, {});
  f.beta[1] = 0.0;
  const auto rows = fixed_effects_table(f);
  EXPECT_EQ(rows[1].t, 0.0);
  EXPECT_DOUBLE_EQ(rows[1].lower, -rows[1].upper);
}

}  // namespace
}  // namespace parsimix
