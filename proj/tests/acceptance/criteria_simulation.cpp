#include <cmath>
#include <cstdio>
#include <string>

#include "criteria.hpp"
#include "fixtures.hpp"
#include "parsimix/fitter.hpp"
#include "parsimix/formula.hpp"
#include "parsimix/inference.hpp"
#include "parsimix/repca.hpp"
#include "parsimix/selection.hpp"
#include "parsimix/simulate.hpp"

namespace parsimix::acceptance {

namespace {

std::string format(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c);
  return buf;
}

}  // namespace

// Slope identical to the intercept for every subject: covariance s^2 [1 1; 1 1].
Outcome rank_one_detection() {
  constexpr int kReplications = 100;
  constexpr double kSd = 10.0;
  const FormulaAST formula = parse_formula("Y ~ 1 + A + (1 + A | Subject)");
  const Eigen::Matrix2d cov = kSd * kSd * Eigen::Matrix2d::Ones();
  int dim_one = 0;
  for (int rep = 0; rep < kReplications; ++rep) {
    const Dataset data = simulate_lmm(testing::slope_truth(100, 10, cov, 1.0, 4000 + rep));
    const FitResult fit = fit_model(formula, data, ContrastScheme{});
    if (re_pca(fit).find("Subject")->dim == 1) ++dim_one;
  }
  return {dim_one >= 90, format("effective dimensionality 1 in %g of %g replications (subject SD %g, residual SD 1)",
                                dim_one, kReplications, kSd)};
}

Outcome lrt_null_calibration() {
  constexpr int kReplications = 500;
  const double limit = 0.05 + 2.0 * std::sqrt(0.05 * 0.95 / kReplications);
  const FormulaAST small = parse_formula("Y ~ 1 + A + (1 | Subject)");
  const FormulaAST large = parse_formula("Y ~ 1 + A + (1 + A || Subject)");
  Eigen::Matrix2d cov;
  cov << 1.0, 0.0, 0.0, 0.0;
  int rejections = 0;
  for (int rep = 0; rep < kReplications; ++rep) {
    const Dataset data = simulate_lmm(testing::slope_truth(30, 5, cov, 1.0, 5000 + rep));
    const FitResult s = fit_model(small, data, ContrastScheme{});
    const FitResult l = fit_model(large, data, ContrastScheme{});
    if (lr_test(s, l).p_value < 0.05) ++rejections;
  }
  const double rate = static_cast<double>(rejections) / kReplications;
  return {rate <= limit, format("rejection rate %.4f at alpha .05 (limit %.4f) over %g replications", rate, limit,
                                kReplications)};
}

// Truth: by-subject and by-item intercepts plus a by-item P slope
// correlated -0.69 with the item intercept; 56 subjects x 32 items with
// Latin-square assignment of the 2x2x2 cells.
Outcome workflow_recovery() {
  constexpr int kReplications = 100;
  constexpr double kSubjectSd = 0.5;
  constexpr double kItemSd = 0.5;
  constexpr double kSlopeSd = 0.4;
  constexpr double kCorrelation = -0.69;
  const std::string expected =
      "Y ~ 1 + P + C + A + P:C + P:A + C:A + P:C:A + (1 | Subject) + (1 + P.p1 | Item)";

  Eigen::Matrix2d item;
  item << kItemSd * kItemSd, kCorrelation * kItemSd * kSlopeSd, kCorrelation * kItemSd * kSlopeSd,
      kSlopeSd * kSlopeSd;
  SelectionConfig config;
  config.maximal_budget = 500;
  const FormulaAST fixed = parse_formula("Y ~ 1 + P*C*A");

  int exact = 0;
  int oversized = 0;
  int errors = 0;
  std::size_t zcp_size = 0;
  for (int rep = 0; rep < kReplications; ++rep) {
    const TruthSpec spec = testing::crossed_truth(
        56, 32, "(1 | Subject) + (1 + P | Item)",
        {{"Subject", Eigen::MatrixXd::Constant(1, 1, kSubjectSd * kSubjectSd)}, {"Item", item}}, 1.0, 7000 + rep);
    const Dataset data = simulate_lmm(spec);
    const FormulaAST maximal =
        maximal_formula("Y", fixed.fixed, detect_within(fixed.fixed, {"Subject", "Item"}, data), data);
    const SelectionTrace trace = run_workflow(maximal, data, config);
    if (trace.error) ++errors;
    const RandomStructure start = RandomStructure::from_formula(parse_formula(trace.start_formula));
    zcp_size = start.n_components();
    const RandomStructure& final = trace.final_structure;
    if (final.n_components() + final.n_correlations() > zcp_size) ++oversized;
    if (format_formula(trace.final_formula) == expected) ++exact;
  }
  const bool pass = 2 * exact > kReplications && oversized == 0;
  return {pass, format("exact recovery in %g of %g replications, %g larger than ZCP-maximal", exact, kReplications,
                       oversized) +
                    ", " + std::to_string(errors) + " stopped on errors"};
}

}  // namespace parsimix::acceptance
