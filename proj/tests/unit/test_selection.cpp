#include <gtest/gtest.h>

#include <algorithm>

#include "fixtures.hpp"
#include "parsimix/covparam.hpp"
#include "parsimix/selection.hpp"
#include "parsimix/simulate.hpp"

namespace parsimix {
namespace {

Dataset crossed_design(int subjects, int items) {
  Dataset d = design_frame(testing::crossed_truth(subjects, items, "(1 | Subject) + (1 | Item)", {}, 1.0, 1));
  d.add_numeric("Y", std::vector<double>(d.n_rows(), 0.0));
  return d;
}

FormulaAST maximal_for(const Dataset& d, const std::string& fixed) {
  const FormulaAST f = parse_formula("Y ~ " + fixed);
  return maximal_formula("Y", f.fixed, detect_within(f.fixed, {"Subject", "Item"}, d), d);
}

TEST(MaximalFormula, TwoByTwoByTwoWithinBoth) {
  const Dataset d = crossed_design(16, 8);
  const FormulaAST m = maximal_for(d, "1 + P*C*A");
  ASSERT_EQ(m.random.size(), 2u);
  for (const auto& r : m.random) {
    EXPECT_TRUE(r.correlated);
    EXPECT_EQ(r.inner.size(), 8u);
    EXPECT_EQ(count_params(static_cast<int>(r.inner.size())), 36u);
  }
}

TEST(MaximalFormula, OneWithinFactor) {
  Eigen::Matrix2d cov = Eigen::Matrix2d::Identity();
  const Dataset d = simulate_lmm(testing::slope_truth(5, 2, cov, 1.0, 1));
  const FormulaAST f = parse_formula("Y ~ 1 + A");
  const FormulaAST m = maximal_formula("Y", f.fixed, detect_within(f.fixed, {"Subject"}, d), d);
  EXPECT_EQ(format_formula(m), "Y ~ 1 + A + (1 + A | Subject)");
}

TEST(MaximalFormula, BetweenFactorExcluded) {
  TruthSpec s;
  s.groups = {{"Subject", 6}};
  s.factors = {{"A", 2, ""}, {"G", 2, "Subject"}};
  Dataset d = design_frame(s);
  d.add_numeric("Y", std::vector<double>(d.n_rows(), 0.0));
  const FormulaAST f = parse_formula("Y ~ 1 + A*G");
  const auto within = detect_within(f.fixed, {"Subject"}, d);
  ASSERT_EQ(within.size(), 1u);
  EXPECT_EQ(within[0].second, std::vector<std::string>{"A"});
  const FormulaAST m = maximal_formula("Y", f.fixed, within, d);
  ASSERT_EQ(m.random.size(), 1u);
  EXPECT_EQ(m.random[0].inner.size(), 2u);
  EXPECT_EQ(format_formula(m), "Y ~ 1 + A + G + A:G + (1 + A | Subject)");
}

TEST(MaximalFormula, UnknownFactor) {
  const Dataset d = crossed_design(8, 8);
  const FormulaAST f = parse_formula("Y ~ 1 + P");
  EXPECT_THROW(maximal_formula("Y", f.fixed, {{"Subject", {"Q"}}}, d), std::exception);
  EXPECT_THROW(maximal_formula("Y", f.fixed, {{"Nobody", {"P"}}}, d), std::exception);
}

RandomStructure structure_of(const std::string& text) {
  return RandomStructure::from_formula(parse_formula(text));
}

TEST(RandomStructure, RoundTripAndZcp) {
  const RandomStructure s = structure_of("Y ~ 1 + (1 + A + B | S) + (1 || I)");
  EXPECT_EQ(s.n_components(), 4u);
  EXPECT_EQ(s.n_correlations(), 3u);
  const FormulaAST base = parse_formula("Y ~ 1");
  EXPECT_EQ(format_formula(s.apply_to(base)), "Y ~ 1 + (1 + A + B | S) + (1 | I)");
  const RandomStructure z = s.zcp();
  EXPECT_EQ(z.n_correlations(), 0u);
  EXPECT_EQ(format_formula(z.apply_to(base)), "Y ~ 1 + (1 + A + B || S) + (1 | I)");
}

TEST(RandomStructure, WithoutKeepsRemainingCluster) {
  const RandomStructure s = structure_of("Y ~ 1 + (1 + A + B | S)");
  Component a;
  a.term.vars = {"A"};
  const RandomStructure w = s.without("S", a);
  EXPECT_EQ(format_formula(w.apply_to(parse_formula("Y ~ 1"))), "Y ~ 1 + (1 + B | S)");
  EXPECT_EQ(w.n_correlations(), 1u);
}

TEST(Component, Marginality) {
  Component i{true, {}}, a{false, {{"A"}}}, b{false, {{"B"}}}, ab{false, {{"A", "B"}}};
  EXPECT_TRUE(ab.contains(a));
  EXPECT_TRUE(ab.contains(b));
  EXPECT_FALSE(a.contains(ab));
  EXPECT_FALSE(ab.contains(i));
  EXPECT_FALSE(i.contains(a));
  EXPECT_FALSE(a.contains(a));
}

// A fitted ZCP model whose theta can be edited to stage drop decisions.
struct StagedFit {
  SelectionContext ctx;
  RandomStructure structure;
  FitResult fit;
};

StagedFit staged(const std::string& random) {
  std::map<std::string, Eigen::MatrixXd> cov;
  cov["Subject"] = Eigen::MatrixXd::Constant(1, 1, 0.5);
  cov["Item"] = Eigen::MatrixXd::Constant(1, 1, 0.5);
  const Dataset d = simulate_lmm(testing::crossed_truth(16, 8, "(1 | Subject) + (1 | Item)", cov, 1.0, 3));
  const FormulaAST f = parse_formula("Y ~ 1 + P*C*A + " + random);
  SelectionContext ctx = make_context(f, d, {});
  RandomStructure s = RandomStructure::from_formula(vectorize_random_terms(f, d, {}).formula);
  FitOptions o;
  o.budget = 50;
  auto mm = std::make_shared<const ModelMatrices>(build_model_matrices(s.apply_to(ctx.base), ctx.data, {}));
  FitResult fit = optimize(mm, o);
  fit.theta.setConstant(0.5);
  return {std::move(ctx), std::move(s), std::move(fit)};
}

std::size_t theta_index(const FitResult& fit, const std::string& group, const std::string& label) {
  for (std::size_t b = 0; b < fit.matrices->blocks.size(); ++b) {
    const auto& blk = fit.matrices->blocks[b];
    if (blk.group == group && blk.labels.front() == label) return fit.layout.offsets[b];
  }
  throw std::runtime_error("no block " + label);
}

TEST(DropComponents, HighestOrderFirstAndMarginality) {
  StagedFit s = staged("(1 + P*C*A || Subject)");
  s.fit.theta[static_cast<Eigen::Index>(theta_index(s.fit, "Subject", "P.p1:C.c1:A.a1"))] = 0.0;
  s.fit.theta[static_cast<Eigen::Index>(theta_index(s.fit, "Subject", "P.p1"))] = 0.0;
  const DropResult r = drop_components(s.fit, s.structure, {});
  ASSERT_EQ(r.removed.size(), 1u);
  EXPECT_EQ(r.removed[0].second, "P.p1:C.c1:A.a1");
  EXPECT_FALSE(r.noop);
}

TEST(DropComponents, BatchAcrossFactors) {
  StagedFit s = staged("(1 + P*C || Subject) + (1 + P*C || Item)");
  s.fit.theta[static_cast<Eigen::Index>(theta_index(s.fit, "Subject", "P.p1:C.c1"))] = 0.0;
  s.fit.theta[static_cast<Eigen::Index>(theta_index(s.fit, "Subject", "C.c1"))] = 1e-7;
  s.fit.theta[static_cast<Eigen::Index>(theta_index(s.fit, "Item", "P.p1"))] = 0.0;
  s.fit.theta[static_cast<Eigen::Index>(theta_index(s.fit, "Item", "P.p1:C.c1"))] = 0.0;
  const DropResult r = drop_components(s.fit, s.structure, {});
  std::vector<std::string> got;
  for (const auto& [g, l] : r.removed) got.push_back(g + "/" + l);
  std::sort(got.begin(), got.end());
  // Subject C.c1 becomes removable once the interaction containing it goes.
  EXPECT_EQ(got, (std::vector<std::string>{"Item/P.p1", "Item/P.p1:C.c1", "Subject/C.c1", "Subject/P.p1:C.c1"}));
}

TEST(DropComponents, BlockedMainEffectFallsBackToInteraction) {
  // C.c1 is zero but P.p1:C.c1 contains it, so the rank deficit is resolved
  // by removing the highest-order component instead.
  StagedFit s = staged("(1 + P*C || Subject)");
  s.fit.theta[static_cast<Eigen::Index>(theta_index(s.fit, "Subject", "C.c1"))] = 0.0;
  const DropResult r = drop_components(s.fit, s.structure, {});
  ASSERT_EQ(r.removed.size(), 1u);
  EXPECT_EQ(r.removed[0].second, "P.p1:C.c1");
}

TEST(DropComponents, ReliableComponentsAreANoop) {
  StagedFit s = staged("(1 + P || Subject) + (1 + P || Item)");
  const DropResult r = drop_components(s.fit, s.structure, {});
  EXPECT_TRUE(r.noop);
  EXPECT_TRUE(r.removed.empty());
}

TEST(DropComponents, RankDeficientCorrelatedFactor) {
  StagedFit s = staged("(1 + P | Subject)");
  // Column 2 of Lambda zero and column 1 in the span: rank 1, no small diagonal.
  const auto o = static_cast<Eigen::Index>(theta_index(s.fit, "Subject", "(Intercept)"));
  s.fit.theta[o] = 0.6;
  s.fit.theta[o + 1] = 0.3;
  s.fit.theta[o + 2] = 0.0;
  const DropResult r = drop_components(s.fit, s.structure, {});
  ASSERT_EQ(r.removed.size(), 1u);
  EXPECT_EQ(r.removed[0].second, "P.p1");
}

Dataset intercepts_truth(std::uint64_t seed) {
  std::map<std::string, Eigen::MatrixXd> cov;
  cov["Subject"] = Eigen::MatrixXd::Constant(1, 1, 0.5);
  cov["Item"] = Eigen::MatrixXd::Constant(1, 1, 0.4);
  return simulate_lmm(testing::crossed_truth(24, 16, "(1 | Subject) + (1 | Item)", cov, 1.0, seed));
}

TEST(Workflow, InterceptsOnlyTruth) {
  const Dataset d = intercepts_truth(21);
  const SelectionTrace t = run_workflow(parse_formula("Y ~ 1 + P + (1 + P | Subject) + (1 + P | Item)"), d, {});
  EXPECT_FALSE(t.error.has_value());
  EXPECT_EQ(format_formula(t.final_formula), "Y ~ 1 + P + (1 | Subject) + (1 | Item)");
  EXPECT_EQ(t.steps.front().action, Action::StartMaximal);
  EXPECT_EQ(t.steps.back().action, Action::Stop);
}

TEST(Workflow, Deterministic) {
  const Dataset d = intercepts_truth(22);
  const FormulaAST f = parse_formula("Y ~ 1 + P + (1 + P | Subject) + (1 + P | Item)");
  EXPECT_EQ(format_trace(run_workflow(f, d, {})), format_trace(run_workflow(f, d, {})));
}

TEST(Workflow, ConsecutiveModelsNestedAndMarginal) {
  const Dataset d = intercepts_truth(23);
  const FormulaAST f = parse_formula("Y ~ 1 + P*C + (1 + P*C | Subject) + (1 + P*C | Item)");
  const SelectionTrace t = run_workflow(f, d, {});
  const VectorizedModel vm = vectorize_random_terms(f, d, {});
  std::vector<std::shared_ptr<const ModelMatrices>> accepted;
  for (const auto& step : t.steps) {
    if (!step.accepted || !step.fit) continue;
    const FormulaAST m = parse_formula(step.formula);
    accepted.push_back(std::make_shared<const ModelMatrices>(build_model_matrices(m, vm.data, {})));
    for (const auto& r : m.random) {
      for (const auto& term : r.inner.terms) {
        // every variable of an interaction term is retained as a main effect on the same factor
        if (term.order() < 2) continue;
        for (const auto& v : term.vars) {
          bool found = false;
          for (const auto& r2 : m.random) {
            if (r2.group != r.group) continue;
            for (const auto& t2 : r2.inner.terms) found = found || (t2.vars == std::vector<std::string>{v});
          }
          EXPECT_TRUE(found) << step.formula;
        }
      }
    }
  }
  for (std::size_t i = 1; i < accepted.size(); ++i) {
    const bool forward = is_nested(*accepted[i], *accepted[i - 1]);
    const bool backward = is_nested(*accepted[i - 1], *accepted[i]);
    EXPECT_TRUE(forward || backward) << "step " << i;
  }
}

TEST(ExtendCorrelations, SingleComponentIsNoop) {
  const Dataset d = intercepts_truth(24);
  const FormulaAST f = parse_formula("Y ~ 1 + (1 | Subject) + (1 | Item)");
  const SelectionContext ctx = make_context(f, d, {});
  const RandomStructure s = RandomStructure::from_formula(f);
  auto fit = std::make_shared<const FitResult>(ctx.fit(s, nullptr));
  const EliminationResult r = extend_correlations(ctx, s, fit);
  EXPECT_TRUE(r.steps.empty());
  EXPECT_EQ(r.fit, fit);
}

TEST(PruneCorrelations, NoCorrelationsIsNoop) {
  const Dataset d = intercepts_truth(25);
  const FormulaAST f = parse_formula("Y ~ 1 + (1 | Subject) + (1 | Item)");
  const SelectionContext ctx = make_context(f, d, {});
  const RandomStructure s = RandomStructure::from_formula(f);
  auto fit = std::make_shared<const FitResult>(ctx.fit(s, nullptr));
  EXPECT_TRUE(prune_correlations(ctx, s, fit).steps.empty());
}

TEST(PruneCorrelations, StrongCorrelationsAreNotNominated) {
  Eigen::Matrix2d cov;
  cov << 1.0, 0.8, 0.8, 1.0;
  const Dataset d = simulate_lmm(testing::slope_truth(60, 5, cov, 0.5, 4));
  const FormulaAST f = parse_formula("Y ~ 1 + A + (1 + A | Subject)");
  const SelectionContext ctx = make_context(f, d, {});
  const RandomStructure s = RandomStructure::from_formula(vectorize_random_terms(f, d, {}).formula);
  auto fit = std::make_shared<const FitResult>(ctx.fit(s, nullptr));
  const EliminationResult r = prune_correlations(ctx, s, fit);
  EXPECT_TRUE(r.steps.empty());
  EXPECT_EQ(r.structure.n_correlations(), 1u);
}

TEST(PruneCorrelations, WeakCorrelationPruned) {
  Eigen::Matrix2d cov;
  cov << 1.0, 0.0, 0.0, 1.0;
  const Dataset d = simulate_lmm(testing::slope_truth(60, 5, cov, 0.5, 4));
  const FormulaAST f = parse_formula("Y ~ 1 + A + (1 + A | Subject)");
  SelectionConfig cfg;
  cfg.prune_threshold = 0.5;
  const SelectionContext ctx = make_context(f, d, cfg);
  const RandomStructure s = RandomStructure::from_formula(vectorize_random_terms(f, d, {}).formula);
  auto fit = std::make_shared<const FitResult>(ctx.fit(s, nullptr));
  const EliminationResult r = prune_correlations(ctx, s, fit);
  ASSERT_EQ(r.steps.size(), 1u);
  EXPECT_EQ(r.steps[0].action, Action::PruneCorrelations);
  ASSERT_TRUE(r.steps[0].lrt.has_value());
  EXPECT_EQ(r.steps[0].lrt->df, 1);
  if (r.steps[0].accepted) EXPECT_EQ(r.structure.n_correlations(), 0u);
}

TEST(SelectionConfig, AlphaRange) {
  const Dataset d = intercepts_truth(26);
  SelectionConfig cfg;
  cfg.alpha = 1.5;
  EXPECT_THROW(make_context(parse_formula("Y ~ 1 + (1 | Subject)"), d, cfg), std::invalid_argument);
}

TEST(Action, Names) {
  EXPECT_STREQ(to_string(Action::StartMaximal), "start-maximal");
  EXPECT_STREQ(to_string(Action::FallbackZcp), "fallback-zcp");
  EXPECT_STREQ(to_string(Action::DropComponents), "drop-components");
  EXPECT_STREQ(to_string(Action::LrtDrop), "lrt-drop");
  EXPECT_STREQ(to_string(Action::AddCorrelations), "add-correlations");
  EXPECT_STREQ(to_string(Action::PruneCorrelations), "prune-correlations");
  EXPECT_STREQ(to_string(Action::Stop), "stop");
}

}  // namespace
}  // namespace parsimix
