#include <gtest/gtest.h>

#include "parsimix/covparam.hpp"
#include "parsimix/formula.hpp"

namespace parsimix {
namespace {

Term t(std::vector<std::string> vars) { return Term{std::move(vars)}; }

TEST(ParseFormula, InterceptRandomTerm) {
  const FormulaAST ast = parse_formula("Y ~ 1 + A + (1|Subject)");
  EXPECT_EQ(ast.response, "Y");
  EXPECT_TRUE(ast.fixed.intercept);
  ASSERT_EQ(ast.fixed.terms.size(), 1u);
  EXPECT_EQ(ast.fixed.terms[0], t({"A"}));
  ASSERT_EQ(ast.random.size(), 1u);
  EXPECT_TRUE(ast.random[0].inner.intercept);
  EXPECT_TRUE(ast.random[0].inner.terms.empty());
  EXPECT_EQ(ast.random[0].group, "Subject");
  EXPECT_TRUE(ast.random[0].correlated);
}

TEST(ParseFormula, CorrelatedSlope) {
  const FormulaAST ast = parse_formula("Y ~ 1 + A + (1+A|Subject)");
  ASSERT_EQ(ast.random.size(), 1u);
  EXPECT_TRUE(ast.random[0].inner.intercept);
  ASSERT_EQ(ast.random[0].inner.terms.size(), 1u);
  EXPECT_EQ(ast.random[0].inner.terms[0], t({"A"}));
  EXPECT_TRUE(ast.random[0].correlated);
}

TEST(ParseFormula, DoubleBarIsUncorrelated) {
  const FormulaAST ast = parse_formula("Y ~ 1 + A + (1+A||Subject)");
  ASSERT_EQ(ast.random.size(), 1u);
  EXPECT_FALSE(ast.random[0].correlated);
  EXPECT_EQ(ast.random[0].inner.size(), 2u);
}

TEST(ParseFormula, StarExpandsToMainEffectsAndInteraction) {
  const FormulaAST ast = parse_formula("Y ~ A*B");
  ASSERT_EQ(ast.fixed.terms.size(), 3u);
  EXPECT_EQ(ast.fixed.terms[0], t({"A"}));
  EXPECT_EQ(ast.fixed.terms[1], t({"B"}));
  EXPECT_EQ(ast.fixed.terms[2], t({"A", "B"}));
}

TEST(ParseFormula, ThreeWayStar) {
  const FormulaAST ast = parse_formula("Y ~ S*P*C");
  EXPECT_EQ(ast.fixed.terms.size(), 7u);
  EXPECT_EQ(ast.fixed.terms.back().order(), 3u);
}

TEST(ParseFormula, ZeroRemovesIntercept) {
  const FormulaAST ast = parse_formula("Y ~ 0 + A + (0 + A | g)");
  EXPECT_FALSE(ast.fixed.intercept);
  EXPECT_FALSE(ast.random[0].inner.intercept);
}

TEST(ParseFormula, ErrorsCarryPositions) {
  try {
    parse_formula("Y ~ 1 + (1 | )");
    FAIL() << "expected an error";
  } catch (const FormulaError& e) {
    EXPECT_NE(std::string(e.what()).find("empty random group"), std::string::npos);
    EXPECT_EQ(e.position(), 13u);
  }
  EXPECT_THROW(parse_formula("Y ~ 1 + (1 | g"), FormulaError);
  EXPECT_THROW(parse_formula("Y ~ 1 + A)"), FormulaError);
  EXPECT_THROW(parse_formula("Y ~ 1 + (1 g)"), FormulaError);
  EXPECT_THROW(parse_formula("Y 1 + A"), FormulaError);
  EXPECT_THROW(parse_formula("Y ~ A ~ B"), FormulaError);
  EXPECT_THROW(parse_formula("Y ~ 1 + (1|g) + (1|g)"), FormulaError);
  EXPECT_THROW(parse_formula("Y ~ 1 + ( | g)"), FormulaError);
}

TEST(ParseFormula, CaretPointsAtOffendingColumn) {
  const std::string text = "Y ~ 1 + (1 | )";
  try {
    parse_formula(text);
    FAIL();
  } catch (const FormulaError& e) {
    const std::string msg = caret_message(text, e);
    const auto caret_line = msg.substr(msg.rfind('\n') + 1);
    EXPECT_EQ(caret_line.find('^'), 2 + e.position());
  }
}

TEST(FormatFormula, CanonicalText) {
  EXPECT_EQ(format_formula(parse_formula("Y~1+A+(1|S)")), "Y ~ 1 + A + (1 | S)");
  EXPECT_NE(format_formula(parse_formula("Y~1+A+(1+A||S)")).find("||"), std::string::npos);
  EXPECT_NE(format_formula(parse_formula("Y~S:P")).find("S:P"), std::string::npos);
}

TEST(FormatFormula, RoundTrip) {
  for (const char* text : {"Y ~ 1 + A*B + (1 + A | S) + (1 || I)", "Y ~ 0 + A + (0 + A:B | S)",
                           "RT ~ 1 + P*C*A + (1 + P*C*A || Subj)"}) {
    const FormulaAST a = parse_formula(text);
    EXPECT_EQ(parse_formula(format_formula(a)), a) << text;
  }
}

TEST(ZcpTransform, SetsDoubleBar) {
  const FormulaAST z = zcp_transform(parse_formula("Y ~ 1 + A + (1+A|S)"));
  EXPECT_EQ(z, parse_formula("Y ~ 1 + A + (1+A||S)"));
}

TEST(ZcpTransform, Idempotent) {
  const FormulaAST a = parse_formula("Y ~ 1 + A + (1+A||S) + (1 | I)");
  EXPECT_EQ(zcp_transform(zcp_transform(a)), zcp_transform(a));
  EXPECT_EQ(zcp_transform(a).random[0], a.random[0]);
}

TEST(ZcpTransform, InterceptOnlyKeepsOneComponent) {
  const FormulaAST a = parse_formula("Y ~ 1 + (1|S)");
  const FormulaAST z = zcp_transform(a);
  EXPECT_EQ(z.random[0].inner.size(), a.random[0].inner.size());
  EXPECT_EQ(count_params(static_cast<int>(a.random[0].inner.size())), 1u);
}

TEST(ReferencedNames, ResponseFirstNoDuplicates) {
  const auto names = referenced_names(parse_formula("Y ~ A*B + (1 + A | S)"));
  ASSERT_FALSE(names.empty());
  EXPECT_EQ(names.front(), "Y");
  EXPECT_EQ(std::count(names.begin(), names.end(), "A"), 1);
  EXPECT_NE(std::find(names.begin(), names.end(), "S"), names.end());
}

}  // namespace
}  // namespace parsimix
