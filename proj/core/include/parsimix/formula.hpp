#ifndef PARSIMIX_FORMULA_HPP_
#define PARSIMIX_FORMULA_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace parsimix {

// A model term: a single variable ("A") or an interaction ("A:B").
// Variable order is kept as written; two terms naming the same set of
// variables are the same term.
struct Term {
  std::vector<std::string> vars;

  std::size_t order() const { return vars.size(); }
  bool same_as(const Term& other) const;
  // True when every variable of `other` also appears in this term.
  bool contains(const Term& other) const;
  std::string to_string() const;

  friend bool operator==(const Term&, const Term&) = default;
};

// Right-hand side of a formula or the inside of a random-effects term.
struct TermList {
  bool intercept = true;
  std::vector<Term> terms;

  // Number of columns-to-be: intercept counts as one, every term as one.
  std::size_t size() const { return terms.size() + (intercept ? 1 : 0); }
  bool has(const Term& t) const;

  friend bool operator==(const TermList&, const TermList&) = default;
};

// `(inner | group)` or, with correlated = false, `(inner || group)`.
struct RandomTerm {
  TermList inner;
  std::string group;
  bool correlated = true;

  friend bool operator==(const RandomTerm&, const RandomTerm&) = default;
};

struct FormulaAST {
  std::string response;
  TermList fixed;
  std::vector<RandomTerm> random;

  friend bool operator==(const FormulaAST&, const FormulaAST&) = default;
};

class FormulaError : public std::runtime_error {
 public:
  FormulaError(const std::string& message, std::size_t position)
      : std::runtime_error(message), position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

// Grammar: response ~ rhs, where rhs is built from identifiers, `1`, `0`,
// `+`, `:`, `*` and parenthesised random terms `(expr | g)` / `(expr || g)`.
// `A*B` expands to `A + B + A:B`. Terms are stable-sorted by interaction
// order and de-duplicated.
FormulaAST parse_formula(std::string_view text);

// Canonical text, e.g. "Y ~ 1 + A + (1 + A | S)". parse_formula() of the
// result is structurally equal to the input.
std::string format_formula(const FormulaAST& ast);

// Sets every random term to the zero-correlation form. Idempotent.
FormulaAST zcp_transform(const FormulaAST& ast);

// Renders the message with the offending text and a caret under `position`.
std::string caret_message(std::string_view text, const FormulaError& error);

// All variable names the formula references (response first).
std::vector<std::string> referenced_names(const FormulaAST& ast);

}  // namespace parsimix

#endif  // PARSIMIX_FORMULA_HPP_
