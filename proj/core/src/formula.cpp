#include "parsimix/formula.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace parsimix {

bool Term::contains(const Term& other) const {
  return std::all_of(other.vars.begin(), other.vars.end(), [&](const std::string& v) {
    return std::find(vars.begin(), vars.end(), v) != vars.end();
  });
}

bool Term::same_as(const Term& other) const {
  return vars.size() == other.vars.size() && contains(other);
}

std::string Term::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < vars.size(); ++i) {
    if (i > 0) out += ':';
    out += vars[i];
  }
  return out;
}

bool TermList::has(const Term& t) const {
  return std::any_of(terms.begin(), terms.end(), [&](const Term& x) { return x.same_as(t); });
}

namespace {

enum class Tok { Ident, Zero, One, Tilde, Plus, Colon, Star, LParen, RParen, Bar, DoubleBar, End };

struct Token {
  Tok kind;
  std::string text;
  std::size_t pos;
};

bool ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}

bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    if (ident_start(c)) {
      while (i < text.size() && ident_char(text[i])) ++i;
      out.push_back({Tok::Ident, std::string(text.substr(start, i - start)), start});
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      while (i < text.size() && ident_char(text[i])) ++i;
      const auto lit = text.substr(start, i - start);
      if (lit == "0") {
        out.push_back({Tok::Zero, "0", start});
      } else if (lit == "1") {
        out.push_back({Tok::One, "1", start});
      } else {
        throw FormulaError("unexpected numeric literal '" + std::string(lit) + "'", start);
      }
      continue;
    }
    switch (c) {
      case '~': out.push_back({Tok::Tilde, "~", start}); break;
      case '+': out.push_back({Tok::Plus, "+", start}); break;
      case ':': out.push_back({Tok::Colon, ":", start}); break;
      case '*': out.push_back({Tok::Star, "*", start}); break;
      case '(': out.push_back({Tok::LParen, "(", start}); break;
      case ')': out.push_back({Tok::RParen, ")", start}); break;
      case '|':
        if (i + 1 < text.size() && text[i + 1] == '|') {
          out.push_back({Tok::DoubleBar, "||", start});
          ++i;
        } else {
          out.push_back({Tok::Bar, "|", start});
        }
        break;
      default:
        throw FormulaError(std::string("unexpected character '") + c + "'", start);
    }
    ++i;
  }
  out.push_back({Tok::End, "", text.size()});
  return out;
}

Term merge_terms(const Term& a, const Term& b) {
  Term out = a;
  for (const auto& v : b.vars) {
    if (std::find(out.vars.begin(), out.vars.end(), v) == out.vars.end()) out.vars.push_back(v);
  }
  return out;
}

void append_unique(std::vector<Term>& dst, const Term& t) {
  for (const auto& x : dst) {
    if (x.same_as(t)) return;
  }
  dst.push_back(t);
}

void canonicalize(TermList& list) {
  std::vector<Term> unique;
  for (const auto& t : list.terms) append_unique(unique, t);
  std::stable_sort(unique.begin(), unique.end(),
                   [](const Term& a, const Term& b) { return a.order() < b.order(); });
  list.terms = std::move(unique);
}

bool same_inner(const TermList& a, const TermList& b) {
  if (a.intercept != b.intercept || a.terms.size() != b.terms.size()) return false;
  return std::all_of(a.terms.begin(), a.terms.end(), [&](const Term& t) { return b.has(t); });
}

class Parser {
 public:
  explicit Parser(std::string_view text) : tokens_(tokenize(text)) {}

  FormulaAST parse() {
    FormulaAST ast;
    const Token& resp = expect(Tok::Ident, "expected response name");
    ast.response = resp.text;
    expect(Tok::Tilde, "expected '~'");
    parse_sum(ast.fixed, &ast.random);
    if (peek().kind == Tok::RParen) throw FormulaError("unbalanced parentheses", peek().pos);
    if (peek().kind != Tok::End) throw FormulaError("unexpected '" + peek().text + "'", peek().pos);
    canonicalize(ast.fixed);
    return ast;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  const Token& next() { return tokens_[pos_++]; }

  const Token& expect(Tok kind, const char* message) {
    if (peek().kind != kind) throw FormulaError(message, peek().pos);
    return next();
  }

  // Parses `summand (+ summand)*` into `list`. Random terms are only
  // accepted when `random` is non-null (i.e. at the top level).
  void parse_sum(TermList& list, std::vector<RandomTerm>* random) {
    bool zero_seen = false;
    while (true) {
      const Token& t = peek();
      switch (t.kind) {
        case Tok::Zero:
          next();
          zero_seen = true;
          break;
        case Tok::One:
          next();
          break;
        case Tok::LParen: {
          if (random == nullptr) throw FormulaError("nested random-effects term", t.pos);
          parse_random(*random);
          break;
        }
        case Tok::Ident: {
          for (auto& term : parse_product()) list.terms.push_back(std::move(term));
          break;
        }
        case Tok::End:
          throw FormulaError("expected a term", t.pos);
        default:
          throw FormulaError("expected a term, found '" + t.text + "'", t.pos);
      }
      if (peek().kind != Tok::Plus) break;
      next();
    }
    list.intercept = !zero_seen;
  }

  std::vector<Term> parse_product() {
    std::vector<Term> acc{parse_interaction()};
    while (peek().kind == Tok::Star) {
      next();
      if (peek().kind != Tok::Ident) throw FormulaError("expected a variable after '*'", peek().pos);
      const Term rhs = parse_interaction();
      std::vector<Term> expanded = acc;
      append_unique(expanded, rhs);
      for (const auto& a : acc) append_unique(expanded, merge_terms(a, rhs));
      acc = std::move(expanded);
    }
    return acc;
  }

  Term parse_interaction() {
    Term term;
    term.vars.push_back(expect(Tok::Ident, "expected a variable").text);
    while (peek().kind == Tok::Colon) {
      next();
      const std::string& name = expect(Tok::Ident, "expected a variable after ':'").text;
      if (std::find(term.vars.begin(), term.vars.end(), name) == term.vars.end()) {
        term.vars.push_back(name);
      }
    }
    return term;
  }

  void parse_random(std::vector<RandomTerm>& random) {
    const Token& open = next();
    RandomTerm rt;
    if (peek().kind == Tok::Bar || peek().kind == Tok::DoubleBar) {
      throw FormulaError("empty random-effects expression", peek().pos);
    }
    parse_sum(rt.inner, nullptr);
    if (peek().kind == Tok::Bar) {
      rt.correlated = true;
    } else if (peek().kind == Tok::DoubleBar) {
      rt.correlated = false;
    } else if (peek().kind == Tok::End) {
      throw FormulaError("unbalanced parentheses", open.pos);
    } else {
      throw FormulaError("expected '|' or '||'", peek().pos);
    }
    next();
    if (peek().kind == Tok::RParen || peek().kind == Tok::End) {
      throw FormulaError("empty random group", peek().pos);
    }
    rt.group = expect(Tok::Ident, "expected grouping factor name").text;
    if (peek().kind != Tok::RParen) {
      if (peek().kind == Tok::End) throw FormulaError("unbalanced parentheses", open.pos);
      throw FormulaError("expected ')'", peek().pos);
    }
    next();
    canonicalize(rt.inner);
    if (rt.inner.size() == 0) throw FormulaError("random-effects term has no components", open.pos);
    for (const auto& existing : random) {
      if (existing.group == rt.group && same_inner(existing.inner, rt.inner)) {
        throw FormulaError("duplicate random term for group '" + rt.group + "'", open.pos);
      }
    }
    random.push_back(std::move(rt));
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

void write_terms(std::ostringstream& os, const TermList& list) {
  os << (list.intercept ? "1" : "0");
  for (const auto& t : list.terms) os << " + " << t.to_string();
}

}  // namespace

FormulaAST parse_formula(std::string_view text) {
  return Parser(text).parse();
}

std::string format_formula(const FormulaAST& ast) {
  std::ostringstream os;
  os << ast.response << " ~ ";
  write_terms(os, ast.fixed);
  for (const auto& r : ast.random) {
    os << " + (";
    write_terms(os, r.inner);
    os << (r.correlated ? " | " : " || ") << r.group << ')';
  }
  return os.str();
}

FormulaAST zcp_transform(const FormulaAST& ast) {
  FormulaAST out = ast;
  for (auto& r : out.random) r.correlated = false;
  return out;
}

std::string caret_message(std::string_view text, const FormulaError& error) {
  std::string out = "formula error: ";
  out += error.what();
  out += "\n  ";
  out += text;
  out += "\n  ";
  out += std::string(std::min(error.position(), text.size()), ' ');
  out += '^';
  return out;
}

std::vector<std::string> referenced_names(const FormulaAST& ast) {
  std::vector<std::string> names{ast.response};
  auto add = [&](const std::string& n) {
    if (std::find(names.begin(), names.end(), n) == names.end()) names.push_back(n);
  };
  for (const auto& t : ast.fixed.terms) {
    for (const auto& v : t.vars) add(v);
  }
  for (const auto& r : ast.random) {
    for (const auto& t : r.inner.terms) {
      for (const auto& v : t.vars) add(v);
    }
    add(r.group);
  }
  return names;
}

}  // namespace parsimix
