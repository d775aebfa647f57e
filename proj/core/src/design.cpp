#include "parsimix/design.hpp"

#include <algorithm>
#include <cctype>

namespace parsimix {

const char* to_string(ContrastKind kind) {
  return kind == ContrastKind::Sum ? "sum" : "treatment";
}

ContrastKind parse_contrast_kind(const std::string& text) {
  if (text == "sum") return ContrastKind::Sum;
  if (text == "treatment") return ContrastKind::Treatment;
  throw DataError("unknown contrast scheme '" + text + "' (expected sum or treatment)");
}

ContrastKind ContrastScheme::kind_for(const std::string& factor) const {
  auto it = per_factor.find(factor);
  return it == per_factor.end() ? default_kind : it->second;
}

Eigen::MatrixXd contrast_matrix(std::size_t k, ContrastKind kind) {
  if (k < 2) throw DataError("contrasts need at least two levels");
  const auto kk = static_cast<Eigen::Index>(k);
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(kk, kk - 1);
  for (Eigen::Index j = 0; j < kk - 1; ++j) {
    if (kind == ContrastKind::Treatment) {
      c(j + 1, j) = 1.0;
    } else {
      c(j, j) = 1.0;
      c(kk - 1, j) = -1.0;
    }
  }
  return c;
}

ContrastColumns apply_contrasts(const Column& factor, ContrastKind kind) {
  if (!factor.is_factor()) throw DataError("column '" + factor.name + "' is not a factor");
  const std::size_t k = factor.levels.size();
  if (k < 2) throw DataError("factor '" + factor.name + "' has a single level");
  const Eigen::MatrixXd coding = contrast_matrix(k, kind);
  ContrastColumns out;
  const auto n = static_cast<Eigen::Index>(factor.codes.size());
  out.values.resize(n, coding.cols());
  for (Eigen::Index i = 0; i < n; ++i) out.values.row(i) = coding.row(factor.codes[i]);
  for (std::size_t j = 0; j + 1 < k; ++j) {
    const std::size_t level = kind == ContrastKind::Treatment ? j + 1 : j;
    out.labels.push_back(factor.name + "." + factor.levels[level]);
  }
  return out;
}

std::size_t ModelMatrices::q() const {
  std::size_t q = 0;
  for (const auto& b : blocks) q += b.width();
  return q;
}

std::size_t ModelMatrices::n_theta() const {
  std::size_t t = 0;
  for (const auto& b : blocks) t += b.n_theta();
  return t;
}

Eigen::MatrixXd ModelMatrices::dense_z() const {
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n()), static_cast<Eigen::Index>(q()));
  Eigen::Index offset = 0;
  for (const auto& b : blocks) {
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
      z.block(i, offset + static_cast<Eigen::Index>(b.level[i]) * b.d, 1, b.d) = b.values.row(i);
    }
    offset += static_cast<Eigen::Index>(b.width());
  }
  return z;
}

namespace {

struct NamedColumns {
  Eigen::MatrixXd values;
  std::vector<std::string> labels;
};

NamedColumns variable_columns(const Dataset& data, const std::string& name,
                              const ContrastScheme& contrasts) {
  const Column* col = data.find(name);
  if (col == nullptr) throw DataError("formula refers to unknown column '" + name + "'");
  NamedColumns out;
  if (col->is_factor()) {
    auto cc = apply_contrasts(*col, contrasts.kind_for(name));
    out.values = std::move(cc.values);
    out.labels = std::move(cc.labels);
  } else {
    out.values = Eigen::Map<const Eigen::VectorXd>(col->numeric.data(),
                                                   static_cast<Eigen::Index>(col->numeric.size()));
    out.labels = {name};
  }
  return out;
}

NamedColumns term_columns(const Dataset& data, const Term& term, const ContrastScheme& contrasts) {
  NamedColumns acc = variable_columns(data, term.vars.at(0), contrasts);
  for (std::size_t v = 1; v < term.vars.size(); ++v) {
    const NamedColumns rhs = variable_columns(data, term.vars[v], contrasts);
    NamedColumns next;
    next.values.resize(acc.values.rows(), acc.values.cols() * rhs.values.cols());
    Eigen::Index c = 0;
    for (Eigen::Index b = 0; b < rhs.values.cols(); ++b) {
      for (Eigen::Index a = 0; a < acc.values.cols(); ++a) {
        next.values.col(c++) = acc.values.col(a).cwiseProduct(rhs.values.col(b));
        next.labels.push_back(acc.labels[a] + ":" + rhs.labels[b]);
      }
    }
    acc = std::move(next);
  }
  return acc;
}

NamedColumns term_list_columns(const Dataset& data, const TermList& list,
                               const ContrastScheme& contrasts) {
  const auto n = static_cast<Eigen::Index>(data.n_rows());
  std::vector<NamedColumns> parts;
  Eigen::Index width = list.intercept ? 1 : 0;
  for (const auto& t : list.terms) {
    parts.push_back(term_columns(data, t, contrasts));
    width += parts.back().values.cols();
  }
  NamedColumns out;
  out.values.resize(n, width);
  Eigen::Index c = 0;
  if (list.intercept) {
    out.values.col(c++).setOnes();
    out.labels.emplace_back(kInterceptLabel);
  }
  for (auto& part : parts) {
    out.values.middleCols(c, part.values.cols()) = part.values;
    c += part.values.cols();
    for (auto& l : part.labels) out.labels.push_back(std::move(l));
  }
  return out;
}

std::string sanitize(const std::string& s) {
  std::string out;
  for (char c : s) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
    out += ok ? c : '_';
  }
  return out;
}

}  // namespace

ModelMatrices build_model_matrices(const FormulaAST& ast, const Dataset& data,
                                   const ContrastScheme& contrasts) {
  ModelMatrices mm;
  mm.formula = ast;
  mm.contrasts = contrasts;
  mm.data = fingerprint(data);

  const Column& response = data.at(ast.response);
  if (response.is_factor()) throw DataError("response '" + ast.response + "' must be numeric");
  mm.y = Eigen::Map<const Eigen::VectorXd>(response.numeric.data(),
                                           static_cast<Eigen::Index>(response.numeric.size()));
  mm.response_hash = fnv1a(response.numeric.data(), response.numeric.size() * sizeof(double));

  NamedColumns fixed = term_list_columns(data, ast.fixed, contrasts);
  mm.X = std::move(fixed.values);
  mm.fixed_labels = std::move(fixed.labels);
  if (mm.X.cols() > 0) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(mm.X);
    if (qr.rank() < mm.X.cols()) {
      throw DataError("fixed-effects matrix is rank deficient (rank " + std::to_string(qr.rank()) +
                      " < " + std::to_string(mm.X.cols()) + " columns)");
    }
  }

  for (std::size_t r = 0; r < ast.random.size(); ++r) {
    const RandomTerm& rt = ast.random[r];
    const Column* group = data.find(rt.group);
    if (group == nullptr) throw DataError("formula refers to unknown column '" + rt.group + "'");
    if (!group->is_factor()) {
      throw DataError("grouping variable '" + rt.group + "' must be a factor (use --factor)");
    }
    NamedColumns cols = term_list_columns(data, rt.inner, contrasts);
    auto make_block = [&](Eigen::MatrixXd values, std::vector<std::string> labels) {
      RandomBlock b;
      b.group = rt.group;
      b.d = static_cast<int>(values.cols());
      b.k = static_cast<int>(group->levels.size());
      b.level = group->codes;
      b.values = std::move(values);
      b.labels = std::move(labels);
      b.group_levels = group->levels;
      b.source_term = r;
      b.correlated = rt.correlated;
      mm.blocks.push_back(std::move(b));
    };
    if (rt.correlated) {
      make_block(std::move(cols.values), std::move(cols.labels));
    } else {
      for (Eigen::Index c = 0; c < cols.values.cols(); ++c) {
        make_block(cols.values.col(c), {cols.labels[static_cast<std::size_t>(c)]});
      }
    }
  }
  return mm;
}

VectorizedModel vectorize_random_terms(const FormulaAST& ast, const Dataset& data,
                                       const ContrastScheme& contrasts) {
  VectorizedModel out{ast, data};
  std::map<std::string, std::vector<std::string>> expanded;  // factor -> numeric column names

  auto numeric_names = [&](const std::string& var) -> std::vector<std::string> {
    const Column& col = out.data.at(var);
    if (!col.is_factor()) return {var};
    auto it = expanded.find(var);
    if (it != expanded.end()) return it->second;
    const ContrastColumns cc = apply_contrasts(col, contrasts.kind_for(var));
    std::vector<std::string> names;
    for (Eigen::Index j = 0; j < cc.values.cols(); ++j) {
      std::string name = sanitize(cc.labels[static_cast<std::size_t>(j)]);
      while (out.data.find(name) != nullptr) name += "_";
      std::vector<double> v(cc.values.col(j).data(), cc.values.col(j).data() + cc.values.rows());
      out.data.add_numeric(name, std::move(v));
      names.push_back(std::move(name));
    }
    expanded.emplace(var, names);
    return names;
  };

  for (auto& rt : out.formula.random) {
    TermList inner;
    inner.intercept = rt.inner.intercept;
    for (const auto& term : rt.inner.terms) {
      std::vector<Term> acc{Term{}};
      for (const auto& var : term.vars) {
        std::vector<Term> next;
        for (const auto& name : numeric_names(var)) {
          for (const auto& a : acc) {
            Term t = a;
            t.vars.push_back(name);
            next.push_back(std::move(t));
          }
        }
        acc = std::move(next);
      }
      for (auto& t : acc) {
        if (!inner.has(t)) inner.terms.push_back(std::move(t));
      }
    }
    std::stable_sort(inner.terms.begin(), inner.terms.end(),
                     [](const Term& a, const Term& b) { return a.order() < b.order(); });
    rt.inner = std::move(inner);
  }
  return out;
}

bool varies_within(const Dataset& data, const std::string& factor, const std::string& group) {
  const Column& f = data.at(factor);
  const Column& g = data.at(group);
  if (!g.is_factor()) throw DataError("grouping variable '" + group + "' must be a factor");
  std::vector<double> first(g.levels.size());
  std::vector<bool> seen(g.levels.size(), false);
  for (std::size_t i = 0; i < data.n_rows(); ++i) {
    const double v = f.is_factor() ? static_cast<double>(f.codes[i]) : f.numeric[i];
    const auto lvl = static_cast<std::size_t>(g.codes[i]);
    if (!seen[lvl]) {
      seen[lvl] = true;
      first[lvl] = v;
    } else if (first[lvl] != v) {
      return true;
    }
  }
  return false;
}

}  // namespace parsimix
