#ifndef PARSIMIX_DESIGN_HPP_
#define PARSIMIX_DESIGN_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "parsimix/dataset.hpp"
#include "parsimix/formula.hpp"

namespace parsimix {

enum class ContrastKind { Treatment, Sum };

const char* to_string(ContrastKind kind);
ContrastKind parse_contrast_kind(const std::string& text);

struct ContrastScheme {
  ContrastKind default_kind = ContrastKind::Sum;
  std::map<std::string, ContrastKind> per_factor;

  ContrastKind kind_for(const std::string& factor) const;
};

// k x (k-1) coding matrix. Treatment: indicators of levels 2..k.
// Sum: level i of 1..k-1 coded +1 on its own column, level k coded -1.
Eigen::MatrixXd contrast_matrix(std::size_t k, ContrastKind kind);

struct ContrastColumns {
  Eigen::MatrixXd values;           // n x (k-1)
  std::vector<std::string> labels;  // "<factor>.<level>"
};

ContrastColumns apply_contrasts(const Column& factor, ContrastKind kind);

// One random-effects block: d columns per level of `group`.
// Row i contributes values.row(i) to the columns of level[i] only.
struct RandomBlock {
  std::string group;
  int d = 0;
  int k = 0;
  std::vector<int> level;
  Eigen::MatrixXd values;  // n x d
  std::vector<std::string> labels;
  std::vector<std::string> group_levels;
  std::size_t source_term = 0;  // index into the formula's random terms
  bool correlated = true;

  std::size_t width() const { return static_cast<std::size_t>(d) * static_cast<std::size_t>(k); }
  std::size_t n_theta() const { return static_cast<std::size_t>(d) * (d + 1) / 2; }
};

struct ModelMatrices {
  FormulaAST formula;
  ContrastScheme contrasts;
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  std::vector<std::string> fixed_labels;
  std::vector<RandomBlock> blocks;
  DataFingerprint data;
  std::uint64_t response_hash = 0;

  std::size_t n() const { return static_cast<std::size_t>(y.size()); }
  std::size_t p() const { return static_cast<std::size_t>(X.cols()); }
  std::size_t q() const;
  std::size_t n_theta() const;
  // Dense Z (n x q), blocks side by side, level-major within a block.
  Eigen::MatrixXd dense_z() const;
};

inline constexpr const char* kInterceptLabel = "(Intercept)";

// X from the fixed terms, one block per random term; a zero-correlation
// term becomes one scalar block per expanded column.
ModelMatrices build_model_matrices(const FormulaAST& ast, const Dataset& data,
                                   const ContrastScheme& contrasts);

// Rewrites every random term so it refers only to numeric columns: factor
// variables are replaced by their contrast columns, which are appended to
// the returned dataset. Interactions become products of numeric columns.
// The fixed part is left as is.
struct VectorizedModel {
  FormulaAST formula;
  Dataset data;
};

VectorizedModel vectorize_random_terms(const FormulaAST& ast, const Dataset& data,
                                       const ContrastScheme& contrasts);

// True if some level of `group` observes more than one value of `factor`.
bool varies_within(const Dataset& data, const std::string& factor, const std::string& group);

}  // namespace parsimix

#endif  // PARSIMIX_DESIGN_HPP_
