#ifndef PARSIMIX_FITTER_HPP_
#define PARSIMIX_FITTER_HPP_

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "parsimix/covparam.hpp"
#include "parsimix/design.hpp"
#include "parsimix/optimizer.hpp"

namespace parsimix {

enum class Criterion { ML, REML };

const char* to_string(Criterion c);
Criterion parse_criterion(const std::string& text);

class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Penalised least-squares solution at a fixed theta.
struct PlsSolution {
  double deviance = 0.0;
  double pwrss = 0.0;   // minimised penalised residual sum of squares
  double ld_l2 = 0.0;   // log det(Lambda' Z' Z Lambda + I)
  double ld_rx2 = 0.0;  // log det of the fixed-effects Schur complement
  double sigma = 0.0;
  Eigen::VectorXd beta;
  Eigen::MatrixXd beta_unscaled_cov;  // (R_X' R_X)^{-1}
};

// Evaluates the profiled deviance for one set of model matrices.
//
// Random-effects columns are grouped by grouping factor. The factor with
// the most columns is eliminated level by level (its part of
// Lambda'Z'ZLambda + I is block diagonal); the remaining factors, X and y
// form a dense bordered system whose Cholesky factor yields both log
// determinants and the penalised residual sum of squares.
class DevianceEvaluator {
 public:
  explicit DevianceEvaluator(std::shared_ptr<const ModelMatrices> matrices);

  const ThetaLayout& layout() const { return layout_; }
  const ModelMatrices& matrices() const { return *mm_; }

  double deviance(std::span<const double> theta, Criterion criterion) const;
  PlsSolution solve(std::span<const double> theta, Criterion criterion) const;

 private:
  struct Factor {
    std::string group;
    std::vector<std::size_t> blocks;
    std::vector<int> block_offset;  // position of each block inside the factor
    int dim = 0;
    int levels = 0;
    Eigen::Index base = 0;  // first dense column (rest factors only)
  };

  PlsSolution evaluate(std::span<const double> theta, Criterion criterion, bool want_beta) const;
  Eigen::MatrixXd factor_lambda(const Factor& f, std::span<const double> theta) const;
  void scale_columns(Eigen::MatrixXd& m, const std::vector<Eigen::MatrixXd>& rest_lambdas) const;
  void scale_rows(Eigen::MatrixXd& m, const std::vector<Eigen::MatrixXd>& rest_lambdas) const;

  std::shared_ptr<const ModelMatrices> mm_;
  ThetaLayout layout_;
  std::vector<Factor> factors_;   // factors_[0] is eliminated blockwise when present
  Eigen::Index q_rest_ = 0;
  Eigen::Index p_ = 0;
  Eigen::Index m1_ = 0;           // q_rest + p + 1 (response column last)
  std::vector<Eigen::MatrixXd> a_;  // per level of factor 0: Z0' Z0 (D0 x D0)
  std::vector<Eigen::MatrixXd> c_;  // per level of factor 0: Z0' [Z_rest X y]
  Eigen::MatrixXd g_;               // [Z_rest X y]' [Z_rest X y]
};

double profiled_deviance(std::span<const double> theta, const ModelMatrices& matrices,
                         Criterion criterion);

// The random-effects factor of one grouping variable: blocks on the same
// group assembled block-diagonally.
struct FactorLambda {
  std::string group;
  std::vector<std::string> labels;
  std::vector<std::size_t> blocks;
  Eigen::MatrixXd lambda;
};

enum class OptimizerMethod { NelderMead, QuasiNewton };

const char* to_string(OptimizerMethod m);
OptimizerMethod parse_optimizer(const std::string& text);

inline constexpr double kSingularTolerance = 1e-4;
inline constexpr double kBoundaryTolerance = 1e-5;

struct FitOptions {
  Criterion criterion = Criterion::REML;
  std::optional<Eigen::VectorXd> start;
  std::size_t budget = 0;   // 0 selects default_budget()
  std::vector<bool> fixed;  // theta entries held at their start value
  double singular_tol = kSingularTolerance;
  double boundary_tol = kBoundaryTolerance;
  OptimizerMethod method = OptimizerMethod::QuasiNewton;
  NelderMeadOptions tuning;
  QuasiNewtonOptions qn_tuning;
};

// max(10 * n_theta^2, 2000)
std::size_t default_budget(std::size_t n_theta);

struct FitResult {
  std::shared_ptr<const ModelMatrices> matrices;
  ThetaLayout layout;
  Eigen::VectorXd theta;
  std::vector<bool> fixed_theta;
  Eigen::VectorXd beta;
  Eigen::MatrixXd beta_unscaled_cov;
  double sigma = 0.0;
  double deviance = 0.0;
  double loglik = 0.0;
  Criterion criterion = Criterion::REML;
  OptimizerMethod method = OptimizerMethod::QuasiNewton;
  std::size_t n_evals = 0;
  std::size_t budget = 0;
  bool converged = false;
  std::vector<bool> boundary_flags;
  bool singular = false;
  double singular_tol = kSingularTolerance;

  std::size_t n() const { return matrices->n(); }
  std::size_t p() const { return matrices->p(); }
  std::size_t n_free_theta() const;
  // Free covariance parameters plus fixed effects plus the residual.
  std::size_t n_params() const { return p() + n_free_theta() + 1; }
  std::vector<Eigen::MatrixXd> block_lambdas() const;
  std::vector<FactorLambda> factor_lambdas() const;
};

// Singular values of a factor's Lambda (descending) and whether it is
// numerically rank deficient: s_min < tol * max(1, s_max).
Eigen::VectorXd lambda_singular_values(const Eigen::MatrixXd& lambda);
bool factor_is_singular(const Eigen::VectorXd& singular_values, double tol);
int numeric_rank(const Eigen::VectorXd& singular_values, double tol);

// Bound-constrained minimisation of the profiled deviance with the chosen
// method. Never throws on budget exhaustion; converged is false instead.
FitResult optimize(std::shared_ptr<const ModelMatrices> matrices, const FitOptions& options = {});

FitResult fit_model(const FormulaAST& formula, const Dataset& data, const ContrastScheme& contrasts,
                    const FitOptions& options = {});

// Start values for `next` from a previous fit: each new block starts from
// the previous relative covariance of the components both models share
// (Cholesky of that sub-matrix), identity for new components.
Eigen::VectorXd warm_start(const FitResult& previous, const ModelMatrices& next);

// Rebuilds the matrices for `formula` on `data` with the previous contrast
// scheme and fits from a warm start.
FitResult refit(const FitResult& previous, const FormulaAST& formula, const Dataset& data,
                FitOptions options = {});

}  // namespace parsimix

#endif  // PARSIMIX_FITTER_HPP_
