#ifndef PARSIMIX_COVPARAM_HPP_
#define PARSIMIX_COVPARAM_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace parsimix {

// Per-block layout of the flat theta vector. Block b occupies
// [offsets[b], offsets[b] + dims[b]*(dims[b]+1)/2) and is the column-major
// lower triangle of that block's relative Cholesky factor.
struct ThetaLayout {
  std::vector<int> dims;
  std::vector<std::size_t> offsets;
  std::size_t size = 0;

  static ThetaLayout from_dims(std::vector<int> dims);
  // Lower bounds: 0 on diagonal entries, -inf elsewhere.
  Eigen::VectorXd lower_bounds() const;
  // True for entries that sit on a diagonal of Lambda.
  std::vector<bool> diagonal_mask() const;
  // Default start: diagonal 1, off-diagonal 0.
  Eigen::VectorXd default_start() const;
  bool within_bounds(std::span<const double> theta) const;
};

// Fills a d x d lower-triangular matrix column by column:
// (1,1), (2,1), ..., (d,1), (2,2), ..., (d,d).
Eigen::MatrixXd theta_to_lambda(std::span<const double> theta, int d);

// Inverse of theta_to_lambda (reads the lower triangle column-major).
Eigen::VectorXd lambda_to_theta(const Eigen::MatrixXd& lambda);

// sigma^2 * Lambda * Lambda', assembled so the result is exactly symmetric.
Eigen::MatrixXd lambda_to_cov(const Eigen::MatrixXd& lambda, double sigma);

struct CovarianceSummary {
  Eigen::VectorXd sd;
  // Correlations; std::nullopt where a standard deviation is zero.
  std::vector<std::vector<std::optional<double>>> cor;
  bool singular = false;
};

// Standard deviations and correlations. Singular when the smallest
// eigenvalue is below tol^2 times max(1, largest) or some SD is zero.
CovarianceSummary cov_to_sd_cor(const Eigen::MatrixXd& cov, double tol = 1e-4);

// Number of covariance parameters of a d-dimensional term: d(d+1)/2.
std::size_t count_params(int d);

// Covariance parameters of a maximal model: sum over random factors of
// m(m+1)/2, m the product of the within-factor level counts.
std::size_t max_params_for_design(std::span<const int> level_products);

// Pivoted Cholesky for positive semidefinite matrices: returns F with
// F F' = a. Zero pivots leave the corresponding column exactly zero.
// Throws std::invalid_argument if `a` is not PSD within tolerance.
Eigen::MatrixXd pivoted_cholesky(const Eigen::MatrixXd& a, double tol = 1e-12);

}  // namespace parsimix

#endif  // PARSIMIX_COVPARAM_HPP_
