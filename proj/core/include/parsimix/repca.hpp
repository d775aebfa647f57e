#ifndef PARSIMIX_REPCA_HPP_
#define PARSIMIX_REPCA_HPP_

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "parsimix/fitter.hpp"

namespace parsimix {

inline constexpr double kDimTolerance = 1e-4;

// Principal components of one grouping factor's relative covariance
// Lambda Lambda'. Variances are the squared singular values of Lambda.
struct FactorPca {
  std::string group;
  std::vector<std::string> labels;
  Eigen::VectorXd singular_values;  // descending
  Eigen::VectorXd proportions;
  Eigen::VectorXd cumulative;
  int dim = 0;   // effective dimensionality
  int rank = 0;  // numeric rank under the singularity tolerance
};

struct RePcaResult {
  std::vector<FactorPca> factors;
  double dim_tol = kDimTolerance;
  double singular_tol = kSingularTolerance;

  const FactorPca* find(const std::string& group) const;
};

class RePcaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Smallest m (1-based) with cumulative[m-1] >= 1 - tol. Returns the
// sequence length if no entry qualifies and 0 for an empty sequence.
int effective_dimensionality(const Eigen::VectorXd& cumulative, double tol = kDimTolerance);

FactorPca factor_pca(const std::string& group, const Eigen::MatrixXd& lambda, double dim_tol = kDimTolerance,
                     double singular_tol = kSingularTolerance);

RePcaResult re_pca(const FitResult& fit, double dim_tol = kDimTolerance);

}  // namespace parsimix

#endif  // PARSIMIX_REPCA_HPP_
