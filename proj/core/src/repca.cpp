#include "parsimix/repca.hpp"

namespace parsimix {

const FactorPca* RePcaResult::find(const std::string& group) const {
  for (const auto& f : factors) {
    if (f.group == group) return &f;
  }
  return nullptr;
}

int effective_dimensionality(const Eigen::VectorXd& cumulative, double tol) {
  for (Eigen::Index m = 0; m < cumulative.size(); ++m) {
    if (cumulative[m] >= 1.0 - tol) return static_cast<int>(m + 1);
  }
  return static_cast<int>(cumulative.size());
}

FactorPca factor_pca(const std::string& group, const Eigen::MatrixXd& lambda, double dim_tol,
                     double singular_tol) {
  FactorPca out;
  out.group = group;
  out.singular_values = lambda_singular_values(lambda);
  const Eigen::VectorXd var = out.singular_values.array().square();
  const double total = var.sum();
  const auto d = var.size();
  out.proportions = Eigen::VectorXd::Zero(d);
  out.cumulative = Eigen::VectorXd::Zero(d);
  if (total > 0.0) {
    out.proportions = var / total;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
      acc += out.proportions[i];
      out.cumulative[i] = acc;
    }
    if (d > 0) out.cumulative[d - 1] = 1.0;
    out.dim = effective_dimensionality(out.cumulative, dim_tol);
  }
  out.rank = numeric_rank(out.singular_values, singular_tol);
  return out;
}

RePcaResult re_pca(const FitResult& fit, double dim_tol) {
  const auto lambdas = fit.factor_lambdas();
  if (lambdas.empty()) throw RePcaError("model has no random-effects terms");
  RePcaResult out;
  out.dim_tol = dim_tol;
  out.singular_tol = fit.singular_tol;
  for (const auto& f : lambdas) {
    FactorPca pca = factor_pca(f.group, f.lambda, dim_tol, fit.singular_tol);
    pca.labels = f.labels;
    out.factors.push_back(std::move(pca));
  }
  return out;
}

}  // namespace parsimix
