#include "parsimix/inference.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/gamma.hpp>

namespace parsimix {

double chisq_p_value(double chisq, int df) {
  if (std::isnan(chisq)) throw std::invalid_argument("chi-square statistic is NaN");
  if (df < 0) throw std::invalid_argument("degrees of freedom must be >= 0");
  if (chisq < 0.0) throw std::invalid_argument("chi-square statistic must be >= 0");
  if (df == 0) return chisq == 0.0 ? 1.0 : 0.0;
  if (chisq == 0.0) return 1.0;
  if (std::isinf(chisq)) return 0.0;
  return boost::math::gamma_q(0.5 * df, 0.5 * chisq);
}

namespace {

bool subset_of(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  return std::all_of(a.begin(), a.end(),
                     [&](const std::string& s) { return std::find(b.begin(), b.end(), s) != b.end(); });
}

bool same_data(const ModelMatrices& a, const ModelMatrices& b) {
  return a.data.rows == b.data.rows && a.data.content_hash == b.data.content_hash &&
         a.response_hash == b.response_hash && a.n() == b.n();
}

FitResult refit_ml(const FitResult& fit) {
  FitOptions opts;
  opts.criterion = Criterion::ML;
  opts.start = fit.theta;
  opts.fixed = fit.fixed_theta;
  opts.singular_tol = fit.singular_tol;
  return optimize(fit.matrices, opts);
}

}  // namespace

bool is_nested(const ModelMatrices& small, const ModelMatrices& large) {
  if (small.formula.response != large.formula.response) return false;
  if (!subset_of(small.fixed_labels, large.fixed_labels)) return false;
  for (const auto& sb : small.blocks) {
    const bool covered = std::any_of(large.blocks.begin(), large.blocks.end(), [&](const RandomBlock& lb) {
      return lb.group == sb.group && subset_of(sb.labels, lb.labels);
    });
    if (!covered) return false;
  }
  return true;
}

LrtResult lr_test(const FitResult& small, const FitResult& large) {
  const ModelMatrices& ms = *small.matrices;
  const ModelMatrices& ml = *large.matrices;
  if (!same_data(ms, ml)) throw InferenceError("models were fitted to different data");
  if (!is_nested(ms, ml)) {
    throw InferenceError("models are not nested: '" + format_formula(ms.formula) + "' is not contained in '" +
                         format_formula(ml.formula) + "'");
  }
  if (small.criterion != large.criterion) throw InferenceError("models were fitted under different criteria");
  if (small.n_params() > large.n_params()) {
    throw InferenceError("the smaller model has more parameters than the larger one");
  }

  LrtResult out;
  out.criterion = small.criterion;
  double dev_small = small.deviance;
  double dev_large = large.deviance;
  const bool fixed_differ = ms.fixed_labels != ml.fixed_labels;
  if (fixed_differ && small.criterion == Criterion::REML) {
    dev_small = refit_ml(small).deviance;
    dev_large = refit_ml(large).deviance;
    out.criterion = Criterion::ML;
    out.refit_ml = true;
  }
  out.deviance_small = dev_small;
  out.deviance_large = dev_large;
  out.chisq = std::max(0.0, dev_small - dev_large);
  out.df = static_cast<int>(large.n_params() - small.n_params());
  out.degenerate = out.df == 0;
  out.p_value = chisq_p_value(out.chisq, out.df);
  return out;
}

InformationCriteria information_criteria(double deviance, std::size_t k, std::size_t n) {
  InformationCriteria ic;
  ic.k = k;
  ic.aic = deviance + 2.0 * static_cast<double>(k);
  ic.bic = deviance + static_cast<double>(k) * std::log(static_cast<double>(n));
  return ic;
}

InformationCriteria information_criteria(const FitResult& fit) {
  return information_criteria(fit.deviance, fit.n_params(), fit.n());
}

std::vector<FixedEffectRow> fixed_effects_table(const FitResult& fit) {
  const auto& labels = fit.matrices->fixed_labels;
  const Eigen::MatrixXd& v = fit.beta_unscaled_cov;
  if (v.rows() != fit.beta.size() || !v.allFinite()) {
    throw InferenceError("fixed-effects covariance is unavailable or singular");
  }
  std::vector<FixedEffectRow> rows;
  for (Eigen::Index j = 0; j < fit.beta.size(); ++j) {
    FixedEffectRow r;
    r.label = labels[static_cast<std::size_t>(j)];
    r.estimate = fit.beta[j];
    if (!(v(j, j) > 0.0)) throw InferenceError("fixed-effects block is singular");
    r.se = fit.sigma * std::sqrt(v(j, j));
    r.t = r.estimate / r.se;
    r.lower = r.estimate - 1.96 * r.se;
    r.upper = r.estimate + 1.96 * r.se;
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace parsimix
