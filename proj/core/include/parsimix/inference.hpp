#ifndef PARSIMIX_INFERENCE_HPP_
#define PARSIMIX_INFERENCE_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "parsimix/fitter.hpp"

namespace parsimix {

class InferenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Upper tail of the central chi-square distribution. df = 0 is the
// degenerate comparison: 1 when chisq = 0, otherwise 0.
double chisq_p_value(double chisq, int df);

struct LrtResult {
  double chisq = 0.0;
  int df = 0;
  double p_value = 1.0;
  Criterion criterion = Criterion::REML;
  bool refit_ml = false;   // fixed effects differed, both models refitted under ML
  bool degenerate = false; // df = 0
  double deviance_small = 0.0;
  double deviance_large = 0.0;
};

// True when every fixed column and every random-effects block of `small`
// is present in `large`: fixed labels are a subset and each block of
// `small` lies inside a block of `large` on the same grouping factor.
bool is_nested(const ModelMatrices& small, const ModelMatrices& large);

// Likelihood-ratio test of nested fits on the same data. Under REML the
// fixed-effects columns must agree; otherwise both models are refitted
// under ML from their estimates and refit_ml is set.
LrtResult lr_test(const FitResult& small, const FitResult& large);

struct InformationCriteria {
  double aic = 0.0;
  double bic = 0.0;
  std::size_t k = 0;
};

InformationCriteria information_criteria(const FitResult& fit);
InformationCriteria information_criteria(double deviance, std::size_t k, std::size_t n);

struct FixedEffectRow {
  std::string label;
  double estimate = 0.0;
  double se = 0.0;
  double t = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

// Wald summary: SE from sigma^2 (R_X' R_X)^{-1}, interval estimate +- 1.96 SE.
std::vector<FixedEffectRow> fixed_effects_table(const FitResult& fit);

}  // namespace parsimix

#endif  // PARSIMIX_INFERENCE_HPP_
