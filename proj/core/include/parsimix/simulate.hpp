#ifndef PARSIMIX_SIMULATE_HPP_
#define PARSIMIX_SIMULATE_HPP_

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "parsimix/dataset.hpp"
#include "parsimix/design.hpp"

namespace parsimix {

// splitmix64: the state advances by a fixed odd increment and each output
// is a bijective mix of the state, so stream position n is a pure function
// of (seed, n). Normals by the Box-Muller transform.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next();
  // Uniform on the open interval (0, 1).
  double uniform();
  double normal();

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A grouping factor of the design; all grouping factors are crossed.
struct GroupSpec {
  std::string name;
  int levels = 0;
};

// An experimental factor. Within-unit unless `between` names a grouping
// factor, in which case unit u of that factor gets level u mod levels.
struct FactorSpec {
  std::string name;
  int levels = 2;
  std::string between;
};

enum class Assignment {
  Full,   // every crossing of grouping levels sees every within-factor cell
  Latin,  // one cell per crossing, cell = (sum of group indices) mod #cells
};

struct TruthSpec {
  std::vector<GroupSpec> groups;
  std::vector<FactorSpec> factors;
  Assignment assignment = Assignment::Full;
  int replicates = 1;
  std::string formula;  // generating model, e.g. "Y ~ 1 + A + (1 + A | Subject)"
  ContrastScheme contrasts;
  std::vector<double> beta;  // one per fixed column; empty means all zero
  // Per grouping factor: covariance (response units^2) over the random
  // columns of all terms on that factor, in formula order. May be singular.
  std::map<std::string, Eigen::MatrixXd> covariance;
  double sigma = 1.0;
  std::uint64_t seed = 42;
};

// Design rows without a response: grouping and experimental factors.
Dataset design_frame(const TruthSpec& spec);

// y = X beta + sum_f Z_f b_f + e with b_f ~ N(0, covariance_f) drawn via a
// pivoted Cholesky factor, e ~ N(0, sigma^2). Deterministic given the seed.
Dataset simulate_lmm(const TruthSpec& spec);

// `levels` draws from N(0, cov), one per row of the result.
Eigen::MatrixXd draw_effects(const Eigen::MatrixXd& cov, int levels, SplitMix64& rng);

struct OneWayOracle {
  int groups = 0;
  int per_group = 0;
  double ssb = 0.0;
  double ssw = 0.0;
  double msb = 0.0;
  double msw = 0.0;
  double sigma2 = 0.0;
  double sigma_b2 = 0.0;
  double reml_deviance = 0.0;
};

// REML estimates and deviance of y ~ 1 + (1 | group) on a balanced layout
// from the ANOVA mean squares. When MSB < MSW the group variance is 0 and
// sigma^2 = (SSW + SSB) / (N - 1).
OneWayOracle closed_form_one_way(const Dataset& data, const std::string& response, const std::string& group);
OneWayOracle closed_form_one_way(const std::vector<std::vector<double>>& groups);

}  // namespace parsimix

#endif  // PARSIMIX_SIMULATE_HPP_
