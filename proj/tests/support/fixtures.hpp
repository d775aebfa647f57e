#ifndef PARSIMIX_TESTS_FIXTURES_HPP_
#define PARSIMIX_TESTS_FIXTURES_HPP_

#include <map>
#include <string>
#include <vector>

#include "parsimix/dataset.hpp"
#include "parsimix/simulate.hpp"

namespace parsimix::testing {

// Y by group G from explicit group vectors.
inline Dataset one_way_data(const std::vector<std::vector<double>>& groups) {
  std::vector<double> y;
  std::vector<std::string> g;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    for (double v : groups[i]) {
      y.push_back(v);
      g.push_back("g" + std::to_string(i + 1));
    }
  }
  Dataset d;
  d.add_numeric("Y", y);
  d.add_factor_labels("G", g);
  return d;
}

// Balanced one-way truth: `groups` x `per_group`, Y ~ 1 + (1 | G).
inline TruthSpec one_way_truth(int groups, int per_group, double sd_group, double sigma, std::uint64_t seed) {
  TruthSpec s;
  s.groups = {{"G", groups}};
  s.replicates = per_group;
  s.formula = "Y ~ 1 + (1 | G)";
  s.beta = {1.0};
  s.covariance["G"] = Eigen::MatrixXd::Constant(1, 1, sd_group * sd_group);
  s.sigma = sigma;
  s.seed = seed;
  return s;
}

// Subjects x observations with a two-level within-subject factor A,
// Y ~ 1 + A + (1 + A | Subject) with the given 2x2 covariance.
inline TruthSpec slope_truth(int subjects, int reps_per_cell, const Eigen::Matrix2d& cov, double sigma,
                             std::uint64_t seed) {
  TruthSpec s;
  s.groups = {{"Subject", subjects}};
  s.factors = {{"A", 2, ""}};
  s.replicates = reps_per_cell;
  s.formula = "Y ~ 1 + A + (1 + A | Subject)";
  s.beta = {0.5, 0.25};
  s.covariance["Subject"] = cov;
  s.sigma = sigma;
  s.seed = seed;
  return s;
}

// Crossed subjects x items, 2x2x2 within both (Latin-square assignment).
inline TruthSpec crossed_truth(int subjects, int items, const std::string& random_part,
                               std::map<std::string, Eigen::MatrixXd> cov, double sigma, std::uint64_t seed) {
  TruthSpec s;
  s.groups = {{"Subject", subjects}, {"Item", items}};
  s.factors = {{"P", 2, ""}, {"C", 2, ""}, {"A", 2, ""}};
  s.assignment = Assignment::Latin;
  s.formula = "Y ~ 1 + P*C*A + " + random_part;
  s.beta = {1.0, 0.1, 0.05, 0.0, 0.0, 0.0, 0.0, 0.0};
  s.covariance = std::move(cov);
  s.sigma = sigma;
  s.seed = seed;
  return s;
}

}  // namespace parsimix::testing

#endif  // PARSIMIX_TESTS_FIXTURES_HPP_
