#ifndef PARSIMIX_OPTIMIZER_HPP_
#define PARSIMIX_OPTIMIZER_HPP_

#include <cstddef>
#include <functional>

#include <Eigen/Dense>

namespace parsimix {

struct NelderMeadOptions {
  std::size_t max_evals = 2000;
  // Stop when the spread of simplex values is below ftol_rel * |f_best| and
  // every vertex lies within xtol_rel * max(1, |x_best|) of the best vertex.
  double ftol_rel = 1e-8;
  double xtol_rel = 1e-8;
  // Initial simplex edge: max(step_rel * |x_i|, step_min) along each axis.
  double step_rel = 0.1;
  double step_min = 0.05;
  // Fresh simplexes around the best point after convergence; a restart that
  // does not improve f by more than ftol ends the search.
  int max_restarts = 2;
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double f = 0.0;
  std::size_t evals = 0;
  bool converged = false;
};

// Derivative-free minimisation within the box [lower, upper]. Trial points
// are projected onto the box; reflection, expansion, contraction and shrink
// coefficients follow the dimension-adaptive scheme of Gao and Han (2012)
// for n >= 2. Non-finite objective values are treated as +inf. The result
// is the best point seen, also when the evaluation budget runs out.
NelderMeadResult nelder_mead_bounded(const std::function<double(const Eigen::VectorXd&)>& f,
                                     const Eigen::VectorXd& x0, const Eigen::VectorXd& lower,
                                     const Eigen::VectorXd& upper, const NelderMeadOptions& options);

struct QuasiNewtonOptions {
  std::size_t max_evals = 2000;
  // Converged when the largest projected-gradient component is below
  // gtol_abs, or when an iteration lowers f by less than ftol_rel * |f|
  // (0 disables the second test, which depends on the level of f).
  double gtol_abs = 1e-6;
  double ftol_rel = 0.0;
  // Finite-difference step: fd_rel * max(1, |x_i|). Forward differences
  // are used until the projected gradient falls below central_switch.
  double fd_rel = 6e-6;
  double central_switch = 0.1;
  // Longest move of any coordinate in one line search.
  double max_step = 0.5;
  int max_iterations = 1000;
};

// Projected BFGS within the box [lower, upper] using finite-difference
// gradients (forward, then central or one-sided second-order at a bound)
// and an Armijo backtracking search along the projected path. Only objective values are
// used. Non-finite values are treated as +inf. The result is the best point
// seen, also when the evaluation budget runs out.
NelderMeadResult quasi_newton_bounded(const std::function<double(const Eigen::VectorXd&)>& f,
                                      const Eigen::VectorXd& x0, const Eigen::VectorXd& lower,
                                      const Eigen::VectorXd& upper, const QuasiNewtonOptions& options);

}  // namespace parsimix

#endif  // PARSIMIX_OPTIMIZER_HPP_
