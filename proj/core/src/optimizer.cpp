#include "parsimix/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace parsimix {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

class Search {
 public:
  Search(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& lower,
         const Eigen::VectorXd& upper, const NelderMeadOptions& options)
      : f_(f), lower_(lower), upper_(upper), opt_(options) {
    const auto n = static_cast<double>(lower.size());
    if (lower.size() >= 2) {
      expand_ = 1.0 + 2.0 / n;
      contract_ = 0.75 - 1.0 / (2.0 * n);
      shrink_ = 1.0 - 1.0 / n;
    }
  }

  bool exhausted() const { return evals_ >= opt_.max_evals; }
  std::size_t evals() const { return evals_; }
  const Eigen::VectorXd& best_x() const { return best_x_; }
  double best_f() const { return best_f_; }

  Eigen::VectorXd project(Eigen::VectorXd x) const {
    return x.cwiseMax(lower_).cwiseMin(upper_);
  }

  // Returns false (without evaluating) once the budget is used up.
  bool eval(const Eigen::VectorXd& x, double& out) {
    if (exhausted()) return false;
    ++evals_;
    out = f_(x);
    if (!std::isfinite(out)) out = kInf;
    if (out < best_f_ || best_x_.size() == 0) {
      best_f_ = out;
      best_x_ = x;
    }
    return true;
  }

  // One Nelder-Mead run from `start`. Returns true on convergence.
  bool run(const Eigen::VectorXd& start, double f_start) {
    const auto n = start.size();
    std::vector<Eigen::VectorXd> pts(static_cast<std::size_t>(n + 1), start);
    std::vector<double> vals(static_cast<std::size_t>(n + 1), f_start);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double h = std::max(opt_.step_rel * std::abs(start[i]), opt_.step_min);
      Eigen::VectorXd x = start;
      x[i] = start[i] + h;
      if (x[i] > upper_[i]) x[i] = start[i] - h;
      x = project(x);
      if (x[i] == start[i]) x[i] = std::clamp(start[i] + h / 2, lower_[i], upper_[i]);
      auto& slot = pts[static_cast<std::size_t>(i + 1)];
      slot = x;
      if (!eval(slot, vals[static_cast<std::size_t>(i + 1)])) return false;
    }

    std::vector<std::size_t> order(pts.size());
    while (true) {
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
      const std::size_t ib = order.front();
      const std::size_t iw = order.back();
      const std::size_t is = order[order.size() - 2];
      if (converged(pts, vals, ib)) return true;
      if (exhausted()) return false;

      Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
      for (std::size_t k = 0; k + 1 < order.size(); ++k) centroid += pts[order[k]];
      centroid /= static_cast<double>(n);

      const Eigen::VectorXd xr = project(centroid + reflect_ * (centroid - pts[iw]));
      double fr;
      if (!eval(xr, fr)) return false;

      if (fr < vals[ib]) {
        const Eigen::VectorXd xe = project(centroid + expand_ * (xr - centroid));
        double fe;
        if (!eval(xe, fe)) return false;
        if (fe < fr) {
          pts[iw] = xe;
          vals[iw] = fe;
        } else {
          pts[iw] = xr;
          vals[iw] = fr;
        }
        continue;
      }
      if (fr < vals[is]) {
        pts[iw] = xr;
        vals[iw] = fr;
        continue;
      }
      bool accepted = false;
      if (fr < vals[iw]) {
        const Eigen::VectorXd xc = project(centroid + contract_ * (xr - centroid));
        double fc;
        if (!eval(xc, fc)) return false;
        if (fc <= fr) {
          pts[iw] = xc;
          vals[iw] = fc;
          accepted = true;
        }
      } else {
        const Eigen::VectorXd xc = project(centroid + contract_ * (pts[iw] - centroid));
        double fc;
        if (!eval(xc, fc)) return false;
        if (fc < vals[iw]) {
          pts[iw] = xc;
          vals[iw] = fc;
          accepted = true;
        }
      }
      if (accepted) continue;
      for (std::size_t k = 0; k < pts.size(); ++k) {
        if (k == ib) continue;
        pts[k] = project(pts[ib] + shrink_ * (pts[k] - pts[ib]));
        if (!eval(pts[k], vals[k])) return false;
      }
    }
  }

 private:
  bool converged(const std::vector<Eigen::VectorXd>& pts, const std::vector<double>& vals,
                 std::size_t ib) const {
    const double fb = vals[ib];
    if (!std::isfinite(fb)) return false;
    double spread = 0.0;
    for (double v : vals) spread = std::max(spread, v - fb);
    if (!(spread <= opt_.ftol_rel * std::max(std::abs(fb), 1e-300))) return false;
    const Eigen::VectorXd& xb = pts[ib];
    for (const auto& p : pts) {
      for (Eigen::Index i = 0; i < xb.size(); ++i) {
        if (std::abs(p[i] - xb[i]) > opt_.xtol_rel * std::max(1.0, std::abs(xb[i]))) return false;
      }
    }
    return true;
  }

  const std::function<double(const Eigen::VectorXd&)>& f_;
  Eigen::VectorXd lower_;
  Eigen::VectorXd upper_;
  NelderMeadOptions opt_;
  double reflect_ = 1.0;
  double expand_ = 2.0;
  double contract_ = 0.5;
  double shrink_ = 0.5;
  std::size_t evals_ = 0;
  Eigen::VectorXd best_x_;
  double best_f_ = kInf;
};

}  // namespace

NelderMeadResult nelder_mead_bounded(const std::function<double(const Eigen::VectorXd&)>& f,
                                     const Eigen::VectorXd& x0, const Eigen::VectorXd& lower,
                                     const Eigen::VectorXd& upper, const NelderMeadOptions& options) {
  if (lower.size() != x0.size() || upper.size() != x0.size()) {
    throw std::invalid_argument("bounds do not match the starting point");
  }
  if ((lower.array() > upper.array()).any()) throw std::invalid_argument("lower bound exceeds upper bound");
  if (options.max_evals == 0) throw std::invalid_argument("evaluation budget must be positive");

  Search search(f, lower, upper, options);
  const Eigen::VectorXd start = search.project(x0);
  double f0 = kInf;
  search.eval(start, f0);
  NelderMeadResult result;
  if (x0.size() == 0) {
    result.x = start;
    result.f = f0;
    result.evals = search.evals();
    result.converged = true;
    return result;
  }

  bool converged = search.run(start, f0);
  for (int r = 0; converged && r < options.max_restarts; ++r) {
    const double before = search.best_f();
    const Eigen::VectorXd x = search.best_x();
    converged = search.run(x, before);
    const double gain = before - search.best_f();
    if (converged && gain <= options.ftol_rel * std::max(std::abs(before), 1e-300)) break;
  }
  result.x = search.best_x();
  result.f = search.best_f();
  result.evals = search.evals();
  result.converged = converged && !std::isinf(result.f);
  return result;
}

}  // namespace parsimix

namespace parsimix {

namespace {

class Budgeted {
 public:
  Budgeted(const std::function<double(const Eigen::VectorXd&)>& f, std::size_t max_evals)
      : f_(f), max_evals_(max_evals) {}

  bool exhausted() const { return evals_ >= max_evals_; }
  std::size_t evals() const { return evals_; }
  const Eigen::VectorXd& best_x() const { return best_x_; }
  double best_f() const { return best_f_; }

  bool eval(const Eigen::VectorXd& x, double& out) {
    if (exhausted()) return false;
    ++evals_;
    out = f_(x);
    if (!std::isfinite(out)) out = kInf;
    if (out < best_f_ || best_x_.size() == 0) {
      best_f_ = out;
      best_x_ = x;
    }
    return true;
  }

 private:
  const std::function<double(const Eigen::VectorXd&)>& f_;
  std::size_t max_evals_;
  std::size_t evals_ = 0;
  Eigen::VectorXd best_x_;
  double best_f_ = kInf;
};

}  // namespace

NelderMeadResult quasi_newton_bounded(const std::function<double(const Eigen::VectorXd&)>& f,
                                      const Eigen::VectorXd& x0, const Eigen::VectorXd& lower,
                                      const Eigen::VectorXd& upper, const QuasiNewtonOptions& options) {
  if (lower.size() != x0.size() || upper.size() != x0.size()) {
    throw std::invalid_argument("bounds do not match the starting point");
  }
  if ((lower.array() > upper.array()).any()) throw std::invalid_argument("lower bound exceeds upper bound");
  if (options.max_evals == 0) throw std::invalid_argument("evaluation budget must be positive");

  const Eigen::Index n = x0.size();
  auto project = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return x.cwiseMax(lower).cwiseMin(upper); };
  Budgeted fn(f, options.max_evals);
  NelderMeadResult result;
  auto finish = [&](bool converged) {
    result.x = fn.best_x();
    result.f = fn.best_f();
    result.evals = fn.evals();
    result.converged = converged && std::isfinite(result.f);
    return result;
  };

  Eigen::VectorXd x = project(x0);
  double fx = kInf;
  fn.eval(x, fx);
  if (n == 0) return finish(true);
  if (!std::isfinite(fx)) return finish(false);

  bool central = false;
  // Returns false when the budget runs out.
  auto gradient = [&](const Eigen::VectorXd& at, double f_at, Eigen::VectorXd& g) {
    g.resize(n);
    Eigen::VectorXd probe = at;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double h = options.fd_rel * std::max(1.0, std::abs(at[i]));
      double a = 0.0, b = 0.0;
      if (!central && at[i] + h <= upper[i]) {
        probe[i] = at[i] + h;
        if (!fn.eval(probe, a)) return false;
        g[i] = (a - f_at) / h;
      } else if (at[i] - h >= lower[i] && at[i] + h <= upper[i]) {
        probe[i] = at[i] + h;
        if (!fn.eval(probe, a)) return false;
        probe[i] = at[i] - h;
        if (!fn.eval(probe, b)) return false;
        g[i] = (a - b) / (2.0 * h);
      } else {
        const double s = at[i] - h < lower[i] ? 1.0 : -1.0;
        probe[i] = at[i] + s * h;
        if (!fn.eval(probe, a)) return false;
        probe[i] = at[i] + 2.0 * s * h;
        if (!fn.eval(probe, b)) return false;
        g[i] = s * (-3.0 * f_at + 4.0 * a - b) / (2.0 * h);
      }
      probe[i] = at[i];
      if (!std::isfinite(g[i])) g[i] = 0.0;
    }
    return true;
  };
  auto projected_gradient_norm = [&](const Eigen::VectorXd& at, const Eigen::VectorXd& g) {
    return (at - project(at - g)).cwiseAbs().maxCoeff();
  };
  auto is_active = [&](const Eigen::VectorXd& at, const Eigen::VectorXd& g, Eigen::Index i) {
    return (at[i] <= lower[i] && g[i] > 0.0) || (at[i] >= upper[i] && g[i] < 0.0);
  };

  Eigen::VectorXd g;
  if (!gradient(x, fx, g)) return finish(false);
  Eigen::MatrixXd hinv = Eigen::MatrixXd::Identity(n, n);
  bool scaled = false;

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    const double pg = projected_gradient_norm(x, g);
    if (!central && pg < options.central_switch) {
      central = true;
      if (!gradient(x, fx, g)) return finish(false);
      continue;
    }
    if (central && pg < options.gtol_abs) return finish(true);

    bool reset = false;
    while (true) {
      Eigen::VectorXd d = -hinv * g;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (is_active(x, g, i)) d[i] = 0.0;
      }
      double slope = g.dot(d);
      if (!(slope < 0.0)) {
        hinv.setIdentity();
        d = -g;
        for (Eigen::Index i = 0; i < n; ++i) {
          if (is_active(x, g, i)) d[i] = 0.0;
        }
        slope = g.dot(d);
        if (!(slope < 0.0)) return finish(true);
      }

      const double longest = d.cwiseAbs().maxCoeff();
      double alpha = longest > options.max_step ? options.max_step / longest : 1.0;
      Eigen::VectorXd xn;
      double fn_val = kInf;
      bool found = false;
      for (int k = 0; k < 40; ++k) {
        xn = project(x + alpha * d);
        if (!fn.eval(xn, fn_val)) return finish(false);
        if (fn_val <= fx + 1e-4 * g.dot(xn - x)) {
          found = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!found) {
        if (reset) return finish(projected_gradient_norm(x, g) < 1e3 * options.gtol_abs);
        hinv.setIdentity();
        reset = true;
        continue;
      }

      Eigen::VectorXd gn;
      if (!gradient(xn, fn_val, gn)) return finish(false);
      const Eigen::VectorXd s = xn - x;
      const Eigen::VectorXd y = gn - g;
      const double sy = s.dot(y);
      const double decrease = fx - fn_val;
      x = xn;
      g = gn;
      const double f_prev = fx;
      fx = fn_val;
      if (sy > 1e-12 * s.norm() * y.norm()) {
        if (!scaled) {
          hinv *= sy / y.squaredNorm();
          scaled = true;
        }
        const double rho = 1.0 / sy;
        const Eigen::VectorXd hy = hinv * y;
        hinv += (rho * rho * y.dot(hy) + rho) * s * s.transpose() - rho * (hy * s.transpose() + s * hy.transpose());
      }
      if (decrease <= options.ftol_rel * std::abs(f_prev)) {
        if (central) return finish(true);
        central = true;
        if (!gradient(x, fx, g)) return finish(false);
      }
      break;
    }
  }
  return finish(false);
}

}  // namespace parsimix
