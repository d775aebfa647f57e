#include "parsimix/fitter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <set>

namespace parsimix {

const char* to_string(Criterion c) {
  return c == Criterion::ML ? "ML" : "REML";
}

Criterion parse_criterion(const std::string& text) {
  if (text == "ml" || text == "ML") return Criterion::ML;
  if (text == "reml" || text == "REML") return Criterion::REML;
  throw std::invalid_argument("unknown criterion '" + text + "' (expected ml or reml)");
}

const char* to_string(OptimizerMethod m) {
  return m == OptimizerMethod::NelderMead ? "nelder-mead" : "quasi-newton";
}

OptimizerMethod parse_optimizer(const std::string& text) {
  if (text == "nelder-mead") return OptimizerMethod::NelderMead;
  if (text == "quasi-newton") return OptimizerMethod::QuasiNewton;
  throw std::invalid_argument("unknown optimizer '" + text + "' (expected nelder-mead or quasi-newton)");
}

namespace {

std::vector<int> block_dims(const ModelMatrices& mm) {
  std::vector<int> dims;
  for (const auto& b : mm.blocks) dims.push_back(b.d);
  return dims;
}

// Cholesky with one ridge retry. Returns false if both attempts fail.
bool robust_llt(const Eigen::MatrixXd& a, Eigen::LLT<Eigen::MatrixXd>& llt) {
  llt.compute(a);
  if (llt.info() == Eigen::Success) return true;
  Eigen::MatrixXd ridged = a;
  const double ridge = 1e-10 * std::max(a.diagonal().cwiseAbs().maxCoeff(), 1.0);
  ridged.diagonal().array() += ridge;
  llt.compute(ridged);
  return llt.info() == Eigen::Success;
}

}  // namespace

DevianceEvaluator::DevianceEvaluator(std::shared_ptr<const ModelMatrices> matrices)
    : mm_(std::move(matrices)), layout_(ThetaLayout::from_dims(block_dims(*mm_))) {
  const ModelMatrices& mm = *mm_;
  const auto n = static_cast<Eigen::Index>(mm.n());
  if (mm.X.rows() != n) throw FitError("X and y have different row counts");
  for (const auto& b : mm.blocks) {
    if (b.values.rows() != n || static_cast<Eigen::Index>(b.level.size()) != n) {
      throw FitError("random-effects block for '" + b.group + "' has the wrong row count");
    }
    if (b.values.cols() != b.d) throw FitError("random-effects block dimension mismatch");
  }

  std::map<std::string, std::size_t> by_group;
  for (std::size_t bi = 0; bi < mm.blocks.size(); ++bi) {
    const auto& b = mm.blocks[bi];
    auto [it, inserted] = by_group.try_emplace(b.group, factors_.size());
    if (inserted) {
      Factor f;
      f.group = b.group;
      f.levels = b.k;
      factors_.push_back(std::move(f));
    }
    Factor& f = factors_[it->second];
    if (f.levels != b.k) throw FitError("blocks on group '" + b.group + "' disagree on level count");
    f.blocks.push_back(bi);
    f.block_offset.push_back(f.dim);
    f.dim += b.d;
  }
  // Eliminate the widest factor blockwise.
  if (!factors_.empty()) {
    auto widest = std::max_element(factors_.begin(), factors_.end(), [](const Factor& a, const Factor& b) {
      return static_cast<long>(a.dim) * a.levels < static_cast<long>(b.dim) * b.levels;
    });
    std::rotate(factors_.begin(), widest, widest + 1);
  }
  for (std::size_t fi = 1; fi < factors_.size(); ++fi) {
    factors_[fi].base = q_rest_;
    q_rest_ += static_cast<Eigen::Index>(factors_[fi].dim) * factors_[fi].levels;
  }
  p_ = mm.X.cols();
  m1_ = q_rest_ + p_ + 1;

  // Sparse rows of [Z_rest X y].
  std::vector<Eigen::Index> idx;
  std::vector<double> val;
  auto build_row = [&](Eigen::Index i) {
    idx.clear();
    val.clear();
    for (std::size_t fi = 1; fi < factors_.size(); ++fi) {
      const Factor& f = factors_[fi];
      for (std::size_t k = 0; k < f.blocks.size(); ++k) {
        const RandomBlock& b = mm.blocks[f.blocks[k]];
        const Eigen::Index col0 = f.base + static_cast<Eigen::Index>(b.level[i]) * f.dim + f.block_offset[k];
        for (int j = 0; j < b.d; ++j) {
          idx.push_back(col0 + j);
          val.push_back(b.values(i, j));
        }
      }
    }
    for (Eigen::Index j = 0; j < p_; ++j) {
      idx.push_back(q_rest_ + j);
      val.push_back(mm.X(i, j));
    }
    idx.push_back(m1_ - 1);
    val.push_back(mm.y[i]);
  };

  g_ = Eigen::MatrixXd::Zero(m1_, m1_);
  if (!factors_.empty()) {
    const Factor& f0 = factors_[0];
    a_.assign(static_cast<std::size_t>(f0.levels), Eigen::MatrixXd::Zero(f0.dim, f0.dim));
    c_.assign(static_cast<std::size_t>(f0.levels), Eigen::MatrixXd::Zero(f0.dim, m1_));
  }
  Eigen::VectorXd z0;
  for (Eigen::Index i = 0; i < n; ++i) {
    build_row(i);
    for (std::size_t a = 0; a < idx.size(); ++a) {
      for (std::size_t b = 0; b <= a; ++b) g_(idx[a], idx[b]) += val[a] * val[b];
    }
    if (factors_.empty()) continue;
    const Factor& f0 = factors_[0];
    z0.setZero(f0.dim);
    int level = 0;
    for (std::size_t k = 0; k < f0.blocks.size(); ++k) {
      const RandomBlock& b = mm.blocks[f0.blocks[k]];
      level = b.level[i];
      z0.segment(f0.block_offset[k], b.d) = b.values.row(i).transpose();
    }
    auto& a = a_[static_cast<std::size_t>(level)];
    a.noalias() += z0 * z0.transpose();
    auto& c = c_[static_cast<std::size_t>(level)];
    for (std::size_t e = 0; e < idx.size(); ++e) c.col(idx[e]) += val[e] * z0;
  }
  g_.triangularView<Eigen::StrictlyUpper>() = g_.transpose();
}

Eigen::MatrixXd DevianceEvaluator::factor_lambda(const Factor& f, std::span<const double> theta) const {
  Eigen::MatrixXd lambda = Eigen::MatrixXd::Zero(f.dim, f.dim);
  for (std::size_t k = 0; k < f.blocks.size(); ++k) {
    const std::size_t bi = f.blocks[k];
    const int d = layout_.dims[bi];
    lambda.block(f.block_offset[k], f.block_offset[k], d, d) =
        theta_to_lambda(theta.subspan(layout_.offsets[bi], count_params(d)), d);
  }
  return lambda;
}

// Right-multiplies the rest random-effects columns of m by block-diag(Lambda_F).
void DevianceEvaluator::scale_columns(Eigen::MatrixXd& m, const std::vector<Eigen::MatrixXd>& rest) const {
  Eigen::MatrixXd tmp;
  for (std::size_t fi = 1; fi < factors_.size(); ++fi) {
    const Factor& f = factors_[fi];
    const Eigen::MatrixXd& lambda = rest[fi];
    for (int l = 0; l < f.levels; ++l) {
      const Eigen::Index c = f.base + static_cast<Eigen::Index>(l) * f.dim;
      tmp.noalias() = m.middleCols(c, f.dim) * lambda;
      m.middleCols(c, f.dim) = tmp;
    }
  }
}

// Left-multiplies the rest random-effects rows of m by block-diag(Lambda_F').
void DevianceEvaluator::scale_rows(Eigen::MatrixXd& m, const std::vector<Eigen::MatrixXd>& rest) const {
  Eigen::MatrixXd tmp;
  for (std::size_t fi = 1; fi < factors_.size(); ++fi) {
    const Factor& f = factors_[fi];
    const Eigen::MatrixXd& lambda = rest[fi];
    for (int l = 0; l < f.levels; ++l) {
      const Eigen::Index r = f.base + static_cast<Eigen::Index>(l) * f.dim;
      tmp.noalias() = lambda.transpose() * m.middleRows(r, f.dim);
      m.middleRows(r, f.dim) = tmp;
    }
  }
}

PlsSolution DevianceEvaluator::evaluate(std::span<const double> theta, Criterion criterion,
                                        bool want_beta) const {
  if (theta.size() != layout_.size) {
    throw FitError("theta has length " + std::to_string(theta.size()) + ", model needs " +
                   std::to_string(layout_.size));
  }
  std::vector<Eigen::MatrixXd> lambdas(factors_.size());
  for (std::size_t fi = 0; fi < factors_.size(); ++fi) lambdas[fi] = factor_lambda(factors_[fi], theta);

  // H = S' (G - W'W) S + I on the rest random-effects part, where
  // W = L0^{-1} Lambda0' C stacks the eliminated levels of factor 0.
  Eigen::MatrixXd h = g_;
  double ld_l2 = 0.0;
  if (!factors_.empty()) {
    const Factor& f0 = factors_[0];
    const Eigen::MatrixXd& l0 = lambdas[0];
    const Eigen::Index d0 = f0.dim;
    Eigen::MatrixXd w(static_cast<Eigen::Index>(f0.levels) * d0, m1_);
    Eigen::MatrixXd mat(d0, d0);
    Eigen::MatrixXd t(d0, d0);
    Eigen::LLT<Eigen::MatrixXd> llt;
    for (int l = 0; l < f0.levels; ++l) {
      const auto ls = static_cast<std::size_t>(l);
      mat.noalias() = l0.transpose() * a_[ls] * l0;
      mat.diagonal().array() += 1.0;
      if (!robust_llt(mat, llt)) throw FitError("random-effects system is not positive definite");
      ld_l2 += 2.0 * llt.matrixLLT().diagonal().array().log().sum();
      t = l0.transpose();
      llt.matrixL().solveInPlace(t);
      w.middleRows(static_cast<Eigen::Index>(l) * d0, d0).noalias() = t * c_[ls];
    }
    // Lower triangle of W'W in column panels.
    constexpr Eigen::Index kPanel = 64;
    for (Eigen::Index j0 = 0; j0 < m1_; j0 += kPanel) {
      const Eigen::Index b = std::min(kPanel, m1_ - j0);
      h.block(j0, j0, m1_ - j0, b).noalias() -= w.middleCols(j0, m1_ - j0).transpose() * w.middleCols(j0, b);
    }
  }
  h.triangularView<Eigen::StrictlyUpper>() = h.transpose();
  scale_columns(h, lambdas);
  scale_rows(h, lambdas);
  h.diagonal().head(q_rest_).array() += 1.0;

  const Eigen::Index m = m1_ - 1;
  Eigen::LLT<Eigen::MatrixXd> llt;
  if (!robust_llt(h.topLeftCorner(m, m), llt)) {
    throw FitError("penalised least-squares system is not positive definite");
  }
  const auto& lmat = llt.matrixLLT();
  Eigen::VectorXd cross = h.row(m).head(m).transpose();
  llt.matrixL().solveInPlace(cross);
  const double pwrss = h(m, m) - cross.squaredNorm();
  if (!(pwrss > 0.0)) throw FitError("penalised residual sum of squares is not positive");

  for (Eigen::Index j = 0; j < q_rest_; ++j) ld_l2 += 2.0 * std::log(lmat(j, j));
  double ld_rx2 = 0.0;
  for (Eigen::Index j = q_rest_; j < m; ++j) ld_rx2 += 2.0 * std::log(lmat(j, j));

  const double n = static_cast<double>(mm_->n());
  const double p = static_cast<double>(p_);
  constexpr double two_pi = 2.0 * std::numbers::pi;
  PlsSolution out;
  out.pwrss = pwrss;
  out.ld_l2 = ld_l2;
  out.ld_rx2 = ld_rx2;
  if (criterion == Criterion::ML) {
    out.deviance = ld_l2 + n * (1.0 + std::log(two_pi * pwrss / n));
    out.sigma = std::sqrt(pwrss / n);
  } else {
    const double dof = n - p;
    if (dof <= 0.0) throw FitError("REML needs more observations than fixed effects");
    out.deviance = ld_l2 + ld_rx2 + dof * (1.0 + std::log(two_pi * pwrss / dof));
    out.sigma = std::sqrt(pwrss / dof);
  }
  if (want_beta) {
    Eigen::VectorXd sol = llt.matrixU().solve(cross);
    out.beta = sol.tail(p_);
    const Eigen::MatrixXd lx = lmat.bottomRightCorner(p_, p_).triangularView<Eigen::Lower>();
    Eigen::MatrixXd inv = Eigen::MatrixXd::Identity(p_, p_);
    lx.triangularView<Eigen::Lower>().solveInPlace(inv);
    out.beta_unscaled_cov = inv.transpose() * inv;
  }
  return out;
}

double DevianceEvaluator::deviance(std::span<const double> theta, Criterion criterion) const {
  return evaluate(theta, criterion, false).deviance;
}

PlsSolution DevianceEvaluator::solve(std::span<const double> theta, Criterion criterion) const {
  return evaluate(theta, criterion, true);
}

double profiled_deviance(std::span<const double> theta, const ModelMatrices& matrices, Criterion criterion) {
  DevianceEvaluator ev(std::make_shared<const ModelMatrices>(matrices));
  return ev.deviance(theta, criterion);
}

std::size_t default_budget(std::size_t n_theta) {
  return std::max<std::size_t>(10 * n_theta * n_theta, 2000);
}

std::size_t FitResult::n_free_theta() const {
  std::size_t free = 0;
  for (std::size_t i = 0; i < layout.size; ++i) {
    if (fixed_theta.empty() || !fixed_theta[i]) ++free;
  }
  return free;
}

std::vector<Eigen::MatrixXd> FitResult::block_lambdas() const {
  std::vector<Eigen::MatrixXd> out;
  const std::span<const double> t(theta.data(), static_cast<std::size_t>(theta.size()));
  for (std::size_t b = 0; b < layout.dims.size(); ++b) {
    out.push_back(theta_to_lambda(t.subspan(layout.offsets[b], count_params(layout.dims[b])), layout.dims[b]));
  }
  return out;
}

std::vector<FactorLambda> FitResult::factor_lambdas() const {
  const auto blocks = block_lambdas();
  std::vector<FactorLambda> out;
  for (std::size_t b = 0; b < matrices->blocks.size(); ++b) {
    const RandomBlock& rb = matrices->blocks[b];
    auto it = std::find_if(out.begin(), out.end(), [&](const FactorLambda& f) { return f.group == rb.group; });
    if (it == out.end()) {
      out.push_back(FactorLambda{rb.group, {}, {}, Eigen::MatrixXd()});
      it = out.end() - 1;
    }
    const auto old = it->lambda.rows();
    Eigen::MatrixXd grown = Eigen::MatrixXd::Zero(old + rb.d, old + rb.d);
    grown.topLeftCorner(old, old) = it->lambda;
    grown.bottomRightCorner(rb.d, rb.d) = blocks[b];
    it->lambda = std::move(grown);
    it->blocks.push_back(b);
    for (const auto& l : rb.labels) it->labels.push_back(l);
  }
  return out;
}

Eigen::VectorXd lambda_singular_values(const Eigen::MatrixXd& lambda) {
  if (lambda.size() == 0) return {};
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(lambda);
  return svd.singularValues();
}

bool factor_is_singular(const Eigen::VectorXd& sv, double tol) {
  return numeric_rank(sv, tol) < sv.size();
}

int numeric_rank(const Eigen::VectorXd& sv, double tol) {
  if (sv.size() == 0) return 0;
  const double threshold = tol * std::max(1.0, sv.maxCoeff());
  return static_cast<int>((sv.array() >= threshold).count());
}

FitResult optimize(std::shared_ptr<const ModelMatrices> matrices, const FitOptions& options) {
  DevianceEvaluator ev(matrices);
  const ThetaLayout& layout = ev.layout();
  const auto nt = static_cast<Eigen::Index>(layout.size);

  Eigen::VectorXd start = options.start ? *options.start : layout.default_start();
  if (start.size() != nt) throw FitError("start vector has the wrong length");
  if (!layout.within_bounds(std::span<const double>(start.data(), layout.size))) {
    throw FitError("start vector violates the lower bounds");
  }
  std::vector<bool> fixed = options.fixed;
  if (fixed.empty()) fixed.assign(layout.size, false);
  if (fixed.size() != layout.size) throw FitError("fixed mask has the wrong length");

  std::vector<Eigen::Index> free;
  for (Eigen::Index i = 0; i < nt; ++i) {
    if (!fixed[static_cast<std::size_t>(i)]) free.push_back(i);
  }
  const Eigen::VectorXd lb_full = layout.lower_bounds();
  const auto nf = static_cast<Eigen::Index>(free.size());
  Eigen::VectorXd x0(nf), lower(nf), upper(nf);
  for (Eigen::Index j = 0; j < nf; ++j) {
    x0[j] = start[free[static_cast<std::size_t>(j)]];
    lower[j] = lb_full[free[static_cast<std::size_t>(j)]];
    upper[j] = std::numeric_limits<double>::infinity();
  }

  Eigen::VectorXd work = start;
  std::string last_error;
  auto objective = [&](const Eigen::VectorXd& x) {
    for (Eigen::Index j = 0; j < nf; ++j) work[free[static_cast<std::size_t>(j)]] = x[j];
    try {
      return ev.deviance(std::span<const double>(work.data(), layout.size), options.criterion);
    } catch (const FitError& e) {
      last_error = e.what();
      return std::numeric_limits<double>::infinity();
    }
  };

  const std::size_t budget = options.budget > 0 ? options.budget : default_budget(static_cast<std::size_t>(nf));
  auto minimise = [&](const Eigen::VectorXd& from, std::size_t max_evals) {
    if (options.method == OptimizerMethod::QuasiNewton) {
      QuasiNewtonOptions qn = options.qn_tuning;
      qn.max_evals = max_evals;
      return quasi_newton_bounded(objective, from, lower, upper, qn);
    }
    NelderMeadOptions nm = options.tuning;
    nm.max_evals = max_evals;
    return nelder_mead_bounded(objective, from, lower, upper, nm);
  };
  NelderMeadResult res = minimise(x0, budget);
  std::size_t used = res.evals;

  // Boundary polish: entries within kSnapWidth of a finite lower bound move
  // onto it when that does not raise the deviance; all entries within that
  // width are then probed outward and an improving probe restarts the
  // optimizer.
  constexpr double kSnapWidth = 1e-2;
  constexpr double kProbes[] = {1e-2, 1e-1, 0.5, 1.0};
  constexpr int kPolishRounds = 3;
  for (int round = 0; round < kPolishRounds && std::isfinite(res.f); ++round) {
    for (Eigen::Index j = 0; j < nf && used < budget; ++j) {
      if (!std::isfinite(lower[j]) || res.x[j] == lower[j] || res.x[j] - lower[j] > kSnapWidth) continue;
      Eigen::VectorXd t = res.x;
      t[j] = lower[j];
      const double ft = objective(t);
      ++used;
      if (ft <= res.f) {
        res.x = t;
        res.f = ft;
      }
    }
    Eigen::VectorXd best_x = res.x;
    double best_f = res.f;
    const double margin = 1e-10 * (1.0 + std::abs(res.f));
    for (Eigen::Index j = 0; j < nf; ++j) {
      if (!std::isfinite(lower[j]) || res.x[j] - lower[j] > kSnapWidth) continue;
      for (double step : kProbes) {
        if (used >= budget) break;
        Eigen::VectorXd t = res.x;
        t[j] = lower[j] + step;
        const double ft = objective(t);
        ++used;
        if (ft < best_f - margin) {
          best_x = t;
          best_f = ft;
        }
      }
    }
    if (best_f >= res.f - margin || used >= budget) break;
    NelderMeadResult next = minimise(best_x, budget - used);
    used += next.evals;
    if (next.f > best_f) {
      next.x = best_x;
      next.f = best_f;
    }
    res = std::move(next);
  }
  res.evals = used;
  if (!std::isfinite(res.f)) {
    throw FitError("deviance could not be evaluated: " + (last_error.empty() ? "non-finite" : last_error));
  }

  FitResult fit;
  fit.matrices = std::move(matrices);
  fit.layout = layout;
  fit.theta = start;
  for (Eigen::Index j = 0; j < nf; ++j) fit.theta[free[static_cast<std::size_t>(j)]] = res.x[j];
  fit.fixed_theta = fixed;
  fit.criterion = options.criterion;
  fit.n_evals = res.evals;
  fit.budget = budget;
  fit.method = options.method;
  fit.converged = res.converged;
  fit.singular_tol = options.singular_tol;

  const PlsSolution sol = ev.solve(std::span<const double>(fit.theta.data(), layout.size), options.criterion);
  fit.beta = sol.beta;
  fit.beta_unscaled_cov = sol.beta_unscaled_cov;
  fit.sigma = sol.sigma;
  fit.deviance = sol.deviance;
  fit.loglik = -0.5 * sol.deviance;

  const auto diag = layout.diagonal_mask();
  fit.boundary_flags.assign(layout.size, false);
  for (std::size_t i = 0; i < layout.size; ++i) {
    fit.boundary_flags[i] = diag[i] && fit.theta[static_cast<Eigen::Index>(i)] < options.boundary_tol;
  }
  for (const auto& f : fit.factor_lambdas()) {
    if (factor_is_singular(lambda_singular_values(f.lambda), options.singular_tol)) fit.singular = true;
  }
  return fit;
}

FitResult fit_model(const FormulaAST& formula, const Dataset& data, const ContrastScheme& contrasts,
                    const FitOptions& options) {
  auto mm = std::make_shared<const ModelMatrices>(build_model_matrices(formula, data, contrasts));
  return optimize(std::move(mm), options);
}

Eigen::VectorXd warm_start(const FitResult& previous, const ModelMatrices& next) {
  const ThetaLayout layout = ThetaLayout::from_dims(block_dims(next));
  Eigen::VectorXd start = layout.default_start();

  // Relative covariance of every previous component, keyed by group.
  struct Known {
    std::vector<std::string> labels;
    Eigen::MatrixXd cov;
  };
  std::map<std::string, Known> known;
  for (const auto& f : previous.factor_lambdas()) {
    known[f.group] = Known{f.labels, f.lambda * f.lambda.transpose()};
  }
  const auto old_blocks = previous.block_lambdas();

  for (std::size_t b = 0; b < next.blocks.size(); ++b) {
    const RandomBlock& nb = next.blocks[b];
    // Identical block: copy theta verbatim.
    bool copied = false;
    for (std::size_t ob = 0; ob < previous.matrices->blocks.size(); ++ob) {
      const RandomBlock& pb = previous.matrices->blocks[ob];
      if (pb.group == nb.group && pb.labels == nb.labels) {
        start.segment(static_cast<Eigen::Index>(layout.offsets[b]), static_cast<Eigen::Index>(nb.n_theta())) =
            lambda_to_theta(old_blocks[ob]);
        copied = true;
        break;
      }
    }
    if (copied) continue;
    auto it = known.find(nb.group);
    Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(nb.d, nb.d);
    if (it != known.end()) {
      std::vector<Eigen::Index> pos(static_cast<std::size_t>(nb.d), -1);
      for (int j = 0; j < nb.d; ++j) {
        auto f = std::find(it->second.labels.begin(), it->second.labels.end(), nb.labels[static_cast<std::size_t>(j)]);
        if (f != it->second.labels.end()) pos[static_cast<std::size_t>(j)] = f - it->second.labels.begin();
      }
      for (int i = 0; i < nb.d; ++i) {
        for (int j = 0; j < nb.d; ++j) {
          const auto pi = pos[static_cast<std::size_t>(i)];
          const auto pj = pos[static_cast<std::size_t>(j)];
          if (pi >= 0 && pj >= 0) cov(i, j) = it->second.cov(pi, pj);
        }
      }
    }
    cov.diagonal().array() += 1e-8;
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    Eigen::MatrixXd lambda = llt.info() == Eigen::Success
                                 ? Eigen::MatrixXd(llt.matrixL())
                                 : Eigen::MatrixXd(cov.diagonal().cwiseSqrt().asDiagonal());
    start.segment(static_cast<Eigen::Index>(layout.offsets[b]), static_cast<Eigen::Index>(nb.n_theta())) =
        lambda_to_theta(lambda);
  }
  return start;
}

FitResult refit(const FitResult& previous, const FormulaAST& formula, const Dataset& data, FitOptions options) {
  auto mm = std::make_shared<const ModelMatrices>(build_model_matrices(formula, data, previous.matrices->contrasts));
  if (!options.start) options.start = warm_start(previous, *mm);
  return optimize(std::move(mm), options);
}

}  // namespace parsimix
