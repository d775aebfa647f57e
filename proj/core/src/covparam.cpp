#include "parsimix/covparam.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace parsimix {

ThetaLayout ThetaLayout::from_dims(std::vector<int> dims) {
  ThetaLayout layout;
  layout.dims = std::move(dims);
  for (int d : layout.dims) {
    if (d < 1) throw std::invalid_argument("random-effects block dimension must be >= 1");
    layout.offsets.push_back(layout.size);
    layout.size += count_params(d);
  }
  return layout;
}

std::vector<bool> ThetaLayout::diagonal_mask() const {
  std::vector<bool> mask(size, false);
  for (std::size_t b = 0; b < dims.size(); ++b) {
    std::size_t pos = offsets[b];
    for (int col = 0; col < dims[b]; ++col) {
      mask[pos] = true;  // first entry of each column is the diagonal
      pos += static_cast<std::size_t>(dims[b] - col);
    }
  }
  return mask;
}

Eigen::VectorXd ThetaLayout::lower_bounds() const {
  const auto mask = diagonal_mask();
  Eigen::VectorXd lb(static_cast<Eigen::Index>(size));
  for (std::size_t i = 0; i < size; ++i) {
    lb[static_cast<Eigen::Index>(i)] = mask[i] ? 0.0 : -std::numeric_limits<double>::infinity();
  }
  return lb;
}

Eigen::VectorXd ThetaLayout::default_start() const {
  const auto mask = diagonal_mask();
  Eigen::VectorXd x(static_cast<Eigen::Index>(size));
  for (std::size_t i = 0; i < size; ++i) x[static_cast<Eigen::Index>(i)] = mask[i] ? 1.0 : 0.0;
  return x;
}

bool ThetaLayout::within_bounds(std::span<const double> theta) const {
  if (theta.size() != size) return false;
  const auto mask = diagonal_mask();
  for (std::size_t i = 0; i < size; ++i) {
    if (std::isnan(theta[i]) || (mask[i] && theta[i] < 0.0)) return false;
  }
  return true;
}

Eigen::MatrixXd theta_to_lambda(std::span<const double> theta, int d) {
  if (d < 1 || theta.size() != count_params(d)) {
    throw std::invalid_argument("theta has length " + std::to_string(theta.size()) +
                                " but a " + std::to_string(d) + "-dimensional term needs " +
                                std::to_string(d < 1 ? 0 : count_params(d)));
  }
  Eigen::MatrixXd lambda = Eigen::MatrixXd::Zero(d, d);
  std::size_t pos = 0;
  for (int col = 0; col < d; ++col) {
    for (int row = col; row < d; ++row) lambda(row, col) = theta[pos++];
  }
  return lambda;
}

Eigen::VectorXd lambda_to_theta(const Eigen::MatrixXd& lambda) {
  const auto d = lambda.rows();
  if (lambda.cols() != d) throw std::invalid_argument("lambda must be square");
  Eigen::VectorXd theta(d * (d + 1) / 2);
  Eigen::Index pos = 0;
  for (Eigen::Index col = 0; col < d; ++col) {
    for (Eigen::Index row = col; row < d; ++row) theta[pos++] = lambda(row, col);
  }
  return theta;
}

Eigen::MatrixXd lambda_to_cov(const Eigen::MatrixXd& lambda, double sigma) {
  const auto d = lambda.rows();
  const double s2 = sigma * sigma;
  Eigen::MatrixXd cov(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double v = s2 * lambda.row(i).dot(lambda.row(j));
      cov(i, j) = v;
      cov(j, i) = v;
    }
  }
  return cov;
}

CovarianceSummary cov_to_sd_cor(const Eigen::MatrixXd& cov, double tol) {
  const auto d = cov.rows();
  if (cov.cols() != d) throw std::invalid_argument("covariance matrix must be square");
  const double scale = cov.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      if (std::abs(cov(i, j) - cov(j, i)) > 1e-12 * std::max(scale, 1e-300)) {
        throw std::invalid_argument("covariance matrix is not symmetric");
      }
    }
  }
  CovarianceSummary out;
  out.sd.resize(d);
  for (Eigen::Index i = 0; i < d; ++i) out.sd[i] = std::sqrt(std::max(cov(i, i), 0.0));
  out.cor.assign(static_cast<std::size_t>(d), std::vector<std::optional<double>>(static_cast<std::size_t>(d)));
  bool zero_sd = false;
  for (Eigen::Index i = 0; i < d; ++i) {
    if (out.sd[i] == 0.0) zero_sd = true;
    for (Eigen::Index j = 0; j < d; ++j) {
      auto& cell = out.cor[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      if (out.sd[i] == 0.0 || out.sd[j] == 0.0) continue;
      if (i == j) {
        cell = 1.0;
      } else {
        cell = std::clamp(cov(i, j) / (out.sd[i] * out.sd[j]), -1.0, 1.0);
      }
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov, Eigen::EigenvaluesOnly);
  const double max_ev = es.eigenvalues().maxCoeff();
  const double min_ev = es.eigenvalues().minCoeff();
  out.singular = zero_sd || min_ev < tol * tol * std::max(1.0, max_ev);
  return out;
}

std::size_t count_params(int d) {
  if (d < 1) throw std::invalid_argument("dimension must be >= 1");
  const auto dd = static_cast<std::size_t>(d);
  return dd * (dd + 1) / 2;
}

std::size_t max_params_for_design(std::span<const int> level_products) {
  std::size_t total = 0;
  for (int m : level_products) {
    if (m < 1) throw std::invalid_argument("level product must be >= 1");
    total += count_params(m);
  }
  return total;
}

Eigen::MatrixXd pivoted_cholesky(const Eigen::MatrixXd& a, double tol) {
  const auto d = a.rows();
  if (a.cols() != d) throw std::invalid_argument("matrix must be square");
  if (!a.isApprox(a.transpose(), 1e-12)) throw std::invalid_argument("matrix is not symmetric");
  Eigen::MatrixXd work = a;
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(d, d);
  std::vector<bool> used(static_cast<std::size_t>(d), false);
  const double scale = std::max(a.diagonal().cwiseAbs().maxCoeff(), 1e-300);
  for (Eigen::Index step = 0; step < d; ++step) {
    Eigen::Index piv = -1;
    double best = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < d; ++i) {
      if (!used[static_cast<std::size_t>(i)] && work(i, i) > best) {
        best = work(i, i);
        piv = i;
      }
    }
    if (best < -tol * scale * 1e4) throw std::invalid_argument("matrix is not positive semidefinite");
    if (best <= tol * scale) break;  // remaining Schur complement is zero
    used[static_cast<std::size_t>(piv)] = true;
    const double root = std::sqrt(best);
    for (Eigen::Index i = 0; i < d; ++i) {
      if (!used[static_cast<std::size_t>(i)] || i == piv) f(i, step) = work(i, piv) / root;
    }
    f(piv, step) = root;
    for (Eigen::Index i = 0; i < d; ++i) {
      if (used[static_cast<std::size_t>(i)]) continue;
      for (Eigen::Index j = 0; j < d; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        work(i, j) -= f(i, step) * f(j, step);
      }
    }
  }
  // Remaining diagonal must be numerically zero; off-diagonals too.
  for (Eigen::Index i = 0; i < d; ++i) {
    if (used[static_cast<std::size_t>(i)]) continue;
    for (Eigen::Index j = 0; j < d; ++j) {
      if (!used[static_cast<std::size_t>(j)] && std::abs(work(i, j)) > 1e-8 * scale) {
        throw std::invalid_argument("matrix is not positive semidefinite");
      }
    }
  }
  return f;
}

}  // namespace parsimix
