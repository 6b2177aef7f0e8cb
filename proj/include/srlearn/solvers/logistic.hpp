#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <optional>

#include "srlearn/data.hpp"
#include "srlearn/error.hpp"

namespace srlearn {

struct LogisticModel {
  double intercept = 0.0;
  Vector slopes;
  bool converged = false;
  int iterations = 0;
  double log_likelihood = 0.0;

  double predict_proba(const Eigen::Ref<const Vector>& x) const {
    return 1.0 / (1.0 + std::exp(-(intercept + slopes.dot(x))));
  }
};

struct LogisticOptions {
  int max_iter = 100;
  double grad_tol = 1e-8;
  double hessian_ridge = 1e-6;
  double coef_cap = 30.0;
};

namespace detail {

inline double log1pexp(double t) { return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

// Bernoulli log-likelihood sum_i w_i [y_i eta_i - log(1 + e^eta_i)].
inline double logistic_loglik(const Vector& eta, const Vector& y, const Vector* w) {
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    const double wi = w ? (*w)(i) : 1.0;
    ll += wi * (y(i) * eta(i) - log1pexp(eta(i)));
  }
  return ll;
}

}  // namespace detail

/*
 * IRLS / Newton maximization of the (optionally case-weighted) Bernoulli
 * likelihood. Labels are 0/1. A ridge of `hessian_ridge` is added to the
 * Hessian only for numerical stability; it does not penalize the likelihood.
 * Coefficients are capped at |coef| <= coef_cap: under complete separation
 * the cap binds and the fit returns with converged = false.
 *
 * `start` (intercept first) warm-starts Newton, used by stepwise screening.
 */
inline LogisticModel logistic_fit(const Matrix& X, const Vector& labels, const LogisticOptions& opt = {},
                                  const Vector* weights = nullptr, const Vector* start = nullptr) {
  const Eigen::Index n = X.rows(), p = X.cols();
  if (labels.size() != n) throw DomainError("logistic_fit: label length mismatch");
  if (n == 0) throw DomainError("logistic_fit: no observations");
  bool has0 = false, has1 = false;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (labels(i) == 0.0) has0 = true;
    else if (labels(i) == 1.0) has1 = true;
    else throw DomainError("logistic_fit: labels must be 0 or 1");
  }
  if (!(has0 && has1)) throw DomainError("logistic_fit: both classes must be present");

  Matrix Z(n, p + 1);
  Z.col(0).setOnes();
  Z.rightCols(p) = X;
  Vector beta = Vector::Zero(p + 1);
  if (start) {
    if (start->size() != p + 1) throw DomainError("logistic_fit: warm start has wrong length");
    beta = *start;
  }

  LogisticModel m;
  Vector eta = Z * beta;
  double ll = detail::logistic_loglik(eta, labels, weights);
  bool capped = false;
  for (int it = 0; it < opt.max_iter; ++it) {
    Vector mu(n), wdiag(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      mu(i) = 1.0 / (1.0 + std::exp(-eta(i)));
      const double wi = weights ? (*weights)(i) : 1.0;
      wdiag(i) = wi * mu(i) * (1.0 - mu(i));
      mu(i) = wi * (labels(i) - mu(i));
    }
    const Vector grad = Z.transpose() * mu;
    m.iterations = it;
    if (grad.norm() < opt.grad_tol) {
      m.converged = !capped;
      break;
    }
    Matrix H = Z.transpose() * wdiag.asDiagonal() * Z;
    H.diagonal().array() += opt.hessian_ridge;
    const Vector step = H.ldlt().solve(grad);
    // Step halving keeps the likelihood monotone.
    double t = 1.0;
    Vector next;
    double next_ll = ll;
    for (int h = 0; h < 30; ++h, t *= 0.5) {
      next = (beta + t * step).cwiseMax(-opt.coef_cap).cwiseMin(opt.coef_cap);
      next_ll = detail::logistic_loglik(Z * next, labels, weights);
      if (next_ll >= ll - 1e-12 * std::abs(ll)) break;
    }
    capped = (next.array().abs() >= opt.coef_cap).any();
    const bool stalled = next_ll - ll <= 1e-14 * (1.0 + std::abs(ll)) && (next - beta).norm() < 1e-12;
    beta = next;
    ll = next_ll;
    eta = Z * beta;
    m.iterations = it + 1;
    if (capped && stalled) break;
    if (stalled) {
      // Gradient can no longer shrink at working precision.
      m.converged = false;
      break;
    }
  }
  if (!m.converged && !capped) {
    // Final gradient check after the last update.
    Vector r(n);
    for (Eigen::Index i = 0; i < n; ++i)
      r(i) = (weights ? (*weights)(i) : 1.0) * (labels(i) - 1.0 / (1.0 + std::exp(-eta(i))));
    m.converged = (Z.transpose() * r).norm() < opt.grad_tol * 100;
  }
  // Near-zero deviance means (quasi-)complete separation: the MLE is at
  // infinity, so report the direction scaled to the cap.
  if (!capped && -ll < 1e-6 * static_cast<double>(n)) {
    const double top = beta.cwiseAbs().maxCoeff();
    if (top > 0) beta *= opt.coef_cap / top;
    ll = detail::logistic_loglik(Z * beta, labels, weights);
    m.converged = false;
  }
  m.intercept = beta(0);
  m.slopes = beta.tail(p);
  m.log_likelihood = ll;
  return m;
}

}  // namespace srlearn
