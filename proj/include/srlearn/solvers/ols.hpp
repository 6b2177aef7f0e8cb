#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "srlearn/data.hpp"
#include "srlearn/error.hpp"
#include "srlearn/kernels.hpp"

namespace srlearn {

struct LinearModel {
  double intercept = 0.0;
  Vector slopes;

  double value_at(const Eigen::Ref<const Vector>& x) const { return intercept + slopes.dot(x); }
  Vector predict(const Matrix& X) const {
    return (X * slopes).array() + intercept;
  }
};

/// Least squares with an intercept column; ridge jitter 1e-8 on the normal
/// equations keeps rank-deficient designs solvable.
inline LinearModel ols_fit(const Matrix& X, const Vector& y) {
  if (X.rows() != y.size()) throw DomainError("ols_fit: row count mismatch");
  if (X.rows() == 0) throw DomainError("ols_fit: no observations");
  if (!X.allFinite() || !y.allFinite()) throw DomainError("ols_fit: non-finite input");
  const Eigen::Index p = X.cols();
  // Centering makes the intercept exact and conditions the slope system.
  const Eigen::RowVectorXd xbar = X.colwise().mean();
  const double ybar = y.mean();
  const Matrix Xc = X.rowwise() - xbar;
  const Vector yc = y.array() - ybar;
  LinearModel m;
  m.slopes = Vector::Zero(p);
  if (p > 0) {
    Matrix XtX = Xc.transpose() * Xc;
    XtX.diagonal().array() += 1e-8;
    const auto ldlt = XtX.ldlt();
    const Vector rhs = Xc.transpose() * yc;
    m.slopes = ldlt.solve(rhs);
    // Iterative refinement strips the jitter bias on full-rank designs.
    for (int r = 0; r < 3; ++r) m.slopes += ldlt.solve(rhs - Xc.transpose() * (Xc * m.slopes));
  }
  m.intercept = ybar - xbar.dot(m.slopes);
  return m;
}

/*
 * Kernel ridge regression m(x) = b + sum_i c_i K(x_i, x), fitted on centered
 * outcomes with ridge `ridge` times n on the Gram diagonal.
 */
struct KernelRidgeModel {
  KernelSpec kernel;
  Matrix centers;
  Vector coef;
  double intercept = 0.0;

  Vector predict(const Matrix& X) const {
    return (gram_matrix(kernel, X, centers) * coef).array() + intercept;
  }
};

inline KernelRidgeModel kernel_ridge_fit(const Matrix& X, const Vector& y, const KernelSpec& kernel,
                                         double ridge = 1e-3) {
  if (X.rows() != y.size() || X.rows() == 0) throw DomainError("kernel_ridge_fit: bad dimensions");
  KernelRidgeModel m{kernel, X, Vector(), y.mean()};
  Matrix G = gram_matrix(kernel, X);
  G.diagonal().array() += ridge * static_cast<double>(X.rows());
  m.coef = G.ldlt().solve((y.array() - m.intercept).matrix());
  return m;
}

}  // namespace srlearn
