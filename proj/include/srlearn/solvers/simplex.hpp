#pragma once

#include <Eigen/Core>
#include <Eigen/LU>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "srlearn/data.hpp"
#include "srlearn/error.hpp"

namespace srlearn {

enum class RowSense { LessEqual, Equal, GreaterEqual };
enum class VarBound { NonNegative, Free };

/// min (or max) c'x  s.t.  G_i x (<=|=|>=) h_i,  x_j >= 0 or free.
struct LinearProgram {
  Vector c;
  Matrix G;
  Vector h;
  std::vector<RowSense> sense;
  std::vector<VarBound> bounds;
  bool maximize = false;

  int num_vars() const { return static_cast<int>(c.size()); }
  int num_rows() const { return static_cast<int>(h.size()); }

  void validate() const {
    if (G.rows() != h.size() || G.cols() != c.size() ||
        static_cast<Eigen::Index>(sense.size()) != h.size() ||
        static_cast<Eigen::Index>(bounds.size()) != c.size())
      throw DomainError("LinearProgram: inconsistent dimensions");
    if (!G.allFinite() || !h.allFinite() || !c.allFinite())
      throw DomainError("LinearProgram: non-finite data");
  }
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

inline std::string to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
  }
  return "?";
}

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  Vector x;
  double objective = 0.0;
  long iterations = 0;
};

namespace detail {

// Dense revised simplex on  min c'x, Ax = b, x >= 0, b >= 0, started from a
// given feasible basis. Columns flagged `blocked` never enter.
class RevisedSimplex {
 public:
  RevisedSimplex(const Matrix& A, const Vector& b, std::vector<int> basis)
      : A_(A), b_(b), basis_(std::move(basis)), m_(A.rows()), n_(A.cols()) {
    in_basis_.assign(static_cast<std::size_t>(n_), -1);
    for (Eigen::Index r = 0; r < m_; ++r) in_basis_[basis_[r]] = static_cast<int>(r);
    refactor();
  }

  // Returns false when unbounded.
  bool optimize(const Vector& cost, const std::vector<bool>& blocked, long& iterations, long max_iter) {
    for (;;) {
      if (iterations >= max_iter)
        throw NonConvergence("simplex_solve: iteration cap reached", 0.0);
      if (++since_refactor_ >= kRefactorEvery) refactor();
      Vector cb(m_);
      for (Eigen::Index r = 0; r < m_; ++r) cb(r) = cost(basis_[r]);
      const Eigen::RowVectorXd y = cb.transpose() * Binv_;
      // Bland: lowest-index improving column enters.
      Eigen::Index q = -1;
      for (Eigen::Index j = 0; j < n_; ++j) {
        if (in_basis_[j] >= 0 || blocked[j]) continue;
        const double d = cost(j) - y.dot(A_.col(j));
        if (d < -kCostTol * (1.0 + std::abs(cost(j)))) {
          q = j;
          break;
        }
      }
      if (q < 0) return true;
      const Vector u = Binv_ * A_.col(q);
      // Bland: among tied ratios, the basic variable with lowest index leaves.
      Eigen::Index r_out = -1;
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index r = 0; r < m_; ++r) {
        if (u(r) <= kPivotTol) continue;
        const double ratio = std::max(xb_(r), 0.0) / u(r);
        const bool tie = r_out >= 0 && std::abs(ratio - best) <= 1e-12 * (1.0 + best);
        if (r_out < 0 || (ratio < best && !tie) || (tie && basis_[r] < basis_[r_out])) {
          best = ratio;
          r_out = r;
        }
      }
      if (r_out < 0) return false;
      pivot(r_out, q, u);
      ++iterations;
    }
  }

  // Pivots zero-level basic columns listed in `drive_out` out of the basis
  // where possible (rows that are linear combinations of others keep them).
  void drive_out(const std::vector<bool>& drive, const std::vector<bool>& allowed) {
    for (Eigen::Index r = 0; r < m_; ++r) {
      if (!drive[basis_[r]]) continue;
      const Eigen::RowVectorXd row = Binv_.row(r) * A_;
      for (Eigen::Index j = 0; j < n_; ++j) {
        if (in_basis_[j] >= 0 || !allowed[j]) continue;
        if (std::abs(row(j)) > 1e-7) {
          pivot(r, j, Binv_ * A_.col(j));
          break;
        }
      }
    }
  }

  Vector solution() const {
    Vector x = Vector::Zero(n_);
    for (Eigen::Index r = 0; r < m_; ++r) x(basis_[r]) = std::max(xb_(r), 0.0);
    return x;
  }

 private:
  static constexpr double kPivotTol = 1e-9;
  static constexpr double kCostTol = 1e-9;
  static constexpr int kRefactorEvery = 64;

  void refactor() {
    Matrix B(m_, m_);
    for (Eigen::Index r = 0; r < m_; ++r) B.col(r) = A_.col(basis_[r]);
    Binv_ = B.partialPivLu().inverse();
    xb_ = Binv_ * b_;
    since_refactor_ = 0;
  }

  void pivot(Eigen::Index r, Eigen::Index q, const Vector& u) {
    const double piv = u(r);
    Binv_.row(r) /= piv;
    xb_(r) /= piv;
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (i == r || u(i) == 0.0) continue;
      Binv_.row(i) -= u(i) * Binv_.row(r);
      xb_(i) -= u(i) * xb_(r);
    }
    in_basis_[basis_[r]] = -1;
    basis_[r] = static_cast<int>(q);
    in_basis_[q] = static_cast<int>(r);
  }

  const Matrix& A_;
  const Vector& b_;
  std::vector<int> basis_;
  std::vector<int> in_basis_;
  Eigen::Index m_, n_;
  Matrix Binv_;
  Vector xb_;
  int since_refactor_ = 0;
};

}  // namespace detail

/*
 * Two-phase dense revised simplex with Bland's rule. Free variables are split
 * into positive and negative parts; rows are sign-normalized so the right-hand
 * side is nonnegative; <= rows start with their slack in the basis, = and >=
 * rows with a crashed unit column when one exists and an artificial otherwise.
 * Phase 1 minimizes the artificial sum.
 */
inline LpResult simplex_solve(const LinearProgram& lp) {
  lp.validate();
  const int nv = lp.num_vars(), nr = lp.num_rows();

  // Column layout: [original (+ parts) | negative parts of free vars | slack/surplus | artificial]
  std::vector<int> neg_col(static_cast<std::size_t>(nv), -1);
  int ncols = nv;
  for (int j = 0; j < nv; ++j)
    if (lp.bounds[j] == VarBound::Free) neg_col[j] = ncols++;
  std::vector<int> slack_col(static_cast<std::size_t>(nr), -1), art_col(static_cast<std::size_t>(nr), -1);
  std::vector<RowSense> sense = lp.sense;
  Vector b = lp.h;
  std::vector<double> flip(static_cast<std::size_t>(nr), 1.0);
  for (int i = 0; i < nr; ++i) {
    if (b(i) < 0) {
      flip[i] = -1.0;
      b(i) = -b(i);
      if (sense[i] == RowSense::LessEqual) sense[i] = RowSense::GreaterEqual;
      else if (sense[i] == RowSense::GreaterEqual) sense[i] = RowSense::LessEqual;
    }
    if (sense[i] != RowSense::Equal) slack_col[i] = ncols++;
  }
  // Crash: a nonnegative structural column that is a positive multiple of a
  // unit vector can start basic in its row, saving that row's artificial.
  std::vector<int> crash(static_cast<std::size_t>(nr), -1);
  {
    std::vector<bool> used(static_cast<std::size_t>(nv), false);
    for (int j = 0; j < nv; ++j) {
      if (lp.bounds[j] != VarBound::NonNegative) continue;
      int row = -1, nnz = 0;
      for (int i = 0; i < nr; ++i)
        if (lp.G(i, j) != 0.0) {
          row = i;
          ++nnz;
        }
      if (nnz != 1 || sense[row] == RowSense::LessEqual || crash[row] >= 0 || used[j]) continue;
      if (flip[row] * lp.G(row, j) > 0.0) {
        crash[row] = j;
        used[j] = true;
      }
    }
  }
  const int first_art = ncols;
  for (int i = 0; i < nr; ++i)
    if (sense[i] != RowSense::LessEqual && crash[i] < 0) art_col[i] = ncols++;

  Matrix A = Matrix::Zero(nr, ncols);
  for (int i = 0; i < nr; ++i) {
    for (int j = 0; j < nv; ++j) {
      A(i, j) = flip[i] * lp.G(i, j);
      if (neg_col[j] >= 0) A(i, neg_col[j]) = -flip[i] * lp.G(i, j);
    }
    if (slack_col[i] >= 0) A(i, slack_col[i]) = sense[i] == RowSense::LessEqual ? 1.0 : -1.0;
    if (art_col[i] >= 0) A(i, art_col[i]) = 1.0;
  }
  std::vector<int> basis(static_cast<std::size_t>(nr));
  for (int i = 0; i < nr; ++i)
    basis[i] = sense[i] == RowSense::LessEqual ? slack_col[i] : crash[i] >= 0 ? crash[i] : art_col[i];

  const double sign = lp.maximize ? -1.0 : 1.0;
  Vector cost = Vector::Zero(ncols);
  for (int j = 0; j < nv; ++j) {
    cost(j) = sign * lp.c(j);
    if (neg_col[j] >= 0) cost(neg_col[j]) = -sign * lp.c(j);
  }

  LpResult res;
  const long max_iter = 200L * (nr + ncols) + 10000;
  std::vector<bool> is_art(static_cast<std::size_t>(ncols), false);
  for (int j = first_art; j < ncols; ++j) is_art[j] = true;

  if (nr == 0) {
    // No rows: optimal at 0 unless some improving direction is unbounded.
    for (int j = 0; j < ncols; ++j)
      if (cost(j) < 0) {
        res.status = LpStatus::Unbounded;
        return res;
      }
    res.status = LpStatus::Optimal;
    res.x = Vector::Zero(nv);
    return res;
  }

  detail::RevisedSimplex rs(A, b, basis);
  if (first_art < ncols) {
    Vector phase1 = Vector::Zero(ncols);
    for (int j = first_art; j < ncols; ++j) phase1(j) = 1.0;
    rs.optimize(phase1, std::vector<bool>(static_cast<std::size_t>(ncols), false), res.iterations, max_iter);
    const Vector x1 = rs.solution();
    double infeas = 0.0;
    for (int j = first_art; j < ncols; ++j) infeas += x1(j);
    if (infeas > 1e-7 * (1.0 + b.lpNorm<Eigen::Infinity>())) {
      res.status = LpStatus::Infeasible;
      return res;
    }
    std::vector<bool> allowed(static_cast<std::size_t>(ncols));
    for (int j = 0; j < ncols; ++j) allowed[j] = !is_art[j];
    rs.drive_out(is_art, allowed);
  }
  if (!rs.optimize(cost, is_art, res.iterations, max_iter)) {
    res.status = LpStatus::Unbounded;
    return res;
  }
  const Vector xs = rs.solution();
  res.status = LpStatus::Optimal;
  res.x.resize(nv);
  for (int j = 0; j < nv; ++j) res.x(j) = xs(j) - (neg_col[j] >= 0 ? xs(neg_col[j]) : 0.0);
  res.objective = lp.c.dot(res.x);
  return res;
}

}  // namespace srlearn
