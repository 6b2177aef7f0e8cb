#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>

#include "srlearn/data.hpp"
#include "srlearn/error.hpp"

namespace srlearn {

/// Solution of  max sum(alpha) - 1/2 sum_ij alpha_i alpha_j a_i a_j K_ij
///              s.t. 0 <= alpha_i <= C_i,  sum_i alpha_i a_i = 0.
/// The decision function is f(x) = sum_i alpha_i a_i K(x_i, x) + intercept.
struct DualSolution {
  Vector alphas;
  double intercept = 0.0;
  double objective = 0.0;
  double kkt_violation = 0.0;
  long iterations = 0;
};

class DualNonConvergence : public NonConvergence {
 public:
  DualNonConvergence(DualSolution best)
      : NonConvergence("wsvm_dual_solve: iteration cap reached, KKT violation " +
                           format_double(best.kkt_violation),
                       best.kkt_violation),
        best_(std::move(best)) {}
  const DualSolution& best() const noexcept { return best_; }

 private:
  DualSolution best_;
};

struct DualOptions {
  double tol = 1e-5;
  long max_iter = 1'000'000;
};

/*
 * SMO pairwise coordinate ascent. Each iteration picks the maximal
 * KKT-violating pair
 *     i = argmax_{t in I_up}  -a_t G_t,   j = argmin_{t in I_low} -a_t G_t
 * where G = Q alpha - 1 is the gradient of the minimization form, and moves
 * along the equality-preserving direction (alpha_i += a_i t, alpha_j -= a_j t)
 * to the clipped 1-D optimum. Terminates when the pair gap drops below tol.
 *
 * The intercept is the mean of -a_t G_t over free multipliers, or the midpoint
 * of the feasible interval when every multiplier sits at a bound.
 */
inline DualSolution wsvm_dual_solve(const Matrix& K, const Vector& a, const Vector& C,
                                    const DualOptions& opt = {}) {
  const Eigen::Index m = K.rows();
  if (K.cols() != m || a.size() != m || C.size() != m)
    throw DomainError("wsvm_dual_solve: dimension mismatch");
  if (m == 0) throw DomainError("wsvm_dual_solve: empty problem");
  for (Eigen::Index t = 0; t < m; ++t) {
    if (a(t) != 1.0 && a(t) != -1.0) throw DomainError("wsvm_dual_solve: labels must be +-1");
    if (!(C(t) > 0.0) || !std::isfinite(C(t))) throw DomainError("wsvm_dual_solve: caps must be finite and > 0");
  }
  constexpr double kTau = 1e-12;
  constexpr double kInf = std::numeric_limits<double>::infinity();

  Vector alpha = Vector::Zero(m);
  Vector G = Vector::Constant(m, -1.0);
  auto in_up = [&](Eigen::Index t) { return a(t) > 0 ? alpha(t) < C(t) : alpha(t) > 0.0; };
  auto in_low = [&](Eigen::Index t) { return a(t) > 0 ? alpha(t) > 0.0 : alpha(t) < C(t); };

  DualSolution sol;
  double gap = kInf;
  long it = 0;
  for (;; ++it) {
    double gmax = -kInf, gmin = kInf;
    Eigen::Index i = -1, j = -1;
    for (Eigen::Index t = 0; t < m; ++t) {
      const double v = -a(t) * G(t);
      if (in_up(t) && v > gmax) { gmax = v; i = t; }
      if (in_low(t) && v < gmin) { gmin = v; j = t; }
    }
    gap = (i < 0 || j < 0) ? 0.0 : gmax - gmin;
    if (gap < opt.tol || it >= opt.max_iter) break;

    double eta = K(i, i) + K(j, j) - 2.0 * K(i, j);
    if (eta <= 0.0) eta = kTau;
    double step = gap / eta;
    step = std::min(step, a(i) > 0 ? C(i) - alpha(i) : alpha(i));
    step = std::min(step, a(j) > 0 ? alpha(j) : C(j) - alpha(j));

    const double new_i = alpha(i) + a(i) * step;
    const double new_j = alpha(j) - a(j) * step;
    // Snap to bounds so the box holds exactly.
    auto snap = [](double v, double cap) {
      if (v <= cap * 1e-14) return 0.0;
      if (v >= cap * (1.0 - 1e-14)) return cap;
      return v;
    };
    // Assign the snapped values directly: alpha + (C - alpha) need not equal C.
    const double si = snap(new_i, C(i)), sj = snap(new_j, C(j));
    const double di = si - alpha(i);
    const double dj = sj - alpha(j);
    alpha(i) = si;
    alpha(j) = sj;
    // G_k += a_k (a_i K_ki di + a_j K_kj dj)
    const double ci = a(i) * di, cj = a(j) * dj;
    G.array() += a.array() * (ci * K.col(i).array() + cj * K.col(j).array());
  }
  sol.iterations = it;
  sol.kkt_violation = std::max(gap, 0.0);

  double sum_free = 0.0;
  int n_free = 0;
  double lb = -kInf, ub = kInf;
  for (Eigen::Index t = 0; t < m; ++t) {
    const double r = -a(t) * G(t);
    const bool at_zero = alpha(t) == 0.0, at_cap = alpha(t) == C(t);
    if (!at_zero && !at_cap) {
      sum_free += r;
      ++n_free;
    } else if ((a(t) > 0) == at_zero) {
      lb = std::max(lb, r);
    } else {
      ub = std::min(ub, r);
    }
  }
  if (n_free > 0) sol.intercept = sum_free / n_free;
  else if (std::isfinite(lb) && std::isfinite(ub)) sol.intercept = 0.5 * (lb + ub);
  else if (std::isfinite(lb)) sol.intercept = lb;
  else if (std::isfinite(ub)) sol.intercept = ub;

  // Q alpha = G + 1  =>  dual objective = sum(alpha) - 1/2 alpha'(G + 1)
  sol.objective = alpha.sum() - 0.5 * alpha.dot(G.array().matrix() + Vector::Ones(m));
  sol.alphas = std::move(alpha);
  if (it >= opt.max_iter && sol.kkt_violation > 10.0 * opt.tol) throw DualNonConvergence(std::move(sol));
  return sol;
}

}  // namespace srlearn
