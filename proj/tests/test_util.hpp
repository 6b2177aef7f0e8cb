// Small builders shared by the unit suites.
#pragma once

#include <random>
#include <vector>

#include "srlearn/aol.hpp"
#include "srlearn/data.hpp"

namespace testutil {

using srlearn::Matrix;
using srlearn::Vector;

// Subproblem assembled directly from labels and weights (treatment = labels,
// outcome = weights, unit propensity).
inline srlearn::BinarySubproblem make_sub(const Matrix& X, const Vector& labels, const Vector& weights) {
  srlearn::BinarySubproblem s;
  for (Eigen::Index i = 0; i < X.rows(); ++i) s.indices.push_back(static_cast<int>(i));
  s.features = X;
  s.labels = labels;
  s.weights = weights;
  s.treatment = labels;
  s.outcome = weights;
  s.propensity = Vector::Ones(X.rows());
  s.step_id = "T";
  s.negative_arms = {1};
  s.positive_arms = {2};
  return s;
}

inline Matrix uniform_matrix(std::mt19937_64& rng, int n, int p, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix X(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) X(i, j) = u(rng);
  return X;
}

// Labels sign(score) with a margin gap: points with |score| < gap are pushed out.
template <class Score>
inline srlearn::BinarySubproblem separated_sub(std::mt19937_64& rng, int n, int p, Score score, double gap = 0.1) {
  std::uniform_real_distribution<double> u(-1.0, 1.0), w(0.2, 2.0);
  Matrix X(n, p);
  Vector l(n), wt(n);
  for (int i = 0; i < n; ++i) {
    for (;;) {
      for (int j = 0; j < p; ++j) X(i, j) = u(rng);
      const double s = score(X.row(i));
      if (std::abs(s) >= gap) {
        l(i) = s > 0 ? 1.0 : -1.0;
        break;
      }
    }
    wt(i) = w(rng);
  }
  return make_sub(X, l, wt);
}

inline double agreement(const std::vector<int>& a, const std::vector<int>& b) {
  int same = 0;
  for (std::size_t i = 0; i < a.size(); ++i) same += a[i] == b[i];
  return static_cast<double>(same) / static_cast<double>(a.size());
}

inline Matrix dense_grid_2d(int side) {
  Matrix G(side * side, 2);
  for (int i = 0; i < side; ++i)
    for (int j = 0; j < side; ++j) {
      G(i * side + j, 0) = -1.0 + 2.0 * i / (side - 1);
      G(i * side + j, 1) = -1.0 + 2.0 * j / (side - 1);
    }
  return G;
}

}  // namespace testutil
