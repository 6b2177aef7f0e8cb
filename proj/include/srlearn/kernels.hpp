#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "srlearn/data.hpp"
#include "srlearn/error.hpp"

namespace srlearn {

enum class KernelKind { Linear, Gaussian };

struct KernelSpec {
  KernelKind kind = KernelKind::Linear;
  double sigma = 1.0;  // Gaussian bandwidth

  static KernelSpec linear() { return {KernelKind::Linear, 1.0}; }
  static KernelSpec gaussian(double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("Gaussian bandwidth must be positive");
    return {KernelKind::Gaussian, sigma};
  }

  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

inline std::string to_string(KernelKind k) { return k == KernelKind::Linear ? "linear" : "gaussian"; }

// K(u,v) = u.v  or  exp(-|u-v|^2 / (2 sigma^2))
template <class U, class V>
double kernel_eval(const KernelSpec& spec, const Eigen::MatrixBase<U>& u, const Eigen::MatrixBase<V>& v) {
  if (u.size() != v.size()) throw DomainError("kernel_eval: dimension mismatch");
  if (spec.kind == KernelKind::Linear) return u.dot(v);
  const double d2 = (u - v).squaredNorm();
  return std::exp(-d2 / (2.0 * spec.sigma * spec.sigma));
}

/// Entry (i,j) = K(A_i, B_j).
inline Matrix gram_matrix(const KernelSpec& spec, const Matrix& A, const Matrix& B) {
  if (A.cols() != B.cols()) throw DomainError("gram_matrix: column counts differ");
  Matrix G = A * B.transpose();
  if (spec.kind == KernelKind::Linear) return G;
  const Vector a2 = A.rowwise().squaredNorm();
  const Vector b2 = B.rowwise().squaredNorm();
  const double scale = -1.0 / (2.0 * spec.sigma * spec.sigma);
  for (Eigen::Index j = 0; j < G.cols(); ++j)
    for (Eigen::Index i = 0; i < G.rows(); ++i) {
      const double d2 = std::max(0.0, a2(i) + b2(j) - 2.0 * G(i, j));
      G(i, j) = std::exp(scale * d2);
    }
  return G;
}

inline Matrix gram_matrix(const KernelSpec& spec, const Matrix& A) {
  Matrix G = gram_matrix(spec, A, A);
  // exact symmetry and unit diagonal regardless of rounding in the expansion
  for (Eigen::Index i = 0; i < G.rows(); ++i) {
    if (spec.kind == KernelKind::Gaussian) G(i, i) = 1.0;
    for (Eigen::Index j = 0; j < i; ++j) G(j, i) = G(i, j);
  }
  return G;
}

/*
 * Median pairwise Euclidean distance between rows. Inputs above `cap` rows
 * are subsampled (without replacement, seeded) before pairing.
 */
inline double median_bandwidth(const Matrix& X, std::uint64_t seed = 0, int cap = 1000) {
  if (X.rows() < 2) throw DomainError("median_bandwidth needs at least two rows");
  std::vector<Eigen::Index> rows(static_cast<std::size_t>(X.rows()));
  std::iota(rows.begin(), rows.end(), Eigen::Index{0});
  if (X.rows() > cap) {
    std::mt19937_64 rng(seed);
    for (int i = 0; i < cap; ++i) {
      std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(i), rows.size() - 1);
      std::swap(rows[static_cast<std::size_t>(i)], rows[pick(rng)]);
    }
    rows.resize(static_cast<std::size_t>(cap));
    std::sort(rows.begin(), rows.end());
  }
  std::vector<double> d;
  d.reserve(rows.size() * (rows.size() - 1) / 2);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = i + 1; j < rows.size(); ++j) d.push_back((X.row(rows[i]) - X.row(rows[j])).norm());
  const std::size_t mid = d.size() / 2;
  std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid), d.end());
  double med = d[mid];
  if (d.size() % 2 == 0) {
    const double lower = *std::max_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid));
    med = 0.5 * (med + lower);
  }
  if (med > 0.0) return med;
  // Mostly duplicated rows: fall back to the median of the nonzero distances.
  std::vector<double> pos;
  for (double v : d)
    if (v > 0.0) pos.push_back(v);
  if (pos.empty()) throw DomainError("median_bandwidth: all rows are identical");
  std::sort(pos.begin(), pos.end());
  return pos[pos.size() / 2];
}

}  // namespace srlearn
