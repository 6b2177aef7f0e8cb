#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "srlearn/aol.hpp"
#include "srlearn/error.hpp"
#include "srlearn/kernels.hpp"
#include "srlearn/parallel.hpp"
#include "srlearn/solvers/wsvm_dual.hpp"
#include "srlearn/varselect.hpp"

namespace srlearn {

enum class Fitter { L2, L1Linear, TwoStage };
enum class CvCriterion { Value, WeightedMisclassification };

/// sigma is ignored (and conventionally 0) for linear rules.
struct GridPoint {
  double lambda = 1.0;
  double sigma = 0.0;
  friend bool operator==(const GridPoint&, const GridPoint&) = default;
};

struct CvOptions {
  int folds = 5;
  std::uint64_t seed = 0;
  Fitter fitter = Fitter::L2;
  KernelKind kernel = KernelKind::Linear;
  CvCriterion criterion = CvCriterion::Value;
  std::vector<int> selected;  // features used by L2 fits; empty: all (TwoStage screens when empty)
  DualOptions dual;
  ScreenOptions screen;
  ParallelFor parallel = serial_for;
};

struct CVResult {
  GridPoint best;
  std::vector<GridPoint> grid;
  std::vector<double> mean_score;  // per grid point; higher is better
  int folds_used = 0;
  std::uint64_t fold_seed = 0;
  std::vector<int> fold_of;            // fold id per subproblem row
  std::vector<int> selected_features;  // features the tuned fits used
  int l1_path_violations = 0;          // folds x grid steps where the L1 active set grew with lambda
};

/*
 * Fold ids stratified by label: each class is shuffled and dealt round-robin.
 * A draw is accepted when every training part and every held-out part holds
 * both labels among positive-weight rows. Up to 20 draws are tried per fold
 * count, then the fold count is lowered; below 2 the step is degenerate.
 */
inline std::vector<int> stratified_folds(const Vector& labels, const Vector& weights, int& folds,
                                         std::uint64_t seed) {
  const auto m = static_cast<int>(labels.size());
  std::vector<int> pos, neg;
  for (int i = 0; i < m; ++i) (labels(i) > 0 ? pos : neg).push_back(i);
  std::mt19937_64 rng(seed);
  std::vector<int> fold(static_cast<std::size_t>(m));
  for (; folds >= 2; --folds) {
    if (m < 2 * folds) continue;
    for (int attempt = 0; attempt < 20; ++attempt) {
      for (auto* cls : {&neg, &pos}) {
        std::vector<int> order = *cls;
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t r = 0; r < order.size(); ++r) fold[static_cast<std::size_t>(order[r])] = static_cast<int>(r % folds);
      }
      // held[f][c]: positive-weight rows of class c in fold f
      std::vector<std::array<int, 2>> held(static_cast<std::size_t>(folds), {0, 0});
      std::array<int, 2> total{0, 0};
      for (int i = 0; i < m; ++i) {
        if (!(weights(i) > 0.0)) continue;
        const int c = labels(i) > 0;
        ++held[static_cast<std::size_t>(fold[static_cast<std::size_t>(i)])][static_cast<std::size_t>(c)];
        ++total[static_cast<std::size_t>(c)];
      }
      bool ok = true;
      for (const auto& h : held)
        ok = ok && h[0] > 0 && h[1] > 0 && total[0] - h[0] > 0 && total[1] - h[1] > 0;
      if (ok) return fold;
    }
  }
  throw DegenerateStep("cross-validation: labels cannot be split into two or more stratified folds");
}

namespace detail {

inline double heldout_score(const BinarySubproblem& sub, const std::vector<int>& rows, const Vector& f,
                            CvCriterion criterion) {
  if (criterion == CvCriterion::WeightedMisclassification) {
    double bad = 0.0, tot = 0.0;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const int i = rows[r];
      const double d = f(static_cast<Eigen::Index>(r)) > 0.0 ? 1.0 : -1.0;
      tot += sub.weights(i);
      if (d != sub.labels(i)) bad += sub.weights(i);
    }
    return tot > 0.0 ? -bad / tot : std::numeric_limits<double>::quiet_NaN();
  }
  double num = 0.0, den = 0.0;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const int i = rows[r];
    const double d = f(static_cast<Eigen::Index>(r)) > 0.0 ? 1.0 : -1.0;
    if (d != sub.treatment(i)) continue;
    num += sub.outcome(i) / sub.propensity(i);
    den += 1.0 / sub.propensity(i);
  }
  return den > 0.0 ? num / den : std::numeric_limits<double>::quiet_NaN();
}

inline Matrix take(const Matrix& M, const std::vector<int>& rows, const std::vector<int>& cols) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c)
    for (std::size_t r = 0; r < rows.size(); ++r)
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = M(rows[r], cols[c]);
  return out;
}

}  // namespace detail

/*
 * K-fold tuning of (lambda, sigma) for one binary subproblem. Each grid point
 * is fitted on the training folds and scored on the held-out fold; the
 * default score is the held-out value of the binary rule (mean outcome,
 * inverse-propensity weighted, over subjects whose group matches the rule).
 * Folds where a score is undefined are left out of that point's mean.
 * The best mean wins; exact ties go to the larger lambda, then the larger
 * sigma, then the later grid entry.
 *
 * Kernel matrices are computed once per bandwidth over all rows and sliced
 * per fold.
 */
inline CVResult cv_tune(const BinarySubproblem& sub, const std::vector<GridPoint>& grid, const CvOptions& opt = {}) {
  if (grid.empty()) throw DomainError("cv_tune: empty grid");
  if (opt.folds < 2) throw DomainError("cv_tune: need at least two folds");
  for (const auto& g : grid) {
    if (!(g.lambda > 0.0)) throw DomainError("cv_tune: lambda must be positive");
    if (opt.kernel == KernelKind::Gaussian && opt.fitter != Fitter::L1Linear && !(g.sigma > 0.0))
      throw DomainError("cv_tune: Gaussian grid needs positive sigma");
  }
  CVResult res;
  res.grid = grid;
  res.fold_seed = opt.seed;
  int folds = opt.folds;
  res.fold_of = stratified_folds(sub.labels, sub.weights, folds, opt.seed);
  res.folds_used = folds;

  res.selected_features = opt.selected;
  if (opt.fitter == Fitter::TwoStage && res.selected_features.empty()) {
    res.selected_features = screen_subproblem(sub, opt.screen).selected_covariates;
  }
  if (res.selected_features.empty()) res.selected_features = all_features(sub.p());

  std::vector<std::vector<int>> train(static_cast<std::size_t>(folds)), held(static_cast<std::size_t>(folds));
  for (int i = 0; i < sub.m(); ++i) {
    const int f = res.fold_of[static_cast<std::size_t>(i)];
    held[static_cast<std::size_t>(f)].push_back(i);
    for (int g = 0; g < folds; ++g)
      if (g != f && sub.weights(i) > 0.0) train[static_cast<std::size_t>(g)].push_back(i);
  }

  const auto npts = static_cast<int>(grid.size());
  std::vector<double> score(static_cast<std::size_t>(npts * folds), std::numeric_limits<double>::quiet_NaN());
  std::vector<int> nnz(score.size(), 0);

  if (opt.fitter == Fitter::L1Linear) {
    opt.parallel(npts * folds, [&](int task) {
      const int g = task / folds, f = task % folds;
      const auto& tr = train[static_cast<std::size_t>(f)];
      const auto& ho = held[static_cast<std::size_t>(f)];
      const Matrix Xtr = detail::take(sub.features, tr, all_features(sub.p()));
      Vector l(static_cast<Eigen::Index>(tr.size())), w(static_cast<Eigen::Index>(tr.size()));
      for (std::size_t r = 0; r < tr.size(); ++r) {
        l(static_cast<Eigen::Index>(r)) = sub.labels(tr[r]);
        w(static_cast<Eigen::Index>(r)) = sub.weights(tr[r]);
      }
      const BinaryRule rule = fit_aol_l1_linear_rows(Xtr, l, w, grid[static_cast<std::size_t>(g)].lambda);
      const Vector fv = rule.decision_values(detail::take(sub.features, ho, all_features(sub.p())));
      score[static_cast<std::size_t>(task)] = detail::heldout_score(sub, ho, fv, opt.criterion);
      nnz[static_cast<std::size_t>(task)] = static_cast<int>(rule.selected_features.size());
    });
    // Active-set monotonicity along increasing lambda, per fold.
    std::vector<int> order(static_cast<std::size_t>(npts));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return grid[static_cast<std::size_t>(a)].lambda < grid[static_cast<std::size_t>(b)].lambda; });
    for (int f = 0; f < folds; ++f)
      for (std::size_t k = 1; k < order.size(); ++k)
        if (nnz[static_cast<std::size_t>(order[k] * folds + f)] > nnz[static_cast<std::size_t>(order[k - 1] * folds + f)])
          ++res.l1_path_violations;
  } else {
    // Distinct bandwidths, each with its full Gram over selected coordinates.
    std::vector<double> sigmas;
    for (const auto& g : grid) {
      const double s = opt.kernel == KernelKind::Linear ? 0.0 : g.sigma;
      if (std::find(sigmas.begin(), sigmas.end(), s) == sigmas.end()) sigmas.push_back(s);
    }
    std::vector<int> all_rows(static_cast<std::size_t>(sub.m()));
    std::iota(all_rows.begin(), all_rows.end(), 0);
    const Matrix Xs = detail::take(sub.features, all_rows, res.selected_features);
    std::vector<Matrix> grams(sigmas.size());
    opt.parallel(static_cast<int>(sigmas.size()), [&](int s) {
      const KernelSpec k = opt.kernel == KernelKind::Linear ? KernelSpec::linear()
                                                            : KernelSpec::gaussian(sigmas[static_cast<std::size_t>(s)]);
      grams[static_cast<std::size_t>(s)] = gram_matrix(k, Xs);
    });
    opt.parallel(npts * folds, [&](int task) {
      const int g = task / folds, f = task % folds;
      const GridPoint& pt = grid[static_cast<std::size_t>(g)];
      const double s = opt.kernel == KernelKind::Linear ? 0.0 : pt.sigma;
      const Matrix& K = grams[static_cast<std::size_t>(std::find(sigmas.begin(), sigmas.end(), s) - sigmas.begin())];
      const auto& tr = train[static_cast<std::size_t>(f)];
      const auto& ho = held[static_cast<std::size_t>(f)];
      const auto mt = static_cast<Eigen::Index>(tr.size());
      Vector a(mt), C(mt);
      for (Eigen::Index r = 0; r < mt; ++r) {
        a(r) = sub.labels(tr[static_cast<std::size_t>(r)]);
        C(r) = sub.weights(tr[static_cast<std::size_t>(r)]) / (2.0 * pt.lambda * static_cast<double>(mt));
      }
      const DualSolution sol = wsvm_dual_solve(detail::take(K, tr, tr), a, C, opt.dual);
      const Vector fv = (detail::take(K, ho, tr) * sol.alphas.cwiseProduct(a)).array() + sol.intercept;
      score[static_cast<std::size_t>(task)] = detail::heldout_score(sub, ho, fv, opt.criterion);
    });
  }

  res.mean_score.assign(static_cast<std::size_t>(npts), -std::numeric_limits<double>::infinity());
  int best = -1;
  for (int g = 0; g < npts; ++g) {
    double sum = 0.0;
    int cnt = 0;
    for (int f = 0; f < folds; ++f) {
      const double v = score[static_cast<std::size_t>(g * folds + f)];
      if (!std::isnan(v)) {
        sum += v;
        ++cnt;
      }
    }
    if (cnt > 0) res.mean_score[static_cast<std::size_t>(g)] = sum / cnt;
    if (best < 0) {
      best = g;
      continue;
    }
    const double v = res.mean_score[static_cast<std::size_t>(g)], bv = res.mean_score[static_cast<std::size_t>(best)];
    const GridPoint& p = grid[static_cast<std::size_t>(g)];
    const GridPoint& bp = grid[static_cast<std::size_t>(best)];
    if (v > bv || (v == bv && (p.lambda > bp.lambda || (p.lambda == bp.lambda && p.sigma >= bp.sigma)))) best = g;
  }
  res.best = grid[static_cast<std::size_t>(best)];
  return res;
}

}  // namespace srlearn
