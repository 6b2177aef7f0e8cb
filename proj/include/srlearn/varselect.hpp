#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "srlearn/aol.hpp"
#include "srlearn/data.hpp"
#include "srlearn/error.hpp"
#include "srlearn/kernels.hpp"
#include "srlearn/solvers/logistic.hpp"

namespace srlearn {

/// x_j (second < 0) or x_j * x_k with j <= k. Indices are 0-based.
struct Monomial {
  int first = 0;
  int second = -1;

  bool linear() const { return second < 0; }
  std::string name(const std::vector<std::string>& names = {}) const {
    auto nm = [&](int j) { return j < static_cast<int>(names.size()) ? names[j] : "x" + std::to_string(j + 1); };
    if (linear()) return nm(first);
    if (first == second) return nm(first) + "^2";
    return nm(first) + "*" + nm(second);
  }
  friend bool operator==(const Monomial&, const Monomial&) = default;
};

struct ExpandedFeatures {
  Matrix values;
  std::vector<Monomial> monomials;
};

/// All first-order columns, then products x_j x_k (j <= k) in lexicographic order.
inline ExpandedFeatures expand_second_order(const Matrix& X) {
  const int p = static_cast<int>(X.cols());
  if (p < 1) throw DomainError("expand_second_order needs at least one covariate");
  ExpandedFeatures out;
  out.values.resize(X.rows(), p + p * (p + 1) / 2);
  int c = 0;
  for (int j = 0; j < p; ++j, ++c) {
    out.values.col(c) = X.col(j);
    out.monomials.push_back({j, -1});
  }
  for (int j = 0; j < p; ++j)
    for (int k = j; k < p; ++k, ++c) {
      out.values.col(c) = X.col(j).cwiseProduct(X.col(k));
      out.monomials.push_back({j, k});
    }
  return out;
}

struct ScreenOptions {
  double gamma = 0.5;
  int max_terms = 0;   // 0: min(n/5, 50)
  bool weighted = false;
  int logistic_iterations = 30;
};

struct ScreenResult {
  std::vector<int> selected_columns;  // into the expanded column list, ascending
  std::vector<Monomial> selected_monomials;
  std::vector<int> selected_covariates;  // 0-based, ascending
  std::vector<double> trace;             // EBIC after each accepted move, starting with the empty model
};

namespace detail {

inline double log_binomial(double n, double k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

class EbicScorer {
 public:
  EbicScorer(const Matrix& Z, const Vector& y, const Vector* w, const ScreenOptions& opt, int candidates)
      : Z_(Z), y_(y), w_(w), gamma_(opt.gamma), candidates_(candidates) {
    lopt_.max_iter = opt.logistic_iterations;
  }

  // EBIC of the model using columns `cols`; `coef_out` receives intercept then slopes.
  double score(const std::vector<int>& cols, Vector* coef_out = nullptr, const Vector* start = nullptr) const {
    Matrix X(Z_.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) X.col(static_cast<Eigen::Index>(c)) = Z_.col(cols[c]);
    const LogisticModel fit = logistic_fit(X, y_, lopt_, w_, start);
    if (coef_out) {
      coef_out->resize(fit.slopes.size() + 1);
      (*coef_out) << fit.intercept, fit.slopes;
    }
    const double k = static_cast<double>(cols.size());
    return -2.0 * fit.log_likelihood + k * std::log(static_cast<double>(Z_.rows())) +
           2.0 * gamma_ * log_binomial(candidates_, k);
  }

 private:
  const Matrix& Z_;
  const Vector& y_;
  const Vector* w_;
  double gamma_;
  double candidates_;
  LogisticOptions lopt_;
};

}  // namespace detail

/*
 * Forward-backward stepwise logistic regression scored by EBIC
 *     -2 loglik + k log n + 2 gamma log C(P, k),
 * P the number of candidate columns. Forward moves add the column with the
 * lowest EBIC while that improves the score; backward moves drop columns
 * while that improves it; the two alternate until neither helps. Columns are
 * standardized internally and constant columns are never candidates.
 */
inline ScreenResult screen_stepwise(const Matrix& X_aug, const std::vector<Monomial>& monomials,
                                    const Vector& labels01, const Vector* weights = nullptr,
                                    const ScreenOptions& opt = {}) {
  const Eigen::Index n = X_aug.rows();
  if (labels01.size() != n) throw DomainError("screen_stepwise: label length mismatch");
  if (static_cast<Eigen::Index>(monomials.size()) != X_aug.cols())
    throw DomainError("screen_stepwise: monomial list does not match columns");
  if (n < 20) throw DomainError("screen_stepwise needs at least 20 observations");
  bool has0 = false, has1 = false;
  for (Eigen::Index i = 0; i < n; ++i) (labels01(i) > 0.5 ? has1 : has0) = true;
  if (!(has0 && has1)) throw DomainError("screen_stepwise: labels have a single class");

  Matrix Z = X_aug;
  std::vector<int> pool;
  for (Eigen::Index c = 0; c < Z.cols(); ++c) {
    const double mu = Z.col(c).mean();
    Z.col(c).array() -= mu;
    const double sd = std::sqrt(Z.col(c).squaredNorm() / static_cast<double>(n));
    if (sd > 1e-12 * (1.0 + std::abs(mu))) {
      Z.col(c) /= sd;
      pool.push_back(static_cast<int>(c));
    }
  }
  Vector w;
  if (opt.weighted && weights) {
    if (weights->size() != n) throw DomainError("screen_stepwise: weight length mismatch");
    const double mean_w = weights->mean();
    if (!(mean_w > 0.0)) throw DomainError("screen_stepwise: weights sum to zero");
    w = *weights / mean_w;
  }
  const detail::EbicScorer scorer(Z, labels01, w.size() ? &w : nullptr, opt, static_cast<int>(pool.size()));
  const int cap = opt.max_terms > 0 ? opt.max_terms : std::min(static_cast<int>(n / 5), 50);

  std::vector<int> model;
  Vector coef;
  ScreenResult res;
  double best = scorer.score(model, &coef);
  res.trace.push_back(best);
  // Every accepted move lowers EBIC; the round cap only guards against
  // warm-start noise making two moves undo each other.
  for (bool changed = true; changed && res.trace.size() < 400;) {
    changed = false;
    // forward
    while (static_cast<int>(model.size()) < cap) {
      double cand_best = std::numeric_limits<double>::infinity();
      int cand = -1;
      Vector start(coef.size() + 1);
      start << coef, 0.0;
      for (int c : pool) {
        if (std::find(model.begin(), model.end(), c) != model.end()) continue;
        std::vector<int> trial = model;
        trial.push_back(c);
        const double s = scorer.score(trial, nullptr, &start);
        if (s < cand_best) {
          cand_best = s;
          cand = c;
        }
      }
      if (cand < 0 || !(cand_best < best - 1e-9)) break;
      model.push_back(cand);
      best = scorer.score(model, &coef, &start);
      res.trace.push_back(best);
      changed = true;
    }
    // backward
    while (!model.empty()) {
      double cand_best = std::numeric_limits<double>::infinity();
      std::size_t drop = model.size();
      for (std::size_t r = 0; r < model.size(); ++r) {
        std::vector<int> trial = model;
        trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(r));
        const double s = scorer.score(trial);
        if (s < cand_best) {
          cand_best = s;
          drop = r;
        }
      }
      if (drop == model.size() || !(cand_best < best - 1e-9)) break;
      model.erase(model.begin() + static_cast<std::ptrdiff_t>(drop));
      best = scorer.score(model, &coef);
      res.trace.push_back(best);
      changed = true;
    }
  }

  std::sort(model.begin(), model.end());
  std::set<int> covs;
  for (int c : model) {
    const Monomial& mono = monomials[static_cast<std::size_t>(c)];
    res.selected_columns.push_back(c);
    res.selected_monomials.push_back(mono);
    covs.insert(mono.first);
    if (!mono.linear()) covs.insert(mono.second);
  }
  res.selected_covariates.assign(covs.begin(), covs.end());
  return res;
}

/// Screens the subproblem's covariates through their second-order expansion
/// with labels mapped to {0, 1}.
inline ScreenResult screen_subproblem(const BinarySubproblem& sub, const ScreenOptions& opt = {}) {
  const ExpandedFeatures ex = expand_second_order(sub.features);
  const Vector y01 = (sub.labels.array() + 1.0) / 2.0;
  return screen_stepwise(ex.values, ex.monomials, y01, &sub.weights, opt);
}

/*
 * Stage 1 screens covariates, stage 2 fits the L2 rule on the retained
 * covariates only. An empty screen keeps every covariate and sets
 * selection_fallback on the rule.
 */
inline BinaryRule fit_two_stage(const BinarySubproblem& sub, const KernelSpec& kernel, double lambda,
                                const ScreenOptions& sopt = {}, const DualOptions& dopt = {}) {
  const ScreenResult screen = screen_subproblem(sub, sopt);
  L2FitOptions opt;
  opt.dual = dopt;
  opt.selected = screen.selected_covariates;
  BinaryRule rule = fit_aol_l2(sub, kernel, lambda, opt);
  rule.selection_fallback = screen.selected_covariates.empty();
  return rule;
}

}  // namespace srlearn
