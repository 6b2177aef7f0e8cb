#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include "srlearn/data.hpp"
#include "srlearn/error.hpp"
#include "srlearn/kernels.hpp"
#include "srlearn/solvers/logistic.hpp"
#include "srlearn/solvers/ols.hpp"
#include "srlearn/solvers/simplex.hpp"
#include "srlearn/solvers/wsvm_dual.hpp"

namespace srlearn {

enum class PropensityMode { Known, Logistic };

/// Outcome model m(X) whose residuals Y - m(X) drive labels and weights.
using ResidualModel = std::variant<LinearModel, KernelRidgeModel>;

inline Vector residual_predict(const ResidualModel& model, const Matrix& X) {
  return std::visit([&](const auto& m) -> Vector { return m.predict(X); }, model);
}

/*
 * A two-group comparison inside the cascade. Row r describes subject
 * indices[r] of the source dataset. treatment is the group indicator b
 * (-1 for negative_arms, +1 for positive_arms); labels = b * sign(Y - m(X));
 * weights = |Y - m(X)| / P(b | X).
 */
struct BinarySubproblem {
  IndexSet indices;
  Matrix features;
  Vector labels;
  Vector weights;
  Vector treatment;
  Vector outcome;
  Vector propensity;
  std::string step_id;
  std::vector<int> negative_arms;
  std::vector<int> positive_arms;

  int m() const { return static_cast<int>(indices.size()); }
  int p() const { return static_cast<int>(features.cols()); }

  /// Rows restricted to `rows` (positions within this subproblem).
  BinarySubproblem subset(const std::vector<int>& rows) const {
    BinarySubproblem s;
    const auto k = static_cast<Eigen::Index>(rows.size());
    s.features.resize(k, features.cols());
    s.labels.resize(k);
    s.weights.resize(k);
    s.treatment.resize(k);
    s.outcome.resize(k);
    s.propensity.resize(k);
    for (Eigen::Index r = 0; r < k; ++r) {
      const int i = rows[static_cast<std::size_t>(r)];
      s.indices.push_back(indices[static_cast<std::size_t>(i)]);
      s.features.row(r) = features.row(i);
      s.labels(r) = labels(i);
      s.weights(r) = weights(i);
      s.treatment(r) = treatment(i);
      s.outcome(r) = outcome(i);
      s.propensity(r) = propensity(i);
    }
    s.step_id = step_id;
    s.negative_arms = negative_arms;
    s.positive_arms = positive_arms;
    return s;
  }
};

struct SubproblemOptions {
  PropensityMode propensity = PropensityMode::Known;
  int min_size = 10;
  double propensity_floor = 0.01;
};

/// Label b*sign(e) with sign(0) = +1, and weight |e| / P.
inline std::pair<double, double> aol_label_weight(double b, double e, double P) {
  return {e >= 0.0 ? b : -b, std::abs(e) / P};
}

/// Per-arm assignment probability: the mean recorded propensity of subjects
/// observed on each arm (1/K without a propensity column). Index 0 unused.
inline std::vector<double> arm_probabilities(const TrialDataset& data) {
  std::vector<double> sum(static_cast<std::size_t>(data.K() + 1), 0.0);
  std::vector<int> count(sum.size(), 0);
  for (int i = 0; i < data.n(); ++i) {
    sum[data.treatment()[i]] += data.prop(i);
    ++count[data.treatment()[i]];
  }
  std::vector<double> pi(sum.size(), 0.0);
  for (int a = 1; a <= data.K(); ++a)
    pi[a] = count[a] ? sum[a] / count[a] : (data.propensity() ? 0.0 : 1.0 / data.K());
  return pi;
}

/*
 * Known mode: P(b | X) is the probability mass of b's arm group renormalized
 * over the arms this comparison admits, i.e. the randomization ratio
 * conditional on receiving one of the compared arms.
 * Logistic mode: P(b = +1 | X) from a logistic fit of b on X over the
 * eligible subjects.
 *
 * Throws DegenerateStep when fewer than min_size subjects are eligible or
 * only one group is present.
 */
inline BinarySubproblem build_subproblem(const TrialDataset& data, const std::vector<int>& negative_arms,
                                         const std::vector<int>& positive_arms, const IndexSet& eligible,
                                         const ResidualModel& residual, const SubproblemOptions& opt = {},
                                         std::string step_id = {}) {
  if (negative_arms.empty() || positive_arms.empty()) throw DomainError("build_subproblem: empty arm group");
  std::vector<int> side(static_cast<std::size_t>(data.K() + 1), 0);
  for (int a : negative_arms) {
    if (a < 1 || a > data.K()) throw DomainError("build_subproblem: arm outside 1..K");
    side[a] = -1;
  }
  for (int a : positive_arms) {
    if (a < 1 || a > data.K()) throw DomainError("build_subproblem: arm outside 1..K");
    if (side[a] != 0) throw DomainError("build_subproblem: arm groups overlap");
    side[a] = 1;
  }
  for (int i : eligible) {
    if (i < 0 || i >= data.n()) throw DomainError("build_subproblem: subject index out of range");
    if (side[data.treatment()[i]] == 0)
      throw DomainError("build_subproblem: eligible subject on an arm outside both groups");
  }
  const auto m = static_cast<Eigen::Index>(eligible.size());
  if (m < opt.min_size)
    throw DegenerateStep(step_id + ": " + std::to_string(m) + " eligible subjects (minimum " +
                         std::to_string(opt.min_size) + ")");

  BinarySubproblem s;
  s.indices = eligible;
  s.step_id = std::move(step_id);
  s.negative_arms = negative_arms;
  s.positive_arms = positive_arms;
  s.features.resize(m, data.p());
  s.treatment.resize(m);
  s.outcome.resize(m);
  int n_pos = 0;
  for (Eigen::Index r = 0; r < m; ++r) {
    const int i = eligible[static_cast<std::size_t>(r)];
    s.features.row(r) = data.features().row(i);
    s.treatment(r) = side[data.treatment()[i]];
    s.outcome(r) = data.outcome()(i);
    n_pos += s.treatment(r) > 0;
  }
  if (n_pos == 0 || n_pos == m) throw DegenerateStep(s.step_id + ": only one arm group among eligible subjects");

  s.propensity.resize(m);
  if (opt.propensity == PropensityMode::Known) {
    const auto pi = arm_probabilities(data);
    double mass_neg = 0.0, mass_pos = 0.0;
    for (int a : negative_arms) mass_neg += pi[a];
    for (int a : positive_arms) mass_pos += pi[a];
    if (!(mass_neg + mass_pos > 0.0)) throw DomainError("build_subproblem: compared arms carry no probability");
    const double p_pos = mass_pos / (mass_neg + mass_pos);
    for (Eigen::Index r = 0; r < m; ++r) s.propensity(r) = s.treatment(r) > 0 ? p_pos : 1.0 - p_pos;
  } else {
    const Vector y01 = (s.treatment.array() + 1.0) / 2.0;
    const LogisticModel lm = logistic_fit(s.features, y01);
    for (Eigen::Index r = 0; r < m; ++r) {
      const double q = lm.predict_proba(s.features.row(r).transpose());
      s.propensity(r) = s.treatment(r) > 0 ? q : 1.0 - q;
    }
  }
  s.propensity = s.propensity.cwiseMax(opt.propensity_floor);

  const Vector e = s.outcome - residual_predict(residual, s.features);
  s.labels.resize(m);
  s.weights.resize(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    const auto [label, weight] = aol_label_weight(s.treatment(r), e(r), s.propensity(r));
    s.labels(r) = label;
    s.weights(r) = weight;
  }
  return s;
}

/*
 * Fitted binary decision f with prediction sign(f), ties to -1.
 * Features outside selected_features do not enter f. A Constant rule always
 * returns constant_side and records why the step could not be fitted.
 */
struct BinaryRule {
  enum class Kind { SparseLinear, KernelExpansion, Constant };

  Kind kind = Kind::Constant;
  int p = 0;
  double intercept = 0.0;
  Vector slopes;          // SparseLinear: length p
  Matrix support;         // KernelExpansion: rows in selected-feature coordinates
  Vector coefficients;    // KernelExpansion: alpha_i * label_i
  KernelSpec kernel;
  std::vector<int> selected_features;  // 0-based, ascending
  int constant_side = -1;
  std::string reason;
  bool selection_fallback = false;

  static BinaryRule constant(int p, int side, std::string why) {
    BinaryRule r;
    r.p = p;
    r.constant_side = side > 0 ? 1 : -1;
    r.reason = std::move(why);
    for (int j = 0; j < p; ++j) r.selected_features.push_back(j);
    return r;
  }

  Vector decision_values(const Matrix& X) const {
    if (X.cols() != p) throw DomainError("binary rule expects " + std::to_string(p) + " features");
    switch (kind) {
      case Kind::Constant: return Vector::Constant(X.rows(), constant_side);
      case Kind::SparseLinear: return (X * slopes).array() + intercept;
      case Kind::KernelExpansion: {
        if (support.rows() == 0) return Vector::Constant(X.rows(), intercept);
        return (gram_matrix(kernel, select_columns(X), support) * coefficients).array() + intercept;
      }
    }
    return {};
  }

  double decision_value(const Eigen::Ref<const Vector>& x) const {
    Matrix row = x.transpose();
    return decision_values(row)(0);
  }

  Matrix select_columns(const Matrix& X) const {
    Matrix out(X.rows(), static_cast<Eigen::Index>(selected_features.size()));
    for (std::size_t j = 0; j < selected_features.size(); ++j)
      out.col(static_cast<Eigen::Index>(j)) = X.col(selected_features[j]);
    return out;
  }
};

inline int predict_binary(const BinaryRule& rule, const Eigen::Ref<const Vector>& x) {
  return rule.decision_value(x) > 0.0 ? 1 : -1;
}

inline std::vector<int> predict_binary_batch(const BinaryRule& rule, const Matrix& X) {
  const Vector f = rule.decision_values(X);
  std::vector<int> out(static_cast<std::size_t>(f.size()));
  for (Eigen::Index i = 0; i < f.size(); ++i) out[static_cast<std::size_t>(i)] = f(i) > 0.0 ? 1 : -1;
  return out;
}

/// Side minimizing the weighted zero-one loss of a constant rule; ties to -1.
inline int weighted_majority_side(const Vector& labels, const Vector& weights) {
  double pos = 0.0, neg = 0.0;
  for (Eigen::Index i = 0; i < labels.size(); ++i) (labels(i) > 0 ? pos : neg) += weights(i);
  return pos > neg ? 1 : -1;
}

inline std::vector<int> all_features(int p) {
  std::vector<int> f(static_cast<std::size_t>(p));
  for (int j = 0; j < p; ++j) f[static_cast<std::size_t>(j)] = j;
  return f;
}

namespace detail {

inline std::vector<int> positive_weight_rows(const Vector& weights) {
  std::vector<int> rows;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    if (weights(i) < 0.0 || !std::isfinite(weights(i))) throw DomainError("AOL weights must be finite and >= 0");
    if (weights(i) > 0.0) rows.push_back(static_cast<int>(i));
  }
  return rows;
}

inline void require_both_labels(const Vector& labels, const std::vector<int>& rows) {
  bool pos = false, neg = false;
  for (int i : rows) (labels(i) > 0 ? pos : neg) = true;
  if (!(pos && neg)) throw DegenerateStep("weighted subjects carry a single label");
}

}  // namespace detail

struct L2FitOptions {
  DualOptions dual;
  std::vector<int> selected;  // empty: all features
};

/*
 * Weighted hinge loss with squared RKHS penalty,
 *     min (1/m) sum_i w_i (1 - l_i f(x_i))^+ + lambda |f|^2,
 * solved in the dual with caps w_i / (2 lambda m). Only subjects with w_i > 0
 * enter, and m counts those subjects, so appending zero-weight subjects
 * leaves the rule unchanged.
 *
 * `gram`, when given, is the kernel matrix over the positive-weight rows in
 * selected-feature coordinates (lets CV reuse one Gram per bandwidth).
 */
inline BinaryRule fit_aol_l2_rows(const Matrix& X, const Vector& labels, const Vector& weights,
                                  const KernelSpec& kernel, double lambda, const L2FitOptions& opt = {},
                                  const Matrix* gram = nullptr) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("lambda must be positive");
  if (X.rows() != labels.size() || X.rows() != weights.size()) throw DomainError("fit_aol_l2: length mismatch");
  const int p = static_cast<int>(X.cols());
  const auto rows = detail::positive_weight_rows(weights);
  detail::require_both_labels(labels, rows);

  BinaryRule rule;
  rule.p = p;
  rule.kernel = kernel;
  rule.selected_features = opt.selected.empty() ? all_features(p) : opt.selected;
  for (int j : rule.selected_features)
    if (j < 0 || j >= p) throw DomainError("selected feature index out of range");

  const auto m = static_cast<Eigen::Index>(rows.size());
  Matrix Xs(m, static_cast<Eigen::Index>(rule.selected_features.size()));
  Vector a(m), C(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    const int i = rows[static_cast<std::size_t>(r)];
    for (std::size_t j = 0; j < rule.selected_features.size(); ++j)
      Xs(r, static_cast<Eigen::Index>(j)) = X(i, rule.selected_features[j]);
    a(r) = labels(i);
    C(r) = weights(i) / (2.0 * lambda * static_cast<double>(m));
  }
  Matrix local;
  if (gram) {
    if (gram->rows() != m || gram->cols() != m) throw DomainError("fit_aol_l2: Gram size mismatch");
  } else {
    local = gram_matrix(kernel, Xs);
    gram = &local;
  }
  const DualSolution sol = wsvm_dual_solve(*gram, a, C, opt.dual);
  rule.intercept = sol.intercept;
  const Vector coef = sol.alphas.cwiseProduct(a);
  if (kernel.kind == KernelKind::Linear) {
    rule.kind = BinaryRule::Kind::SparseLinear;
    rule.slopes = Vector::Zero(p);
    const Vector w = Xs.transpose() * coef;
    for (std::size_t j = 0; j < rule.selected_features.size(); ++j)
      rule.slopes(rule.selected_features[j]) = w(static_cast<Eigen::Index>(j));
  } else {
    rule.kind = BinaryRule::Kind::KernelExpansion;
    std::vector<Eigen::Index> keep;
    for (Eigen::Index r = 0; r < m; ++r)
      if (std::abs(coef(r)) > 1e-12) keep.push_back(r);
    rule.support.resize(static_cast<Eigen::Index>(keep.size()), Xs.cols());
    rule.coefficients.resize(static_cast<Eigen::Index>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k) {
      rule.support.row(static_cast<Eigen::Index>(k)) = Xs.row(keep[k]);
      rule.coefficients(static_cast<Eigen::Index>(k)) = coef(keep[k]);
    }
  }
  return rule;
}

inline BinaryRule fit_aol_l2(const BinarySubproblem& sub, const KernelSpec& kernel, double lambda,
                             const L2FitOptions& opt = {}) {
  return fit_aol_l2_rows(sub.features, sub.labels, sub.weights, kernel, lambda, opt);
}

/*
 * LP form of the L1-penalized weighted hinge fit over positive-weight rows.
 * Variable order: beta0 (free), beta+ (p), beta- (p), xi (m).
 *     min (1/m) sum w_i xi_i + lambda sum_j (beta+_j + beta-_j)
 *     s.t. l_i beta0 + l_i x_i.(beta+ - beta-) + xi_i >= 1
 */
inline LinearProgram encode_l1_lp(const Matrix& X, const Vector& labels, const Vector& weights, double lambda) {
  const auto m = X.rows(), p = X.cols();
  LinearProgram lp;
  const Eigen::Index nv = 1 + 2 * p + m;
  lp.c = Vector::Zero(nv);
  lp.c.segment(1, 2 * p).setConstant(lambda);
  lp.c.tail(m) = weights / static_cast<double>(m);
  lp.G = Matrix::Zero(m, nv);
  lp.h = Vector::Ones(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    lp.G(i, 0) = labels(i);
    lp.G.row(i).segment(1, p) = labels(i) * X.row(i);
    lp.G.row(i).segment(1 + p, p) = -labels(i) * X.row(i);
    lp.G(i, 1 + 2 * p + i) = 1.0;
  }
  lp.sense.assign(static_cast<std::size_t>(m), RowSense::GreaterEqual);
  lp.bounds.assign(static_cast<std::size_t>(nv), VarBound::NonNegative);
  lp.bounds[0] = VarBound::Free;
  return lp;
}

/// Penalty level at and above which every L1 slope is zero: no subgradient
/// of the loss in any slope direction exceeds (1/m) max_j sum_i w_i |x_ij|.
inline double l1_lambda_max(const Matrix& X, const Vector& weights) {
  const auto rows = detail::positive_weight_rows(weights);
  if (rows.empty()) return 0.0;
  double best = 0.0;
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    double s = 0.0;
    for (int i : rows) s += weights(i) * std::abs(X(i, j));
    best = std::max(best, s / static_cast<double>(rows.size()));
  }
  return best;
}

inline BinaryRule fit_aol_l1_linear_rows(const Matrix& X, const Vector& labels, const Vector& weights,
                                         double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("lambda must be positive");
  if (X.rows() != labels.size() || X.rows() != weights.size())
    throw DomainError("fit_aol_l1_linear: length mismatch");
  const auto rows = detail::positive_weight_rows(weights);
  detail::require_both_labels(labels, rows);
  const auto m = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index p = X.cols();
  Matrix Xs(m, p);
  Vector l(m), w(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    const int i = rows[static_cast<std::size_t>(r)];
    Xs.row(r) = X.row(i);
    l(r) = labels(i);
    w(r) = weights(i);
  }
  const LpResult res = simplex_solve(encode_l1_lp(Xs, l, w, lambda));
  if (res.status != LpStatus::Optimal)
    throw std::logic_error("fit_aol_l1_linear: LP reported " + to_string(res.status));

  BinaryRule rule;
  rule.kind = BinaryRule::Kind::SparseLinear;
  rule.p = static_cast<int>(p);
  rule.intercept = res.x(0);
  rule.slopes.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double b = res.x(1 + j) - res.x(1 + p + j);
    rule.slopes(j) = std::abs(b) <= 1e-8 ? 0.0 : b;
    if (rule.slopes(j) != 0.0) rule.selected_features.push_back(static_cast<int>(j));
  }
  return rule;
}

inline BinaryRule fit_aol_l1_linear(const BinarySubproblem& sub, double lambda) {
  return fit_aol_l1_linear_rows(sub.features, sub.labels, sub.weights, lambda);
}

}  // namespace srlearn
