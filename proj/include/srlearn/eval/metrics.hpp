#pragma once

#include <cmath>
#include <cstdlib>
#include <optional>
#include <vector>

#include "srlearn/data.hpp"
#include "srlearn/error.hpp"

namespace srlearn {

inline double misclassification(const std::vector<int>& pred, const std::vector<int>& truth) {
  if (pred.size() != truth.size()) throw DomainError("misclassification: length mismatch");
  if (pred.empty()) throw DomainError("misclassification: empty input");
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) wrong += pred[i] != truth[i];
  return static_cast<double>(wrong) / static_cast<double>(pred.size());
}

/// Mean |pred - truth|: distinguishes near misses from far ones on ordinal arms.
inline double mean_disagreement(const std::vector<int>& pred, const std::vector<int>& truth) {
  if (pred.size() != truth.size()) throw DomainError("mean_disagreement: length mismatch");
  if (pred.empty()) throw DomainError("mean_disagreement: empty input");
  long total = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) total += std::abs(pred[i] - truth[i]);
  return static_cast<double>(total) / static_cast<double>(pred.size());
}

namespace detail {

// sum Y/P over the subjects selected by `take`, divided by sum 1/P.
template <class Take>
double ratio_value(const TrialDataset& data, Take take, const char* what) {
  double num = 0.0, den = 0.0;
  for (int i = 0; i < data.n(); ++i) {
    if (!take(i)) continue;
    const double inv = 1.0 / data.prop(i);
    num += data.outcome()(i) * inv;
    den += inv;
  }
  if (!(den > 0.0)) throw UndefinedMetric(what);
  return num / den;
}

inline void check_pred(const std::vector<int>& pred, const TrialDataset& data) {
  if (static_cast<int>(pred.size()) != data.n()) throw DomainError("prediction count does not match the dataset");
}

}  // namespace detail

/// Self-normalized inverse-propensity value of the rule `pred`:
/// sum_i Y_i 1{A_i = pred_i} / P_i  divided by  sum_i 1{A_i = pred_i} / P_i.
inline double value_estimate(const std::vector<int>& pred, const TrialDataset& data) {
  detail::check_pred(pred, data);
  return detail::ratio_value(
      data, [&](int i) { return data.treatment()[i] == pred[i]; }, "value undefined: no subject received the recommended arm");
}

/// Value over rule-concordant subjects minus value over discordant ones.
inline double itr_effect(const std::vector<int>& pred, const TrialDataset& data) {
  detail::check_pred(pred, data);
  const double matched = value_estimate(pred, data);
  const double unmatched = detail::ratio_value(
      data, [&](int i) { return data.treatment()[i] != pred[i]; }, "ITR effect undefined: every subject matched the rule");
  return matched - unmatched;
}

inline std::vector<double> assignment_proportions(const std::vector<int>& pred, int K) {
  if (pred.empty()) throw DomainError("assignment_proportions: empty input");
  std::vector<std::size_t> count(static_cast<std::size_t>(K), 0);
  for (int d : pred) {
    if (d < 1 || d > K) throw DomainError("assignment outside 1..K");
    ++count[static_cast<std::size_t>(d - 1)];
  }
  std::vector<double> out(count.size());
  for (std::size_t k = 0; k < count.size(); ++k)
    out[k] = static_cast<double>(count[k]) / static_cast<double>(pred.size());
  return out;
}

struct EvaluationReport {
  std::optional<double> misclassification;
  std::optional<double> disagreement;
  std::optional<double> value;
  std::optional<double> itr_effect;
  std::vector<double> assignment_proportions;
  int n_test = 0;
};

/// Every metric defined on `data`; undefined ones stay empty.
inline EvaluationReport evaluate(const std::vector<int>& pred, const TrialDataset& data) {
  detail::check_pred(pred, data);
  EvaluationReport r;
  r.n_test = data.n();
  r.assignment_proportions = assignment_proportions(pred, data.K());
  if (data.true_optimal()) {
    r.misclassification = misclassification(pred, *data.true_optimal());
    r.disagreement = mean_disagreement(pred, *data.true_optimal());
  }
  try {
    r.value = value_estimate(pred, data);
  } catch (const UndefinedMetric&) {
  }
  try {
    r.itr_effect = itr_effect(pred, data);
  } catch (const UndefinedMetric&) {
  }
  return r;
}

}  // namespace srlearn
