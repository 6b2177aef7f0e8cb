#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "srlearn/error.hpp"

namespace srlearn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using IndexSet = std::vector<int>;

/*
 * Ordinal-trial data: covariates, observed arm in 1..K, outcome (larger is
 * better), optional per-subject propensity P(A_i | X_i) and, for simulated
 * data, the true optimal arm. Immutable once constructed.
 */
class TrialDataset {
 public:
  TrialDataset() = default;

  TrialDataset(Matrix features, std::vector<int> treatment, Vector outcome, int K,
               std::optional<Vector> propensity = std::nullopt,
               std::optional<std::vector<int>> true_optimal = std::nullopt,
               std::vector<std::string> feature_names = {})
      : features_(std::move(features)),
        treatment_(std::move(treatment)),
        outcome_(std::move(outcome)),
        propensity_(std::move(propensity)),
        true_optimal_(std::move(true_optimal)),
        K_(K),
        feature_names_(std::move(feature_names)) {
    if (feature_names_.empty()) {
      for (Eigen::Index j = 0; j < features_.cols(); ++j)
        feature_names_.push_back("x" + std::to_string(j + 1));
    }
    validate();
  }

  int n() const { return static_cast<int>(treatment_.size()); }
  int p() const { return static_cast<int>(features_.cols()); }
  int K() const { return K_; }

  const Matrix& features() const { return features_; }
  const std::vector<int>& treatment() const { return treatment_; }
  const Vector& outcome() const { return outcome_; }
  const std::optional<Vector>& propensity() const { return propensity_; }
  const std::optional<std::vector<int>>& true_optimal() const { return true_optimal_; }
  const std::vector<std::string>& feature_names() const { return feature_names_; }

  /// P(A_i | X_i); a randomized trial without a propensity column is taken as 1/K.
  double prop(int i) const { return propensity_ ? (*propensity_)(i) : 1.0 / K_; }

  TrialDataset with_features(Matrix features) const {
    TrialDataset copy = *this;
    copy.features_ = std::move(features);
    copy.validate();
    return copy;
  }

  TrialDataset subset(const IndexSet& rows) const {
    Matrix f(static_cast<Eigen::Index>(rows.size()), features_.cols());
    std::vector<int> a(rows.size());
    Vector y(static_cast<Eigen::Index>(rows.size()));
    std::optional<Vector> pr;
    std::optional<std::vector<int>> d;
    if (propensity_) pr = Vector(static_cast<Eigen::Index>(rows.size()));
    if (true_optimal_) d = std::vector<int>(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const int i = rows[r];
      f.row(r) = features_.row(i);
      a[r] = treatment_[i];
      y(r) = outcome_(i);
      if (pr) (*pr)(r) = (*propensity_)(i);
      if (d) (*d)[r] = (*true_optimal_)[i];
    }
    return TrialDataset(std::move(f), std::move(a), std::move(y), K_, std::move(pr), std::move(d),
                        feature_names_);
  }

 private:
  void validate() const {
    if (K_ < 2) throw DomainError("K must be at least 2");
    const auto n = static_cast<Eigen::Index>(treatment_.size());
    if (features_.rows() != n || outcome_.size() != n)
      throw DomainError("feature/treatment/outcome lengths disagree");
    if (static_cast<int>(feature_names_.size()) != features_.cols())
      throw DomainError("feature name count does not match column count");
    for (int a : treatment_)
      if (a < 1 || a > K_)
        throw DomainError("treatment " + std::to_string(a) + " outside 1.." + std::to_string(K_));
    if (!features_.allFinite()) throw DomainError("features contain non-finite values");
    if (!outcome_.allFinite()) throw DomainError("outcome contains non-finite values");
    if (propensity_) {
      if (propensity_->size() != n) throw DomainError("propensity length mismatch");
      for (Eigen::Index i = 0; i < n; ++i)
        if (!((*propensity_)(i) > 0.0 && (*propensity_)(i) <= 1.0))
          throw DomainError("propensity must lie in (0,1]");
    }
    if (true_optimal_) {
      if (static_cast<Eigen::Index>(true_optimal_->size()) != n)
        throw DomainError("true_optimal length mismatch");
      for (int d : *true_optimal_)
        if (d < 1 || d > K_) throw DomainError("true_optimal label outside 1..K");
    }
  }

  Matrix features_;
  std::vector<int> treatment_;
  Vector outcome_;
  std::optional<Vector> propensity_;
  std::optional<std::vector<int>> true_optimal_;
  int K_ = 2;
  std::vector<std::string> feature_names_;
};

/// Column mapping for load_csv. Features default to every column not claimed
/// by another role.
struct CsvSchema {
  std::string treatment = "a";
  std::string outcome = "y";
  std::string propensity = "prop";
  std::string true_optimal = "d_star";
  std::vector<std::string> features;
  std::optional<int> K;
  // Utility outcome U = benefit - tradeoff * risk replaces the outcome column.
  std::optional<std::string> benefit;
  std::optional<std::string> risk;
  double tradeoff = 0.0;
  // Relabel arms k -> K+1-k so that the reference arm becomes 1.
  bool reverse_arms = false;
};

inline double compute_utility(double benefit, double risk, double tradeoff) {
  return benefit - tradeoff * risk;
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  for (auto& s : out) {
    auto b = s.find_first_not_of(" \t");
    auto e = s.find_last_not_of(" \t");
    s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  }
  return out;
}

}  // namespace detail

inline TrialDataset read_csv(std::istream& in, const CsvSchema& schema = {}) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError("empty file: header row missing", 1);
  ++line_no;
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line = line.substr(3);
  const auto header = detail::split_csv_line(line);
  std::unordered_map<std::string, int> col;
  for (int c = 0; c < static_cast<int>(header.size()); ++c) {
    if (header[c].empty()) throw ParseError("empty column name in header", 1);
    if (!col.emplace(header[c], c).second) throw ParseError("duplicate column '" + header[c] + "'", 1);
  }
  auto find = [&](const std::string& name) -> int {
    auto it = col.find(name);
    return it == col.end() ? -1 : it->second;
  };
  const bool utility = schema.benefit.has_value() || schema.risk.has_value();
  if (utility && !(schema.benefit && schema.risk))
    throw DomainError("utility outcome needs both benefit and risk columns");
  const int a_col = find(schema.treatment);
  if (a_col < 0) throw ParseError("missing treatment column '" + schema.treatment + "'", 1);
  int y_col = -1, g_col = -1, r_col = -1;
  if (utility) {
    g_col = find(*schema.benefit);
    r_col = find(*schema.risk);
    if (g_col < 0 || r_col < 0) throw ParseError("missing benefit/risk column", 1);
  } else {
    y_col = find(schema.outcome);
    if (y_col < 0) throw ParseError("missing outcome column '" + schema.outcome + "'", 1);
  }
  const int p_col = find(schema.propensity);
  const int d_col = find(schema.true_optimal);

  std::vector<int> f_cols;
  std::vector<std::string> names;
  if (!schema.features.empty()) {
    for (const auto& f : schema.features) {
      const int c = find(f);
      if (c < 0) throw ParseError("missing feature column '" + f + "'", 1);
      f_cols.push_back(c);
      names.push_back(f);
    }
  } else {
    // Outcome-like columns never become features, even when unused.
    const std::vector<int> reserved = {a_col, y_col, p_col, d_col, g_col, r_col, find(schema.outcome)};
    for (int c = 0; c < static_cast<int>(header.size()); ++c) {
      if (std::find(reserved.begin(), reserved.end(), c) != reserved.end()) continue;
      f_cols.push_back(c);
      names.push_back(header[c]);
    }
  }

  std::vector<std::vector<double>> rows;
  std::vector<int> a;
  std::vector<double> y, pr;
  std::vector<int> d;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != header.size())
      throw ParseError("expected " + std::to_string(header.size()) + " fields, found " +
                           std::to_string(cells.size()),
                       line_no);
    for (const auto& cell : cells)
      if (cell.empty()) throw ParseError("missing field", line_no);
    auto num = [&](int c) {
      double v;
      if (!parse_double(cells[c], v) || !std::isfinite(v))
        throw ParseError("non-numeric value '" + cells[c] + "' in column '" + header[c] + "'", line_no);
      return v;
    };
    auto integer = [&](int c) {
      const double v = num(c);
      if (v != std::floor(v)) throw ParseError("non-integer label in column '" + header[c] + "'", line_no);
      return static_cast<int>(v);
    };
    std::vector<double> row;
    row.reserve(f_cols.size());
    for (int c : f_cols) row.push_back(num(c));
    rows.push_back(std::move(row));
    a.push_back(integer(a_col));
    y.push_back(utility ? compute_utility(num(g_col), num(r_col), schema.tradeoff) : num(y_col));
    if (p_col >= 0) pr.push_back(num(p_col));
    if (d_col >= 0) d.push_back(integer(d_col));
  }

  int K = schema.K.value_or(0);
  if (!schema.K)
    for (int v : a) K = std::max(K, v);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] < 1 || a[i] > K)
      throw DomainError("treatment " + std::to_string(a[i]) + " outside 1.." + std::to_string(K) +
                        " (data row " + std::to_string(i + 1) + ")");
  }
  if (schema.reverse_arms) {
    for (int& v : a) v = K + 1 - v;
    for (int& v : d) v = K + 1 - v;
  }

  const auto n = static_cast<Eigen::Index>(rows.size());
  Matrix X(n, static_cast<Eigen::Index>(f_cols.size()));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < X.cols(); ++j) X(i, j) = rows[i][j];
  std::optional<Vector> prop;
  if (p_col >= 0) prop = Eigen::Map<Vector>(pr.data(), n);
  std::optional<std::vector<int>> dstar;
  if (d_col >= 0) dstar = std::move(d);
  return TrialDataset(std::move(X), std::move(a), Eigen::Map<Vector>(y.data(), n), K, std::move(prop),
                      std::move(dstar), std::move(names));
}

/// Covariates only, for scoring new subjects: every column except the
/// treatment/outcome/propensity/d_star/benefit/risk ones, or schema.features
/// when given. Missing role columns are fine here.
struct FeatureTable {
  Matrix X;
  std::vector<std::string> names;
};

inline FeatureTable read_feature_csv(std::istream& in, const CsvSchema& schema = {}) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw ParseError("empty file: header row missing", 1);
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line = line.substr(3);
  const auto header = detail::split_csv_line(line);
  FeatureTable t;
  std::vector<int> cols;
  if (!schema.features.empty()) {
    for (const auto& f : schema.features) {
      const auto it = std::find(header.begin(), header.end(), f);
      if (it == header.end()) throw ParseError("missing feature column '" + f + "'", 1);
      cols.push_back(static_cast<int>(it - header.begin()));
      t.names.push_back(f);
    }
  } else {
    std::vector<std::string> reserved = {schema.treatment, schema.outcome, schema.propensity, schema.true_optimal};
    if (schema.benefit) reserved.push_back(*schema.benefit);
    if (schema.risk) reserved.push_back(*schema.risk);
    for (int c = 0; c < static_cast<int>(header.size()); ++c) {
      if (std::find(reserved.begin(), reserved.end(), header[c]) != reserved.end()) continue;
      cols.push_back(c);
      t.names.push_back(header[c]);
    }
  }
  std::vector<double> values;
  Eigen::Index n = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != header.size())
      throw ParseError("expected " + std::to_string(header.size()) + " fields, found " + std::to_string(cells.size()),
                       line_no);
    for (int c : cols) {
      double v;
      if (!parse_double(cells[c], v) || !std::isfinite(v))
        throw ParseError("non-numeric value '" + cells[c] + "' in column '" + header[c] + "'", line_no);
      values.push_back(v);
    }
    ++n;
  }
  const auto p = static_cast<Eigen::Index>(cols.size());
  t.X = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(values.data(), n, p);
  return t;
}

inline TrialDataset load_csv(const std::string& path, const CsvSchema& schema = {}) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'", 0);
  return read_csv(in, schema);
}

/// Writes `x1,...,xp,a,y[,prop][,d_star]` using the dataset's feature names.
inline void write_csv(std::ostream& out, const TrialDataset& data) {
  for (const auto& name : data.feature_names()) out << name << ',';
  out << "a,y";
  if (data.propensity()) out << ",prop";
  if (data.true_optimal()) out << ",d_star";
  out << '\n';
  for (int i = 0; i < data.n(); ++i) {
    for (int j = 0; j < data.p(); ++j) out << format_double(data.features()(i, j)) << ',';
    out << data.treatment()[i] << ',' << format_double(data.outcome()(i));
    if (data.propensity()) out << ',' << format_double((*data.propensity())(i));
    if (data.true_optimal()) out << ',' << (*data.true_optimal())[i];
    out << '\n';
  }
}

inline void save_csv(const std::string& path, const TrialDataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write '" + path + "'", 0);
  write_csv(out, data);
}

/// Per-feature training range; maps [min,max] onto [-1,1].
struct ScalingParams {
  std::vector<std::string> names;
  std::vector<double> min;
  std::vector<double> max;

  int p() const { return static_cast<int>(min.size()); }
  bool degenerate(int j) const { return !(max[j] > min[j]); }

  friend bool operator==(const ScalingParams&, const ScalingParams&) = default;
};

inline ScalingParams fit_scaling(const Matrix& X, std::vector<std::string> names = {}) {
  if (X.rows() == 0) throw DomainError("cannot fit scaling on an empty dataset");
  ScalingParams s;
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    s.min.push_back(X.col(j).minCoeff());
    s.max.push_back(X.col(j).maxCoeff());
    s.names.push_back(j < static_cast<Eigen::Index>(names.size()) ? names[j]
                                                                  : "x" + std::to_string(j + 1));
  }
  return s;
}

inline ScalingParams fit_scaling(const TrialDataset& data) {
  if (data.n() < 2) throw DomainError("scaling needs at least two subjects");
  return fit_scaling(data.features(), data.feature_names());
}

/// Test values outside the training range are not clipped; degenerate features map to 0.
inline Matrix apply_scaling(const ScalingParams& s, const Matrix& X) {
  if (X.cols() != s.p())
    throw DomainError("scaling expects " + std::to_string(s.p()) + " columns, got " +
                      std::to_string(X.cols()));
  Matrix out(X.rows(), X.cols());
  for (int j = 0; j < s.p(); ++j) {
    if (s.degenerate(j)) {
      out.col(j).setZero();
    } else {
      const double span = s.max[j] - s.min[j];
      out.col(j) = ((X.col(j).array() - s.min[j]) * (2.0 / span) - 1.0).matrix();
    }
  }
  return out;
}

inline Vector apply_scaling(const ScalingParams& s, const Vector& x) {
  Matrix row = x.transpose();
  return apply_scaling(s, row).row(0).transpose();
}

inline void write_scaling(std::ostream& out, const ScalingParams& s) {
  out << "feature,min,max\n";
  for (int j = 0; j < s.p(); ++j)
    out << s.names[j] << ',' << format_double(s.min[j]) << ',' << format_double(s.max[j]) << '\n';
}

inline ScalingParams read_scaling(std::istream& in) {
  ScalingParams s;
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError("scaling file is empty", 1);
  ++line_no;
  if (detail::split_csv_line(line) != std::vector<std::string>{"feature", "min", "max"})
    throw ParseError("scaling header must be 'feature,min,max'", 1);
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = detail::split_csv_line(line);
    double lo, hi;
    if (cells.size() != 3 || !parse_double(cells[1], lo) || !parse_double(cells[2], hi))
      throw ParseError("malformed scaling row", line_no);
    if (hi < lo) throw ParseError("scaling max below min", line_no);
    s.names.push_back(cells[0]);
    s.min.push_back(lo);
    s.max.push_back(hi);
  }
  return s;
}

}  // namespace srlearn
