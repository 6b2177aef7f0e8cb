#pragma once

#include <Eigen/Core>

#include <climits>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "srlearn/aol.hpp"
#include "srlearn/data.hpp"
#include "srlearn/error.hpp"
#include "srlearn/eval/cv_tune.hpp"
#include "srlearn/kernels.hpp"
#include "srlearn/parallel.hpp"
#include "srlearn/solvers/ols.hpp"
#include "srlearn/varselect.hpp"

namespace srlearn {

enum class Penalty { L2, L1Linear };
enum class Selection { None, EmbeddedL1, TwoStage };
enum class ResidualKind { Ols, KernelRidge };

inline std::string to_string(Penalty p) { return p == Penalty::L2 ? "l2" : "l1"; }
inline std::string to_string(Selection s) {
  return s == Selection::None ? "none" : s == Selection::EmbeddedL1 ? "embedded" : "two-stage";
}
inline std::string to_string(PropensityMode m) { return m == PropensityMode::Known ? "known" : "logistic"; }
inline std::string to_string(ResidualKind r) { return r == ResidualKind::Ols ? "ols" : "kernel-ridge"; }
inline std::string to_string(CvCriterion c) { return c == CvCriterion::Value ? "value" : "weighted-misclass"; }

/*
 * lambda_grid is absolute for L2 fits and a multiple of each step's
 * l1_lambda_max for L1 fits. Gaussian bandwidths are sigma_grid when given,
 * else sigma_multipliers times the median pairwise distance of the step's
 * (selected, scaled) covariates.
 */
struct SRConfig {
  KernelKind kernel = KernelKind::Linear;
  Penalty penalty = Penalty::L2;
  Selection selection = Selection::None;
  std::vector<double> lambda_grid;
  std::vector<double> sigma_grid;
  std::vector<double> sigma_multipliers{0.5, 1.0, 2.0};
  int cv_folds = 5;
  int min_step_size = 10;
  std::uint64_t seed = 0;
  PropensityMode propensity = PropensityMode::Known;
  ResidualKind residual = ResidualKind::Ols;
  CvCriterion criterion = CvCriterion::Value;
  ScreenOptions screen;
  DualOptions dual;

  static std::vector<double> default_l2_lambdas() { return {1e-3, 4e-3, 1.6e-2, 6.4e-2, 0.256}; }
  static std::vector<double> default_l1_fractions() { return {0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5}; }

  std::vector<double> lambdas() const {
    if (!lambda_grid.empty()) return lambda_grid;
    return penalty == Penalty::L2 ? default_l2_lambdas() : default_l1_fractions();
  }

  void validate() const {
    if (cv_folds < 2) throw DomainError("cv_folds must be at least 2");
    if (min_step_size < 1) throw DomainError("min_step_size must be positive");
    for (double l : lambdas())
      if (!(l > 0.0) || !std::isfinite(l)) throw DomainError("lambda grid values must be positive");
    for (double s : sigma_grid)
      if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("sigma grid values must be positive");
    if (kernel == KernelKind::Gaussian && sigma_grid.empty() && sigma_multipliers.empty())
      throw DomainError("Gaussian kernel needs a sigma grid");
    if (penalty == Penalty::L1Linear && kernel != KernelKind::Linear)
      throw DomainError("the L1 penalty fits linear rules only");
    if (selection == Selection::EmbeddedL1 && penalty != Penalty::L1Linear)
      throw DomainError("embedded selection requires the L1 linear penalty");
    if (selection == Selection::TwoStage && penalty != Penalty::L2)
      throw DomainError("two-stage selection refits with the L2 penalty");
  }
};

/// Diagnostics for one fitted step (not serialized with the model).
struct StepReport {
  std::string id;
  int eligible = 0;
  std::optional<CVResult> cv;
  std::vector<std::string> screened_terms;
  std::string constant_reason;
};

struct SRModel {
  int K = 0;
  int p = 0;
  std::vector<BinaryRule> sequential;    // K-1 rules; -1 means "arm k"
  std::vector<BinaryRule> reestimation;  // K-2 rules; -1 means arm k, +1 arm k+1
  ScalingParams scaling;
  SRConfig config;
  std::vector<StepReport> reports;
};

/// s_decisions[j][i] is the +-1 decision of S_{j+1} for subject i (-1: arm j+1).
using StepDecisions = std::vector<std::vector<int>>;

/// Subjects eligible for S_k (k is 1-based): observed arm not in 1..k-1 and
/// no earlier S_j assigned arm j.
inline IndexSet eligibility_sequential(const TrialDataset& data, int k, const StepDecisions& prior) {
  if (k < 1) throw DomainError("eligibility_sequential: k must be >= 1");
  if (static_cast<int>(prior.size()) < k - 1) throw DomainError("eligibility_sequential: missing earlier decisions");
  IndexSet out;
  for (int i = 0; i < data.n(); ++i) {
    if (data.treatment()[static_cast<std::size_t>(i)] < k) continue;
    bool keep = true;
    for (int j = 0; j < k - 1 && keep; ++j) keep = prior[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] != -1;
    if (keep) out.push_back(i);
  }
  return out;
}

/// Subjects eligible for R_k: observed arm in {k, k+1} and S_k assigned arm k.
inline IndexSet eligibility_reestimation(const TrialDataset& data, int k, const std::vector<int>& sk) {
  if (static_cast<int>(sk.size()) != data.n()) throw DomainError("eligibility_reestimation: decision count mismatch");
  IndexSet out;
  for (int i = 0; i < data.n(); ++i) {
    const int a = data.treatment()[static_cast<std::size_t>(i)];
    if ((a == k || a == k + 1) && sk[static_cast<std::size_t>(i)] == -1) out.push_back(i);
  }
  return out;
}

namespace detail {

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline ResidualModel fit_residual(const Matrix& X, const Vector& y, ResidualKind kind, std::uint64_t seed) {
  if (y.size() == 0) return LinearModel{0.0, Vector::Zero(X.cols())};
  if (kind == ResidualKind::KernelRidge && X.rows() >= 2) {
    try {
      return kernel_ridge_fit(X, y, KernelSpec::gaussian(median_bandwidth(X, seed)));
    } catch (const DomainError&) {
      // identical rows: fall through to least squares
    }
  }
  return ols_fit(X, y);
}

class StepFitter {
 public:
  StepFitter(const TrialDataset& scaled, const SRConfig& cfg, const ParallelFor& pf) : d_(scaled), cfg_(cfg), pf_(pf) {}

  BinaryRule fit(const std::string& id, const std::vector<int>& neg, const std::vector<int>& pos,
                 const IndexSet& eligible, const IndexSet& parent, std::uint64_t salt, StepReport& rep) const {
    rep.id = id;
    rep.eligible = static_cast<int>(eligible.size());
    const std::uint64_t seed = mix_seed(cfg_.seed, salt);
    Matrix Xe(static_cast<Eigen::Index>(eligible.size()), d_.p());
    Vector ye(static_cast<Eigen::Index>(eligible.size()));
    for (std::size_t r = 0; r < eligible.size(); ++r) {
      Xe.row(static_cast<Eigen::Index>(r)) = d_.features().row(eligible[r]);
      ye(static_cast<Eigen::Index>(r)) = d_.outcome()(eligible[r]);
    }
    BinarySubproblem sub;
    try {
      SubproblemOptions so;
      so.propensity = cfg_.propensity;
      so.min_size = cfg_.min_step_size;
      sub = build_subproblem(d_, neg, pos, eligible, fit_residual(Xe, ye, cfg_.residual, seed), so, id);
      const auto rows = positive_weight_rows(sub.weights);
      if (static_cast<int>(rows.size()) < cfg_.min_step_size) throw DegenerateStep(id + ": too few weighted subjects");
      require_both_labels(sub.labels, rows);
    } catch (const DegenerateStep& e) {
      return constant_for(neg, pos, eligible, parent, e.what(), rep);
    }
    try {
      return tune_and_fit(sub, seed, rep);
    } catch (const DegenerateStep& e) {
      return constant_for(neg, pos, eligible, parent, e.what(), rep);
    }
  }

 private:
  BinaryRule tune_and_fit(const BinarySubproblem& sub, std::uint64_t seed, StepReport& rep) const {
    CvOptions co;
    co.folds = cfg_.cv_folds;
    co.seed = seed;
    co.kernel = cfg_.kernel;
    co.criterion = cfg_.criterion;
    co.dual = cfg_.dual;
    co.screen = cfg_.screen;
    co.parallel = pf_;
    co.fitter = cfg_.penalty == Penalty::L1Linear ? Fitter::L1Linear : Fitter::L2;

    bool fallback = false;
    if (cfg_.selection == Selection::TwoStage) {
      // Screen once on the whole step; folds reuse the selection.
      co.fitter = Fitter::TwoStage;
      if (sub.m() >= 20) {
        const ScreenResult s = screen_subproblem(sub, cfg_.screen);
        for (const auto& mono : s.selected_monomials) rep.screened_terms.push_back(mono.name(d_.feature_names()));
        co.selected = s.selected_covariates;
      }
      if (co.selected.empty()) {
        fallback = true;
        co.selected = all_features(sub.p());
      }
    }
    const std::vector<int> used = co.selected.empty() ? all_features(sub.p()) : co.selected;

    std::vector<GridPoint> grid;
    const auto lambdas = cfg_.lambdas();
    if (cfg_.penalty == Penalty::L1Linear) {
      const double lmax = l1_lambda_max(sub.features, sub.weights);
      for (double f : lambdas) grid.push_back({f * (lmax > 0.0 ? lmax : 1.0), 0.0});
    } else if (cfg_.kernel == KernelKind::Linear) {
      for (double l : lambdas) grid.push_back({l, 0.0});
    } else {
      std::vector<double> sigmas = cfg_.sigma_grid;
      if (sigmas.empty()) {
        const double med = median_bandwidth(detail::take(sub.features, all_rows(sub.m()), used), seed);
        for (double f : cfg_.sigma_multipliers) sigmas.push_back(f * med);
      }
      for (double s : sigmas)
        for (double l : lambdas) grid.push_back({l, s});
    }
    CVResult cv = cv_tune(sub, grid, co);

    BinaryRule rule;
    if (cfg_.penalty == Penalty::L1Linear) {
      rule = fit_aol_l1_linear(sub, cv.best.lambda);
    } else {
      L2FitOptions lo;
      lo.dual = cfg_.dual;
      lo.selected = co.selected;
      const KernelSpec k =
          cfg_.kernel == KernelKind::Linear ? KernelSpec::linear() : KernelSpec::gaussian(cv.best.sigma);
      rule = fit_aol_l2(sub, k, cv.best.lambda, lo);
      rule.selection_fallback = fallback;
    }
    rep.cv = std::move(cv);
    return rule;
  }

  static std::vector<int> all_rows(int m) {
    std::vector<int> r(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) r[static_cast<std::size_t>(i)] = i;
    return r;
  }

  // Weighted-majority constant over the eligible subjects, or over the
  // parent population on the compared arms when nobody is eligible.
  BinaryRule constant_for(const std::vector<int>& neg, const std::vector<int>& pos,
                          const IndexSet& eligible, const IndexSet& parent, const std::string& why,
                          StepReport& rep) const {
    IndexSet popn = eligible;
    std::string source = "eligible";
    if (popn.empty()) {
      source = "parent";
      for (int i : parent) {
        const int a = d_.treatment()[static_cast<std::size_t>(i)];
        if (std::find(neg.begin(), neg.end(), a) != neg.end() || std::find(pos.begin(), pos.end(), a) != pos.end())
          popn.push_back(i);
      }
    }
    int side = -1;
    if (!popn.empty()) {
      Matrix X(static_cast<Eigen::Index>(popn.size()), d_.p());
      Vector y(static_cast<Eigen::Index>(popn.size()));
      for (std::size_t r = 0; r < popn.size(); ++r) {
        X.row(static_cast<Eigen::Index>(r)) = d_.features().row(popn[r]);
        y(static_cast<Eigen::Index>(r)) = d_.outcome()(popn[r]);
      }
      const ResidualModel m = popn.size() >= 2 ? ResidualModel(ols_fit(X, y)) : ResidualModel(LinearModel{y(0), Vector::Zero(d_.p())});
      const Vector e = y - residual_predict(m, X);
      const auto pi = arm_probabilities(d_);
      double mneg = 0.0, mpos = 0.0;
      for (int a : neg) mneg += pi[static_cast<std::size_t>(a)];
      for (int a : pos) mpos += pi[static_cast<std::size_t>(a)];
      const double ppos = mpos / (mneg + mpos);
      Vector l(y.size()), w(y.size());
      for (std::size_t r = 0; r < popn.size(); ++r) {
        const bool is_pos = std::find(pos.begin(), pos.end(), d_.treatment()[static_cast<std::size_t>(popn[r])]) != pos.end();
        const double b = is_pos ? 1.0 : -1.0;
        const auto [lab, wt] =
            aol_label_weight(b, e(static_cast<Eigen::Index>(r)), std::max(is_pos ? ppos : 1.0 - ppos, 0.01));
        l(static_cast<Eigen::Index>(r)) = lab;
        w(static_cast<Eigen::Index>(r)) = wt;
      }
      side = weighted_majority_side(l, w);
    } else {
      source = "none";
    }
    rep.constant_reason = std::string(why) + "; constant from " + source + " population";
    return BinaryRule::constant(d_.p(), side, rep.constant_reason);
  }

  const TrialDataset& d_;
  const SRConfig& cfg_;
  const ParallelFor& pf_;
};

}  // namespace detail

/*
 * Trains S_1..S_{K-1} in order (S_k: arm k against arms k+1..K on subjects not
 * yet assigned), then R_1..R_{K-2} (arm k against k+1 on subjects S_k sent to
 * arm k). Covariates are rescaled to [-1, 1] with parameters stored in the
 * model. Steps that cannot support a fit become constant rules.
 */
inline SRModel fit_sr(const TrialDataset& data, const SRConfig& config, const ParallelFor& pf = serial_for) {
  config.validate();
  const int K = data.K();
  if (K < 3) throw DomainError("fit_sr needs at least three arms");
  std::vector<int> seen(static_cast<std::size_t>(K + 1), 0);
  for (int a : data.treatment()) ++seen[static_cast<std::size_t>(a)];
  for (int a = 1; a <= K; ++a)
    if (!seen[static_cast<std::size_t>(a)]) throw DomainError("arm " + std::to_string(a) + " has no subjects");

  SRModel model;
  model.K = K;
  model.p = data.p();
  model.config = config;
  model.scaling = fit_scaling(data);
  const TrialDataset scaled = data.with_features(apply_scaling(model.scaling, data.features()));
  const detail::StepFitter fitter(scaled, config, pf);

  StepDecisions s_dec;
  IndexSet parent;
  for (int i = 0; i < data.n(); ++i) parent.push_back(i);
  for (int k = 1; k <= K - 1; ++k) {
    const IndexSet elig = eligibility_sequential(scaled, k, s_dec);
    std::vector<int> pos;
    for (int a = k + 1; a <= K; ++a) pos.push_back(a);
    StepReport rep;
    model.sequential.push_back(fitter.fit("S" + std::to_string(k), {k}, pos, elig, parent, static_cast<std::uint64_t>(k), rep));
    model.reports.push_back(std::move(rep));
    s_dec.push_back(predict_binary_batch(model.sequential.back(), scaled.features()));
    parent = elig;
  }
  for (int k = 1; k <= K - 2; ++k) {
    const IndexSet elig = eligibility_reestimation(scaled, k, s_dec[static_cast<std::size_t>(k - 1)]);
    // Parent population: S_k's eligible subjects observed on arm k or k+1.
    const IndexSet s_parent = eligibility_sequential(scaled, k, s_dec);
    StepReport rep;
    model.reestimation.push_back(
        fitter.fit("R" + std::to_string(k), {k}, {k + 1}, elig, s_parent, static_cast<std::uint64_t>(100 + k), rep));
    model.reports.push_back(std::move(rep));
  }
  return model;
}

/*
 * Walks the decision tree: the first S_k choosing arm k hands the subject to
 * R_k (or returns k when re-estimation is disabled); if no S_k for k <= K-2
 * stops, S_{K-1} picks between K-1 and K. Inputs are raw covariate rows.
 */
inline std::vector<int> predict_ordinal_batch(const SRModel& model, const Matrix& X_raw, bool use_reestimation = true) {
  if (X_raw.cols() != model.p) throw DomainError("expected " + std::to_string(model.p) + " covariates");
  const Matrix X = apply_scaling(model.scaling, X_raw);
  const int K = model.K;
  std::vector<std::vector<int>> s(static_cast<std::size_t>(K - 1)), r(static_cast<std::size_t>(K - 2));
  for (int k = 0; k < K - 1; ++k) s[static_cast<std::size_t>(k)] = predict_binary_batch(model.sequential[static_cast<std::size_t>(k)], X);
  if (use_reestimation)
    for (int k = 0; k < K - 2; ++k) r[static_cast<std::size_t>(k)] = predict_binary_batch(model.reestimation[static_cast<std::size_t>(k)], X);
  std::vector<int> out(static_cast<std::size_t>(X.rows()));
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const auto ui = static_cast<std::size_t>(i);
    int d = 0;
    for (int k = 1; k <= K - 2 && d == 0; ++k) {
      if (s[static_cast<std::size_t>(k - 1)][ui] != -1) continue;
      d = use_reestimation ? (r[static_cast<std::size_t>(k - 1)][ui] < 0 ? k : k + 1) : k;
    }
    if (d == 0) d = s[static_cast<std::size_t>(K - 2)][ui] < 0 ? K - 1 : K;
    out[ui] = d;
  }
  return out;
}

inline int predict_ordinal(const SRModel& model, const Eigen::Ref<const Vector>& x, bool use_reestimation = true) {
  Matrix row = x.transpose();
  return predict_ordinal_batch(model, row, use_reestimation)[0];
}

// ---------------------------------------------------------------------------
// Text serialization

namespace detail {

inline std::string kind_name(BinaryRule::Kind k) {
  switch (k) {
    case BinaryRule::Kind::SparseLinear: return "linear";
    case BinaryRule::Kind::KernelExpansion: return "kernel";
    case BinaryRule::Kind::Constant: return "constant";
  }
  return "?";
}

inline std::string join_doubles(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + format_double(v[i]);
  return s;
}

inline void write_rule(std::ostream& out, const std::string& id, const BinaryRule& r) {
  out << "rule " << id << '\n';
  out << "kind " << kind_name(r.kind) << '\n';
  out << "selected";
  for (int j : r.selected_features) out << ' ' << j + 1;
  out << '\n';
  switch (r.kind) {
    case BinaryRule::Kind::Constant:
      out << "side " << r.constant_side << '\n';
      out << "reason " << r.reason << '\n';
      break;
    case BinaryRule::Kind::SparseLinear:
      out << "intercept " << format_double(r.intercept) << '\n';
      out << "slopes";
      for (Eigen::Index j = 0; j < r.slopes.size(); ++j) out << ' ' << format_double(r.slopes(j));
      out << '\n';
      break;
    case BinaryRule::Kind::KernelExpansion:
      out << "intercept " << format_double(r.intercept) << '\n';
      out << "kernel " << to_string(r.kernel.kind) << ' ' << format_double(r.kernel.sigma) << '\n';
      out << "support " << r.support.rows() << '\n';
      for (Eigen::Index s = 0; s < r.support.rows(); ++s) {
        out << format_double(r.coefficients(s));
        for (Eigen::Index j = 0; j < r.support.cols(); ++j) out << ' ' << format_double(r.support(s, j));
        out << '\n';
      }
      break;
  }
  out << "fallback " << (r.selection_fallback ? 1 : 0) << '\n';
  out << "end\n";
}

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  std::string next(const char* what) {
    std::string line;
    if (!std::getline(in_, line)) throw ParseError(std::string("model file truncated, expected ") + what, line_ + 1);
    ++line_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  }
  // Reads "key rest" and returns rest.
  std::string keyed(const std::string& key) {
    const std::string line = next(key.c_str());
    if (line == key) return {};
    if (line.rfind(key + ' ', 0) != 0) fail("expected '" + key + "'");
    return line.substr(key.size() + 1);
  }
  double number(const std::string& tok) {
    double v;
    if (!parse_double(tok, v)) fail("bad number '" + tok + "'");
    return v;
  }
  int integer(const std::string& tok) {
    long long v;
    if (!parse_int(tok, v) || v < INT_MIN || v > INT_MAX) fail("bad integer '" + tok + "'");
    return static_cast<int>(v);
  }
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError("model file: " + msg, line_); }

  static std::vector<std::string> tokens(const std::string& s) {
    std::istringstream ss(s);
    std::vector<std::string> out;
    for (std::string t; ss >> t;) out.push_back(t);
    return out;
  }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
};

inline BinaryRule read_rule(LineReader& rd, const std::string& id, int p) {
  if (rd.keyed("rule") != id) rd.fail("expected rule " + id);
  BinaryRule r;
  r.p = p;
  const std::string kind = rd.keyed("kind");
  for (const auto& t : LineReader::tokens(rd.keyed("selected"))) {
    const int j = rd.integer(t);
    if (j < 1 || j > p) rd.fail("selected feature out of range");
    r.selected_features.push_back(j - 1);
  }
  if (kind == "constant") {
    r.kind = BinaryRule::Kind::Constant;
    r.constant_side = rd.integer(rd.keyed("side")) > 0 ? 1 : -1;
    r.reason = rd.keyed("reason");
  } else if (kind == "linear") {
    r.kind = BinaryRule::Kind::SparseLinear;
    r.intercept = rd.number(rd.keyed("intercept"));
    const auto t = LineReader::tokens(rd.keyed("slopes"));
    if (static_cast<int>(t.size()) != p) rd.fail("slope count must equal p");
    r.slopes.resize(p);
    for (int j = 0; j < p; ++j) r.slopes(j) = rd.number(t[static_cast<std::size_t>(j)]);
  } else if (kind == "kernel") {
    r.kind = BinaryRule::Kind::KernelExpansion;
    r.intercept = rd.number(rd.keyed("intercept"));
    const auto kt = LineReader::tokens(rd.keyed("kernel"));
    if (kt.size() != 2) rd.fail("kernel line needs kind and sigma");
    if (kt[0] == "gaussian") r.kernel = KernelSpec::gaussian(rd.number(kt[1]));
    else if (kt[0] == "linear") r.kernel = KernelSpec::linear();
    else rd.fail("unknown kernel '" + kt[0] + "'");
    const int ns = rd.integer(rd.keyed("support"));
    if (ns < 0) rd.fail("negative support count");
    const auto q = static_cast<Eigen::Index>(r.selected_features.size());
    r.support.resize(ns, q);
    r.coefficients.resize(ns);
    for (int s = 0; s < ns; ++s) {
      const auto t = LineReader::tokens(rd.next("support row"));
      if (static_cast<Eigen::Index>(t.size()) != q + 1) rd.fail("support row has wrong length");
      r.coefficients(s) = rd.number(t[0]);
      for (Eigen::Index j = 0; j < q; ++j) r.support(s, j) = rd.number(t[static_cast<std::size_t>(j + 1)]);
    }
  } else {
    rd.fail("unknown rule kind '" + kind + "'");
  }
  r.selection_fallback = rd.integer(rd.keyed("fallback")) != 0;
  if (rd.next("end") != "end") rd.fail("expected 'end'");
  return r;
}

}  // namespace detail

inline constexpr const char* kModelHeader = "srlearn-model v1";

inline void write_model(std::ostream& out, const SRModel& m) {
  const SRConfig& c = m.config;
  out << kModelHeader << '\n';
  out << "K " << m.K << '\n';
  out << "p " << m.p << '\n';
  out << "config kernel=" << to_string(c.kernel) << " penalty=" << to_string(c.penalty)
      << " selection=" << to_string(c.selection) << " folds=" << c.cv_folds << " min_step=" << c.min_step_size
      << " seed=" << c.seed << " propensity=" << to_string(c.propensity) << " residual=" << to_string(c.residual)
      << " criterion=" << to_string(c.criterion) << '\n';
  out << "lambda_grid " << detail::join_doubles(c.lambdas()) << '\n';
  out << "sigma_grid " << detail::join_doubles(c.sigma_grid) << '\n';
  out << "sigma_multipliers " << detail::join_doubles(c.sigma_multipliers) << '\n';
  out << "scaling " << m.scaling.p() << '\n';
  write_scaling(out, m.scaling);
  for (std::size_t k = 0; k < m.sequential.size(); ++k) detail::write_rule(out, "S" + std::to_string(k + 1), m.sequential[k]);
  for (std::size_t k = 0; k < m.reestimation.size(); ++k)
    detail::write_rule(out, "R" + std::to_string(k + 1), m.reestimation[k]);
}

inline SRModel read_model(std::istream& in) {
  detail::LineReader rd(in);
  if (rd.next("header") != kModelHeader) rd.fail(std::string("header must be '") + kModelHeader + "'");
  SRModel m;
  m.K = rd.integer(rd.keyed("K"));
  m.p = rd.integer(rd.keyed("p"));
  if (m.K < 3 || m.p < 1) rd.fail("K must be >= 3 and p >= 1");
  for (const auto& kv : detail::LineReader::tokens(rd.keyed("config"))) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) rd.fail("config entries are key=value");
    const std::string k = kv.substr(0, eq), v = kv.substr(eq + 1);
    SRConfig& c = m.config;
    if (k == "kernel") c.kernel = v == "gaussian" ? KernelKind::Gaussian : KernelKind::Linear;
    else if (k == "penalty") c.penalty = v == "l1" ? Penalty::L1Linear : Penalty::L2;
    else if (k == "selection") c.selection = v == "embedded" ? Selection::EmbeddedL1 : v == "two-stage" ? Selection::TwoStage : Selection::None;
    else if (k == "folds") c.cv_folds = rd.integer(v);
    else if (k == "min_step") c.min_step_size = rd.integer(v);
    else if (k == "seed") c.seed = std::stoull(v);
    else if (k == "propensity") c.propensity = v == "logistic" ? PropensityMode::Logistic : PropensityMode::Known;
    else if (k == "residual") c.residual = v == "kernel-ridge" ? ResidualKind::KernelRidge : ResidualKind::Ols;
    else if (k == "criterion") c.criterion = v == "value" ? CvCriterion::Value : CvCriterion::WeightedMisclassification;
  }
  auto doubles = [&](const std::string& key) {
    std::vector<double> v;
    for (const auto& t : detail::LineReader::tokens(rd.keyed(key))) v.push_back(rd.number(t));
    return v;
  };
  m.config.lambda_grid = doubles("lambda_grid");
  m.config.sigma_grid = doubles("sigma_grid");
  m.config.sigma_multipliers = doubles("sigma_multipliers");
  const int sp = rd.integer(rd.keyed("scaling"));
  if (sp != m.p) rd.fail("scaling block size must equal p");
  std::string block = rd.next("scaling header") + "\n";
  for (int j = 0; j < sp; ++j) block += rd.next("scaling row") + "\n";
  std::istringstream bs(block);
  m.scaling = read_scaling(bs);
  for (int k = 1; k <= m.K - 1; ++k) m.sequential.push_back(detail::read_rule(rd, "S" + std::to_string(k), m.p));
  for (int k = 1; k <= m.K - 2; ++k) m.reestimation.push_back(detail::read_rule(rd, "R" + std::to_string(k), m.p));
  return m;
}

inline void save_model(const std::string& path, const SRModel& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write '" + path + "'", 0);
  write_model(out, m);
}

inline SRModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'", 0);
  return read_model(in);
}

}  // namespace srlearn
