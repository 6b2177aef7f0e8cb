#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "srlearn/data.hpp"
#include "srlearn/error.hpp"
#include "srlearn/eval/metrics.hpp"
#include "srlearn/parallel.hpp"
#include "srlearn/simgen.hpp"
#include "srlearn/sr.hpp"

namespace srlearn {

/// One benchmark column. Oracle rows predict d_star directly.
struct MethodSpec {
  std::string name;
  bool oracle = false;
  SRConfig config;
};

inline std::vector<std::string> method_names() {
  return {"oracle", "sr-linear", "sr-gaussian", "sr-l1", "sr-linear-select", "sr-gaussian-select"};
}

/// Named method on top of `base` (grids, folds, criterion...); the name fixes
/// kernel, penalty and selection.
inline MethodSpec make_method(const std::string& name, const SRConfig& base = {}) {
  MethodSpec m;
  m.name = name;
  m.config = base;
  SRConfig& c = m.config;
  if (name == "oracle") {
    m.oracle = true;
  } else if (name == "sr-linear") {
    c.kernel = KernelKind::Linear, c.penalty = Penalty::L2, c.selection = Selection::None;
  } else if (name == "sr-gaussian") {
    c.kernel = KernelKind::Gaussian, c.penalty = Penalty::L2, c.selection = Selection::None;
  } else if (name == "sr-l1") {
    c.kernel = KernelKind::Linear, c.penalty = Penalty::L1Linear, c.selection = Selection::EmbeddedL1;
  } else if (name == "sr-linear-select") {
    c.kernel = KernelKind::Linear, c.penalty = Penalty::L2, c.selection = Selection::TwoStage;
  } else if (name == "sr-gaussian-select") {
    c.kernel = KernelKind::Gaussian, c.penalty = Penalty::L2, c.selection = Selection::TwoStage;
  } else {
    throw DomainError("unknown method '" + name + "'");
  }
  return m;
}

struct BenchmarkOptions {
  std::vector<SettingSpec> settings;
  std::vector<int> n_train{400, 800};
  int replicates = 20;
  std::vector<MethodSpec> methods;
  std::uint64_t seed = 0;
  int n_test = 10000;
  bool ablation = false;  // also report every SR method with R-steps switched off
};

struct BenchmarkRecord {
  std::string setting;
  int n = 0;
  std::string method;
  int replicate = 0;
  int K = 0;
  std::optional<double> misclass;
  std::optional<double> disagreement;
  std::optional<double> value;
  std::optional<double> itr_effect;
  std::vector<double> proportions;
  std::uint64_t seed = 0;
  std::string error;  // non-empty when the replicate failed
};

inline std::string ablation_name(const std::string& method) { return method + "-noR"; }

namespace detail {

inline std::uint64_t text_hash(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) h = (h ^ c) * 1099511628211ULL;
  return h;
}

inline void fill_metrics(BenchmarkRecord& r, const std::vector<int>& pred, const TrialDataset& test) {
  const EvaluationReport rep = evaluate(pred, test);
  r.misclass = rep.misclassification;
  r.disagreement = rep.disagreement;
  r.value = rep.value;
  r.itr_effect = rep.itr_effect;
  r.proportions = rep.assignment_proportions;
}

inline std::string cell(const std::optional<double>& v) { return v ? format_double(*v) : "NA"; }

struct MeanSd {
  double mean = 0.0, sd = 0.0;
  int count = 0;
};

inline MeanSd mean_sd(const std::vector<double>& v) {
  MeanSd s;
  s.count = static_cast<int>(v.size());
  if (v.empty()) return s;
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return s;
}

}  // namespace detail

/// Training seed for one (setting, n, replicate); every method sees the same draw.
inline std::uint64_t train_seed(std::uint64_t seed, const std::string& setting, int n, int replicate) {
  return detail::mix_seed(seed ^ detail::text_hash(setting), static_cast<std::uint64_t>(n) * 1000003ULL + static_cast<std::uint64_t>(replicate));
}

inline std::uint64_t test_seed(std::uint64_t seed, const std::string& setting) {
  return detail::mix_seed(seed ^ detail::text_hash(setting), 0x7e57ULL);
}

/// Method names in output order, with ablation columns right after their parent.
inline std::vector<std::string> method_columns(const BenchmarkOptions& opt) {
  std::vector<std::string> out;
  for (const auto& m : opt.methods) {
    out.push_back(m.name);
    if (opt.ablation && !m.oracle) out.push_back(ablation_name(m.name));
  }
  return out;
}

/*
 * One task per (setting, n, replicate): draw the training set, fit every
 * method on it, score on the setting's shared test set. A failing fit yields
 * a row with NA metrics and the error text; the run continues. Rows come back
 * ordered by setting (as given), n (as given), method, replicate.
 */
inline std::vector<BenchmarkRecord> run_benchmark(const BenchmarkOptions& opt, const ParallelFor& pf = serial_for) {
  if (opt.replicates < 1) throw DomainError("benchmark needs at least one replicate");
  if (opt.settings.empty() || opt.n_train.empty() || opt.methods.empty())
    throw DomainError("benchmark needs settings, sample sizes and methods");
  if (opt.n_test < 1) throw DomainError("test size must be positive");
  for (int n : opt.n_train)
    if (n < 1) throw DomainError("training sizes must be positive");
  for (const auto& m : opt.methods)
    if (!m.oracle) m.config.validate();

  const auto columns = method_columns(opt);
  const int S = static_cast<int>(opt.settings.size()), N = static_cast<int>(opt.n_train.size());
  const int M = static_cast<int>(columns.size()), R = opt.replicates;

  std::vector<TrialDataset> tests;
  for (const auto& s : opt.settings) tests.push_back(generate(s, opt.n_test, test_seed(opt.seed, s.id)));

  std::vector<BenchmarkRecord> rows(static_cast<std::size_t>(S) * N * M * R);
  auto slot = [&](int s, int n, int m, int r) -> BenchmarkRecord& {
    return rows[((static_cast<std::size_t>(s) * N + n) * M + m) * R + r];
  };

  pf(S * N * R, [&](int task) {
    const int r = task % R, n = (task / R) % N, s = task / (R * N);
    const SettingSpec& spec = opt.settings[static_cast<std::size_t>(s)];
    const TrialDataset& test = tests[static_cast<std::size_t>(s)];
    const int size = opt.n_train[static_cast<std::size_t>(n)];
    const std::uint64_t sd = train_seed(opt.seed, spec.id, size, r);
    for (int m = 0; m < M; ++m) {
      BenchmarkRecord& rec = slot(s, n, m, r);
      rec.setting = spec.id;
      rec.n = size;
      rec.method = columns[static_cast<std::size_t>(m)];
      rec.replicate = r;
      rec.K = spec.K;
      rec.seed = sd;
    }
    std::optional<TrialDataset> train;
    try {
      train = generate(spec, size, sd);
    } catch (const std::exception& e) {
      for (int m = 0; m < M; ++m) slot(s, n, m, r).error = e.what();
      return;
    }
    int col = 0;
    for (const auto& method : opt.methods) {
      BenchmarkRecord& rec = slot(s, n, col++, r);
      if (method.oracle) {
        detail::fill_metrics(rec, *test.true_optimal(), test);
        continue;
      }
      BenchmarkRecord* ablated = opt.ablation ? &slot(s, n, col++, r) : nullptr;
      try {
        SRConfig cfg = method.config;
        cfg.seed = sd;
        const SRModel model = fit_sr(*train, cfg);
        detail::fill_metrics(rec, predict_ordinal_batch(model, test.features(), true), test);
        if (ablated) detail::fill_metrics(*ablated, predict_ordinal_batch(model, test.features(), false), test);
      } catch (const std::exception& e) {
        rec.error = e.what();
        if (ablated) ablated->error = e.what();
      }
    }
  });
  return rows;
}

inline int max_arms(const std::vector<BenchmarkRecord>& rows) {
  int K = 0;
  for (const auto& r : rows) K = std::max(K, r.K);
  return K;
}

/// `setting,n,method,replicate,misclass,value,itr_effect,prop_1..prop_K,seed`;
/// proportions past a setting's own K are NA.
inline void write_results_csv(std::ostream& out, const std::vector<BenchmarkRecord>& rows) {
  const int K = max_arms(rows);
  out << "setting,n,method,replicate,misclass,value,itr_effect";
  for (int k = 1; k <= K; ++k) out << ",prop_" << k;
  out << ",seed\n";
  for (const auto& r : rows) {
    out << r.setting << ',' << r.n << ',' << r.method << ',' << r.replicate << ',' << detail::cell(r.misclass) << ','
        << detail::cell(r.value) << ',' << detail::cell(r.itr_effect);
    for (int k = 0; k < K; ++k)
      out << ',' << (k < static_cast<int>(r.proportions.size()) ? format_double(r.proportions[static_cast<std::size_t>(k)]) : "NA");
    out << ',' << r.seed << '\n';
  }
}

struct SummaryCell {
  std::string setting;
  int n = 0;
  std::string method;
  int ok = 0, failed = 0;
  detail::MeanSd misclass, disagreement, value, itr_effect;
};

/// Mean and sample sd per (setting, n, method) over the successful replicates.
inline std::vector<SummaryCell> summarize(const std::vector<BenchmarkRecord>& rows) {
  std::vector<SummaryCell> out;
  std::size_t i = 0;
  while (i < rows.size()) {
    std::size_t j = i;
    while (j < rows.size() && rows[j].setting == rows[i].setting && rows[j].n == rows[i].n && rows[j].method == rows[i].method) ++j;
    SummaryCell c;
    c.setting = rows[i].setting;
    c.n = rows[i].n;
    c.method = rows[i].method;
    std::vector<double> mis, dis, val, eff;
    for (std::size_t t = i; t < j; ++t) {
      const auto& r = rows[t];
      if (!r.error.empty()) {
        ++c.failed;
        continue;
      }
      ++c.ok;
      if (r.misclass) mis.push_back(*r.misclass);
      if (r.disagreement) dis.push_back(*r.disagreement);
      if (r.value) val.push_back(*r.value);
      if (r.itr_effect) eff.push_back(*r.itr_effect);
    }
    c.misclass = detail::mean_sd(mis);
    c.disagreement = detail::mean_sd(dis);
    c.value = detail::mean_sd(val);
    c.itr_effect = detail::mean_sd(eff);
    out.push_back(std::move(c));
    i = j;
  }
  return out;
}

inline void write_summary_csv(std::ostream& out, const std::vector<SummaryCell>& cells) {
  out << "setting,n,method,replicates_ok,replicates_failed,misclass_mean,misclass_sd,disagreement_mean,disagreement_sd,"
         "value_mean,value_sd,itr_effect_mean,itr_effect_sd\n";
  auto pair = [](const detail::MeanSd& s) {
    return s.count ? format_double(s.mean) + ',' + format_double(s.sd) : std::string("NA,NA");
  };
  for (const auto& c : cells)
    out << c.setting << ',' << c.n << ',' << c.method << ',' << c.ok << ',' << c.failed << ',' << pair(c.misclass) << ','
        << pair(c.disagreement) << ',' << pair(c.value) << ',' << pair(c.itr_effect) << '\n';
}

inline void write_method(std::ostream& out, const MethodSpec& m) {
  out << "method " << m.name;
  if (m.oracle) {
    out << " oracle (true optimal arm)\n";
    return;
  }
  const SRConfig& c = m.config;
  out << " kernel=" << to_string(c.kernel) << " penalty=" << to_string(c.penalty) << " selection=" << to_string(c.selection)
      << " folds=" << c.cv_folds << " min_step=" << c.min_step_size << " propensity=" << to_string(c.propensity)
      << " residual=" << to_string(c.residual) << " criterion=" << to_string(c.criterion) << " lambda_grid="
      << detail::join_doubles(c.lambdas()) << " sigma_grid=" << detail::join_doubles(c.sigma_grid)
      << " sigma_multipliers=" << detail::join_doubles(c.sigma_multipliers) << " screen_gamma=" << format_double(c.screen.gamma)
      << " screen_weighted=" << (c.screen.weighted ? "yes" : "no") << '\n';
}

/// Plain-text record of the run: scale, designs and where they depart from the
/// reference simulation study.
inline void write_benchmark_manifest(std::ostream& out, const BenchmarkOptions& opt) {
  out << "srlearn benchmark\n";
  out << "seed " << opt.seed << '\n';
  out << "replicates " << opt.replicates << '\n';
  out << "n_train";
  for (int n : opt.n_train) out << ' ' << n;
  out << "\nn_test " << opt.n_test << '\n';
  out << "ablation " << (opt.ablation ? "yes" : "no") << '\n';
  for (const auto& m : opt.methods) write_method(out, m);
  out << "deviations\n";
  out << "  replicates: " << opt.replicates << " per cell instead of 500\n";
  out << "  boundaries: closed forms below are reconstructions, not the reference formulas\n";
  out << "  main effect: 5 + x1 + 2*x2 for parallel settings, constant 5 for nonparallel settings\n";
  out << "  test sets: one shared set of " << opt.n_test << " subjects per setting\n";
  for (const auto& s : opt.settings) {
    out << "---\n";
    write_setting_manifest(out, s);
  }
}

// ---------------------------------------------------------------------------
// Repeated K-fold evaluation on observed data

struct CrossvalOptions {
  int repeats = 100;
  int folds = 5;
  std::uint64_t seed = 0;
  std::vector<MethodSpec> methods;
  bool fixed_rules = true;  // also score "assign everyone arm k"
};

struct CrossvalRecord {
  std::string method;
  int repeat = 0;
  int fold = 0;
  int n_test = 0;
  std::optional<double> value;
  std::optional<double> itr_effect;
  std::vector<double> proportions;
  std::string error;
};

/// Random partition into `folds` parts of near-equal size.
inline std::vector<int> random_folds(int n, int folds, std::uint64_t seed) {
  if (folds < 2 || n < folds) throw DomainError("need at least 2 folds and one subject per fold");
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<int> fold(static_cast<std::size_t>(n));
  for (int r = 0; r < n; ++r) fold[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])] = r % folds;
  return fold;
}

/*
 * For each repeat, split the data into folds; fit each method on the other
 * folds and score value, ITR effect and assignment proportions on the held-out
 * fold. Fixed rules ("all-k") need no fit. Rows are ordered by method, repeat,
 * fold.
 */
inline std::vector<CrossvalRecord> run_crossval(const TrialDataset& data, const CrossvalOptions& opt,
                                                const ParallelFor& pf = serial_for) {
  if (opt.repeats < 1) throw DomainError("crossval needs at least one repeat");
  std::vector<std::string> names;
  for (const auto& m : opt.methods) {
    if (m.oracle) throw DomainError("oracle method needs simulated data");
    m.config.validate();
    names.push_back(m.name);
  }
  const int fixed = opt.fixed_rules ? data.K() : 0;
  for (int k = 1; k <= fixed; ++k) names.push_back("all-" + std::to_string(k));
  if (names.empty()) throw DomainError("crossval needs at least one method");

  const int M = static_cast<int>(names.size()), F = opt.folds, R = opt.repeats;
  std::vector<CrossvalRecord> rows(static_cast<std::size_t>(M) * R * F);
  auto slot = [&](int m, int r, int f) -> CrossvalRecord& { return rows[(static_cast<std::size_t>(m) * R + r) * F + f]; };

  pf(R * F, [&](int task) {
    const int f = task % F, r = task / F;
    const std::uint64_t split_seed = detail::mix_seed(opt.seed, static_cast<std::uint64_t>(r));
    const auto fold = random_folds(data.n(), F, split_seed);
    IndexSet tr, te;
    for (int i = 0; i < data.n(); ++i) (fold[static_cast<std::size_t>(i)] == f ? te : tr).push_back(i);
    const TrialDataset train = data.subset(tr), test = data.subset(te);
    auto score = [&](CrossvalRecord& rec, const std::vector<int>& pred) {
      rec.proportions = assignment_proportions(pred, data.K());
      try {
        rec.value = value_estimate(pred, test);
      } catch (const UndefinedMetric&) {
      }
      try {
        rec.itr_effect = itr_effect(pred, test);
      } catch (const UndefinedMetric&) {
      }
    };
    for (int m = 0; m < M; ++m) {
      CrossvalRecord& rec = slot(m, r, f);
      rec.method = names[static_cast<std::size_t>(m)];
      rec.repeat = r;
      rec.fold = f;
      rec.n_test = test.n();
      try {
        if (m < static_cast<int>(opt.methods.size())) {
          SRConfig cfg = opt.methods[static_cast<std::size_t>(m)].config;
          cfg.seed = detail::mix_seed(split_seed, static_cast<std::uint64_t>(f) + 1);
          score(rec, predict_ordinal_batch(fit_sr(train, cfg), test.features()));
        } else {
          const int k = m - static_cast<int>(opt.methods.size()) + 1;
          score(rec, std::vector<int>(static_cast<std::size_t>(test.n()), k));
        }
      } catch (const std::exception& e) {
        rec.error = e.what();
      }
    }
  });
  return rows;
}

inline void write_crossval_csv(std::ostream& out, const std::vector<CrossvalRecord>& rows, int K) {
  out << "method,repeat,fold,n_test,value,itr_effect";
  for (int k = 1; k <= K; ++k) out << ",prop_" << k;
  out << '\n';
  for (const auto& r : rows) {
    out << r.method << ',' << r.repeat << ',' << r.fold << ',' << r.n_test << ',' << detail::cell(r.value) << ','
        << detail::cell(r.itr_effect);
    for (int k = 0; k < K; ++k)
      out << ',' << (k < static_cast<int>(r.proportions.size()) ? format_double(r.proportions[static_cast<std::size_t>(k)]) : "NA");
    out << '\n';
  }
}

/// Mean (sd) of value, ITR effect and each arm's share, per method over all
/// held-out folds.
inline void write_crossval_summary(std::ostream& out, const std::vector<CrossvalRecord>& rows, int K) {
  out << "method,folds_ok,value_mean,value_sd,itr_effect_mean,itr_effect_sd";
  for (int k = 1; k <= K; ++k) out << ",prop_" << k << "_mean,prop_" << k << "_sd";
  out << '\n';
  std::size_t i = 0;
  while (i < rows.size()) {
    std::size_t j = i;
    while (j < rows.size() && rows[j].method == rows[i].method) ++j;
    std::vector<double> val, eff;
    std::vector<std::vector<double>> prop(static_cast<std::size_t>(K));
    int ok = 0;
    for (std::size_t t = i; t < j; ++t) {
      if (!rows[t].error.empty()) continue;
      ++ok;
      if (rows[t].value) val.push_back(*rows[t].value);
      if (rows[t].itr_effect) eff.push_back(*rows[t].itr_effect);
      for (std::size_t k = 0; k < rows[t].proportions.size(); ++k) prop[k].push_back(rows[t].proportions[k]);
    }
    auto pair = [](const std::vector<double>& v) {
      const auto s = detail::mean_sd(v);
      return s.count ? format_double(s.mean) + ',' + format_double(s.sd) : std::string("NA,NA");
    };
    out << rows[i].method << ',' << ok << ',' << pair(val) << ',' << pair(eff);
    for (const auto& p : prop) out << ',' << pair(p);
    out << '\n';
    i = j;
  }
}

}  // namespace srlearn
