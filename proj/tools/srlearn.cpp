#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "srlearn/srlearn.hpp"

namespace {

using namespace srlearn;

// Invalid flag combinations discovered after CLI11 has parsed.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write '" + path + "'", 0);
  return out;
}

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
  return s;
}

int default_jobs() {
  if (const char* env = std::getenv("SRLEARN_JOBS")) {
    long long v = 0;
    if (!parse_int(env, v) || v < 1 || v > 4096) throw UsageError(std::string("SRLEARN_JOBS must be a positive integer, got '") + env + "'");
    return static_cast<int>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

struct SchemaFlags {
  std::string treatment = "a", outcome = "y", propensity = "prop", d_star = "d_star";
  std::vector<std::string> features;
  int arms = 0;
  std::string benefit, risk;
  double tradeoff = 0.0;
  bool reverse = false;

  void add(CLI::App* c) {
    c->add_option("--treatment-col", treatment, "Treatment column (arms 1..K)")->capture_default_str();
    c->add_option("--outcome-col", outcome, "Outcome column, larger is better")->capture_default_str();
    c->add_option("--propensity-col", propensity, "Propensity column, used when present")->capture_default_str();
    c->add_option("--d-star-col", d_star, "True optimal arm column, used when present")->capture_default_str();
    c->add_option("--features", features, "Feature columns (default: all other columns)")->delimiter(',');
    c->add_option("--arms", arms, "Number of arms K (default: largest observed arm)")->capture_default_str();
    c->add_option("--benefit-col", benefit, "Benefit column for a utility outcome");
    c->add_option("--risk-col", risk, "Risk column for a utility outcome");
    c->add_option("--tradeoff", tradeoff, "Utility = benefit - tradeoff * risk")->capture_default_str();
    c->add_flag("--reverse-arms", reverse, "Relabel arm k as K+1-k");
  }

  CsvSchema schema() const {
    CsvSchema s;
    s.treatment = treatment;
    s.outcome = outcome;
    s.propensity = propensity;
    s.true_optimal = d_star;
    s.features = features;
    if (arms > 0) s.K = arms;
    if (!benefit.empty()) s.benefit = benefit;
    if (!risk.empty()) s.risk = risk;
    s.tradeoff = tradeoff;
    s.reverse_arms = reverse;
    return s;
  }
};

// Tuning flags shared by fit, benchmark and crossval.
struct TuneFlags {
  int folds = 5;
  std::vector<double> lambda, sigma, sigma_mult{0.5, 1.0, 2.0};
  int min_step = 10;
  std::string propensity = "known", residual = "ols", criterion = "value";
  double screen_gamma = 0.5;
  int screen_max_terms = 0;
  bool screen_weighted = false;
  double tol = 1e-5;
  long max_iter = 1'000'000;

  void add(CLI::App* c) {
    c->add_option("--cv", folds, "Cross-validation folds")->capture_default_str()->check(CLI::Range(2, 100));
    c->add_option("--lambda", lambda, "Lambda grid (L1: multiples of lambda_max)")->delimiter(',');
    c->add_option("--sigma", sigma, "Gaussian bandwidth grid (default: multiples of the median distance)")->delimiter(',');
    c->add_option("--sigma-mult", sigma_mult, "Median-distance multipliers")->delimiter(',')->capture_default_str();
    c->add_option("--min-step", min_step, "Smallest step that gets a fitted rule")->capture_default_str()->check(CLI::PositiveNumber);
    c->add_option("--propensity", propensity, "Binary propensity: known or logistic")
        ->capture_default_str()->check(CLI::IsMember({"known", "logistic"}));
    c->add_option("--residual", residual, "Outcome model for AOL residuals")
        ->capture_default_str()->check(CLI::IsMember({"ols", "kernel-ridge"}));
    c->add_option("--criterion", criterion, "Cross-validation score")
        ->capture_default_str()->check(CLI::IsMember({"value", "weighted-misclass"}));
    c->add_option("--screen-gamma", screen_gamma, "EBIC gamma for two-stage screening")->capture_default_str()->check(CLI::Range(0.0, 1.0));
    c->add_option("--screen-max-terms", screen_max_terms, "Screening term cap (0: min(n/5, 50))")->capture_default_str()->check(CLI::NonNegativeNumber);
    c->add_flag("--screen-weighted", screen_weighted, "Weight the screening likelihood by AOL weights");
    c->add_option("--tol", tol, "Dual solver KKT tolerance")->capture_default_str()->check(CLI::PositiveNumber);
    c->add_option("--max-iter", max_iter, "Dual solver iteration cap")->capture_default_str()->check(CLI::PositiveNumber);
  }

  SRConfig config() const {
    SRConfig c;
    c.cv_folds = folds;
    c.lambda_grid = lambda;
    c.sigma_grid = sigma;
    c.sigma_multipliers = sigma_mult;
    c.min_step_size = min_step;
    c.propensity = propensity == "logistic" ? PropensityMode::Logistic : PropensityMode::Known;
    c.residual = residual == "kernel-ridge" ? ResidualKind::KernelRidge : ResidualKind::Ols;
    c.criterion = criterion == "value" ? CvCriterion::Value : CvCriterion::WeightedMisclassification;
    c.screen.gamma = screen_gamma;
    c.screen.max_terms = screen_max_terms;
    c.screen.weighted = screen_weighted;
    c.dual.tol = tol;
    c.dual.max_iter = max_iter;
    return c;
  }
};

// Echo of every flag of the command, defaults included; empty lists print as "".
void write_manifest(const std::string& path, const CLI::App& command, int jobs, const std::string& extra) {
  std::ofstream out = open_out(path);
  out << "srlearn " << command.get_name() << '\n';
  out << "[resolved configuration]\njobs=" << jobs << '\n' << command.config_to_str(true, false);
  if (!extra.empty()) out << extra;
}

std::string model_summary(const SRModel& m) {
  std::ostringstream out;
  out << "[model]\n";
  auto rule = [&](const std::string& id, const BinaryRule& r, const StepReport* rep) {
    out << id << ' ' << detail::kind_name(r.kind);
    if (rep) out << " eligible=" << rep->eligible;
    out << " features=";
    for (std::size_t j = 0; j < r.selected_features.size(); ++j)
      out << (j ? "," : "") << m.scaling.names[static_cast<std::size_t>(r.selected_features[j])];
    if (r.kind == BinaryRule::Kind::Constant) out << " side=" << r.constant_side << " reason=\"" << r.reason << '"';
    if (r.selection_fallback) out << " selection_fallback=yes";
    if (rep && !rep->screened_terms.empty()) out << " screened=" << join(rep->screened_terms);
    out << '\n';
  };
  auto report = [&](const std::string& id) -> const StepReport* {
    for (const auto& r : m.reports)
      if (r.id == id) return &r;
    return nullptr;
  };
  for (std::size_t k = 0; k < m.sequential.size(); ++k) {
    const std::string id = "S" + std::to_string(k + 1);
    rule(id, m.sequential[k], report(id));
  }
  for (std::size_t k = 0; k < m.reestimation.size(); ++k) {
    const std::string id = "R" + std::to_string(k + 1);
    rule(id, m.reestimation[k], report(id));
  }
  return out.str();
}

void write_cv_trace(std::ostream& out, const SRModel& m) {
  out << "step,eligible,folds_used,fold_seed,lambda,sigma,mean_score,best\n";
  for (const auto& r : m.reports) {
    if (!r.cv) {
      out << r.id << ',' << r.eligible << ",0,NA,NA,NA,NA,NA\n";
      continue;
    }
    const CVResult& cv = *r.cv;
    for (std::size_t g = 0; g < cv.grid.size(); ++g) {
      const double score = cv.mean_score[g];
      out << r.id << ',' << r.eligible << ',' << cv.folds_used << ',' << cv.fold_seed << ',' << format_double(cv.grid[g].lambda)
          << ',' << format_double(cv.grid[g].sigma) << ',' << (std::isfinite(score) ? format_double(score) : "NA") << ','
          << (cv.grid[g] == cv.best ? 1 : 0) << '\n';
    }
  }
}

void write_predictions(const std::string& path, const std::vector<int>& pred) {
  std::ofstream out = open_out(path);
  out << "row,pred\n";
  for (std::size_t i = 0; i < pred.size(); ++i) out << i + 1 << ',' << pred[i] << '\n';
}

std::vector<int> read_predictions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'", 0);
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line) || detail::split_csv_line(line) != std::vector<std::string>{"row", "pred"})
    throw ParseError("prediction file header must be 'row,pred'", 1);
  std::vector<int> pred;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = detail::split_csv_line(line);
    long long row = 0, d = 0;
    if (cells.size() != 2 || !parse_int(cells[0], row) || !parse_int(cells[1], d))
      throw ParseError("malformed prediction row", line_no);
    if (row != static_cast<long long>(pred.size()) + 1) throw ParseError("prediction rows must be numbered 1..n in order", line_no);
    if (d < 1 || d > 1000) throw ParseError("predicted arm out of range", line_no);
    pred.push_back(static_cast<int>(d));
  }
  return pred;
}

void write_report(const std::string& path, const EvaluationReport& r) {
  std::ofstream out = open_out(path);
  auto cell = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string("NA"); };
  out << "n_test";
  if (r.misclassification) out << ",misclassification,disagreement";
  out << ",value,itr_effect";
  for (std::size_t k = 0; k < r.assignment_proportions.size(); ++k) out << ",prop_" << k + 1;
  out << '\n' << r.n_test;
  if (r.misclassification) out << ',' << format_double(*r.misclassification) << ',' << format_double(*r.disagreement);
  out << ',' << cell(r.value) << ',' << cell(r.itr_effect);
  for (double p : r.assignment_proportions) out << ',' << format_double(p);
  out << '\n';
}

SettingSpec setting_arg(const std::string& id, int p) {
  try {
    return make_setting(id, p);
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
}

std::vector<MethodSpec> make_methods(const std::vector<std::string>& names, const SRConfig& base) {
  std::vector<MethodSpec> out;
  for (const auto& n : names) {
    for (const auto& m : out)
      if (m.name == n) throw UsageError("method '" + n + "' listed twice");
    out.push_back(make_method(n, base));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sequential re-estimation learning of individualized rules for ordinal treatments"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "INI/TOML file whose keys mirror flag names; flags override it");
  int jobs = 0;
  app.add_option("--jobs", jobs, "Worker threads (default: SRLEARN_JOBS or all cores)")->check(CLI::PositiveNumber);

  // simgen
  auto* sim = app.add_subcommand("simgen", "Draw a simulated trial");
  std::string sim_setting, sim_out;
  int sim_n = 0, sim_p = 0;
  std::uint64_t sim_seed = 0;
  sim->add_option("--setting", sim_setting, "Setting id")->required()->check(CLI::IsMember(setting_ids()));
  sim->add_option("--n", sim_n, "Subjects")->required()->check(CLI::PositiveNumber);
  sim->add_option("--seed", sim_seed, "Random seed")->capture_default_str();
  sim->add_option("--p", sim_p, "Covariates (0: the setting's informative ones; more adds noise)")->capture_default_str()->check(CLI::NonNegativeNumber);
  sim->add_option("--out", sim_out, "Output CSV")->required();

  // fit
  auto* fit = app.add_subcommand("fit", "Fit an SR model");
  std::string fit_data, fit_out, fit_kernel = "linear", fit_penalty = "l2", fit_select = "none";
  std::uint64_t fit_seed = 0;
  SchemaFlags fit_schema;
  TuneFlags fit_tune;
  fit->add_option("--data", fit_data, "Training CSV")->required();
  fit->add_option("--out", fit_out, "Model file")->required();
  fit->add_option("--kernel", fit_kernel, "linear or gaussian")->capture_default_str()->check(CLI::IsMember({"linear", "gaussian"}));
  auto* penalty_opt = fit->add_option("--penalty", fit_penalty, "l2 or l1 (l1: linear rules with embedded selection)")
                          ->capture_default_str()->check(CLI::IsMember({"l2", "l1"}));
  fit->add_option("--select", fit_select, "none, embedded or two-stage")->capture_default_str()->check(CLI::IsMember({"none", "embedded", "two-stage"}));
  fit->add_option("--seed", fit_seed, "Random seed")->capture_default_str();
  fit_schema.add(fit);
  fit_tune.add(fit);

  // predict
  auto* pre = app.add_subcommand("predict", "Recommend an arm for every row");
  std::string pre_model, pre_data, pre_out;
  bool pre_no_r = false;
  SchemaFlags pre_schema;
  pre->add_option("--model", pre_model, "Model file")->required();
  pre->add_option("--data", pre_data, "CSV with the model's covariates")->required();
  pre->add_option("--out", pre_out, "Predictions CSV (row,pred)")->required();
  pre->add_flag("--no-reestimation", pre_no_r, "Skip the R-steps");
  pre_schema.add(pre);

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "Score a rule on a trial dataset");
  std::string ev_data, ev_model, ev_pred, ev_out;
  bool ev_no_r = false;
  SchemaFlags ev_schema;
  ev->add_option("--data", ev_data, "Trial CSV")->required();
  auto* ev_model_opt = ev->add_option("--model", ev_model, "Model file");
  auto* ev_pred_opt = ev->add_option("--pred", ev_pred, "Predictions CSV (row,pred)");
  ev_model_opt->excludes(ev_pred_opt);
  ev->add_option("--out", ev_out, "Report CSV")->required();
  ev->add_flag("--no-reestimation", ev_no_r, "Skip the R-steps");
  ev_schema.add(ev);

  // benchmark
  auto* bm = app.add_subcommand("benchmark", "Replicated simulation study");
  std::vector<std::string> bm_settings = setting_ids(), bm_methods{"oracle", "sr-linear", "sr-gaussian"};
  std::vector<int> bm_n{400, 800};
  int bm_reps = 20, bm_p = 0, bm_test = 10000;
  std::uint64_t bm_seed = 0;
  bool bm_ablation = false;
  std::string bm_out;
  TuneFlags bm_tune;
  bm->add_option("--settings", bm_settings, "Setting ids")->delimiter(',')->capture_default_str()->check(CLI::IsMember(setting_ids()));
  bm->add_option("--n", bm_n, "Training sizes")->delimiter(',')->capture_default_str()->check(CLI::PositiveNumber);
  bm->add_option("--replicates", bm_reps, "Replicates per cell")->capture_default_str()->check(CLI::PositiveNumber);
  bm->add_option("--methods", bm_methods, "Methods")->delimiter(',')->capture_default_str()->check(CLI::IsMember(method_names()));
  bm->add_option("--p", bm_p, "Covariates per setting (0: informative only)")->capture_default_str()->check(CLI::NonNegativeNumber);
  bm->add_option("--n-test", bm_test, "Test set size")->capture_default_str()->check(CLI::PositiveNumber);
  bm->add_option("--seed", bm_seed, "Random seed")->capture_default_str();
  bm->add_flag("--ablation", bm_ablation, "Also report each SR method without R-steps");
  bm->add_option("--out-dir", bm_out, "Directory for results.csv, summary.csv, manifest.txt")->required();
  bm_tune.add(bm);

  // crossval
  auto* cv = app.add_subcommand("crossval", "Repeated K-fold evaluation on observed data");
  std::string cv_data, cv_out;
  std::vector<std::string> cv_methods{"sr-linear"};
  int cv_repeats = 100, cv_folds = 5;
  std::uint64_t cv_seed = 0;
  bool cv_no_fixed = false;
  SchemaFlags cv_schema;
  TuneFlags cv_tune;
  cv->add_option("--data", cv_data, "Trial CSV")->required();
  cv->add_option("--methods", cv_methods, "Methods")->delimiter(',')->capture_default_str()->check(CLI::IsMember(method_names()));
  cv->add_option("--repeats", cv_repeats, "Random splits")->capture_default_str()->check(CLI::PositiveNumber);
  cv->add_option("--folds", cv_folds, "Parts per split")->capture_default_str()->check(CLI::Range(2, 100));
  cv->add_option("--seed", cv_seed, "Random seed")->capture_default_str();
  cv->add_flag("--no-fixed-rules", cv_no_fixed, "Skip the assign-everyone-arm-k rules");
  cv->add_option("--out-dir", cv_out, "Directory for folds.csv, summary.csv, manifest.txt")->required();
  cv_schema.add(cv);
  cv_tune.add(cv);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (jobs == 0) jobs = default_jobs();
    const ParallelFor pf = thread_pool_for(jobs);

    if (*sim) {
      const SettingSpec spec = setting_arg(sim_setting, sim_p);
      const TrialDataset d = generate(spec, sim_n, sim_seed);
      {
        std::ofstream out = open_out(sim_out);
        write_csv(out, d);
      }
      std::ostringstream extra;
      extra << "[design]\n";
      write_setting_manifest(extra, spec);
      write_manifest(sim_out + ".manifest", *sim, jobs, extra.str());
      std::cout << "wrote " << d.n() << " rows to " << sim_out << '\n';
    } else if (*fit) {
      SRConfig c = fit_tune.config();
      c.seed = fit_seed;
      c.kernel = fit_kernel == "gaussian" ? KernelKind::Gaussian : KernelKind::Linear;
      c.penalty = fit_penalty == "l1" ? Penalty::L1Linear : Penalty::L2;
      c.selection = fit_select == "two-stage" ? Selection::TwoStage : fit_select == "embedded" ? Selection::EmbeddedL1 : Selection::None;
      if (c.selection == Selection::EmbeddedL1) {
        if (c.kernel == KernelKind::Gaussian) throw UsageError("--select embedded fits linear rules only; drop --kernel gaussian");
        if (penalty_opt->count() && c.penalty == Penalty::L2) throw UsageError("--select embedded needs --penalty l1");
        c.penalty = Penalty::L1Linear;
      }
      if (c.penalty == Penalty::L1Linear) {
        if (c.kernel == KernelKind::Gaussian) throw UsageError("--penalty l1 fits linear rules only");
        if (c.selection == Selection::TwoStage) throw UsageError("--select two-stage refits with --penalty l2");
        c.selection = Selection::EmbeddedL1;
      }
      try {
        c.validate();
      } catch (const DomainError& e) {
        throw UsageError(e.what());
      }
      const TrialDataset d = load_csv(fit_data, fit_schema.schema());
      const SRModel m = fit_sr(d, c, pf);
      save_model(fit_out, m);
      {
        std::ofstream out = open_out(fit_out + ".cv.csv");
        write_cv_trace(out, m);
      }
      write_manifest(fit_out + ".manifest", *fit, jobs, model_summary(m));
      std::cout << "fitted " << m.sequential.size() << " S-rules and " << m.reestimation.size() << " R-rules; wrote " << fit_out << '\n';
    } else if (*pre) {
      const SRModel m = load_model(pre_model);
      std::ifstream in(pre_data);
      if (!in) throw ParseError("cannot open '" + pre_data + "'", 0);
      const FeatureTable t = read_feature_csv(in, pre_schema.schema());
      if (t.X.cols() == m.p && t.names != m.scaling.names)
        throw DomainError("covariate columns " + join(t.names) + " do not match the model's " + join(m.scaling.names));
      const auto pred = predict_ordinal_batch(m, t.X, !pre_no_r);
      write_predictions(pre_out, pred);
      write_manifest(pre_out + ".manifest", *pre, jobs, "");
      std::cout << "wrote " << pred.size() << " predictions to " << pre_out << '\n';
    } else if (*ev) {
      if (ev_model.empty() == ev_pred.empty()) throw UsageError("evaluate needs exactly one of --model or --pred");
      const TrialDataset d = load_csv(ev_data, ev_schema.schema());
      std::vector<int> pred;
      if (!ev_model.empty()) {
        const SRModel m = load_model(ev_model);
        if (d.p() == m.p && d.feature_names() != m.scaling.names)
          throw DomainError("covariate columns " + join(d.feature_names()) + " do not match the model's " + join(m.scaling.names));
        pred = predict_ordinal_batch(m, d.features(), !ev_no_r);
      } else {
        pred = read_predictions(ev_pred);
      }
      const EvaluationReport r = evaluate(pred, d);
      write_report(ev_out, r);
      write_manifest(ev_out + ".manifest", *ev, jobs, "");
      std::cout << "wrote report for " << r.n_test << " subjects to " << ev_out << '\n';
    } else if (*bm) {
      BenchmarkOptions opt;
      for (const auto& s : bm_settings) opt.settings.push_back(setting_arg(s, bm_p));
      opt.n_train = bm_n;
      opt.replicates = bm_reps;
      opt.seed = bm_seed;
      opt.n_test = bm_test;
      opt.ablation = bm_ablation;
      opt.methods = make_methods(bm_methods, bm_tune.config());
      try {
        for (const auto& m : opt.methods)
          if (!m.oracle) m.config.validate();
      } catch (const DomainError& e) {
        throw UsageError(e.what());
      }
      const auto rows = run_benchmark(opt, pf);
      std::filesystem::create_directories(bm_out);
      const std::filesystem::path dir(bm_out);
      {
        std::ofstream out = open_out((dir / "results.csv").string());
        write_results_csv(out, rows);
      }
      {
        std::ofstream out = open_out((dir / "summary.csv").string());
        write_summary_csv(out, summarize(rows));
      }
      std::ostringstream extra;
      write_benchmark_manifest(extra, opt);
      int failed = 0;
      for (const auto& r : rows)
        if (!r.error.empty()) {
          ++failed;
          extra << "failed " << r.setting << " n=" << r.n << ' ' << r.method << " replicate " << r.replicate << ": " << r.error << '\n';
        }
      write_manifest((dir / "manifest.txt").string(), *bm, jobs, "[benchmark]\n" + extra.str());
      std::cout << "wrote " << rows.size() << " rows (" << failed << " failed) to " << bm_out << '\n';
    } else if (*cv) {
      const TrialDataset d = load_csv(cv_data, cv_schema.schema());
      CrossvalOptions opt;
      opt.repeats = cv_repeats;
      opt.folds = cv_folds;
      opt.seed = cv_seed;
      opt.fixed_rules = !cv_no_fixed;
      opt.methods = make_methods(cv_methods, cv_tune.config());
      for (const auto& m : opt.methods) {
        if (m.oracle) throw UsageError("the oracle method needs simulated data; use benchmark");
        try {
          m.config.validate();
        } catch (const DomainError& e) {
          throw UsageError(e.what());
        }
      }
      const auto rows = run_crossval(d, opt, pf);
      std::filesystem::create_directories(cv_out);
      const std::filesystem::path dir(cv_out);
      {
        std::ofstream out = open_out((dir / "folds.csv").string());
        write_crossval_csv(out, rows, d.K());
      }
      {
        std::ofstream out = open_out((dir / "summary.csv").string());
        write_crossval_summary(out, rows, d.K());
      }
      std::ostringstream extra;
      extra << "[crossval]\nsubjects " << d.n() << "\narms " << d.K() << "\ncovariates " << join(d.feature_names()) << '\n';
      for (const auto& m : opt.methods) write_method(extra, m);
      for (const auto& r : rows)
        if (!r.error.empty()) extra << "failed " << r.method << " repeat " << r.repeat << " fold " << r.fold << ": " << r.error << '\n';
      write_manifest((dir / "manifest.txt").string(), *cv, jobs, extra.str());
      std::cout << "wrote " << rows.size() << " fold results to " << cv_out << '\n';
    }
    return 0;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const NonConvergence& e) {
    std::cerr << "solver did not converge: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
