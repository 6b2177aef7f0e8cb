#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "srlearn/eval/cv_tune.hpp"
#include "srlearn/eval/metrics.hpp"
#include "test_util.hpp"

using namespace srlearn;
using Catch::Approx;

namespace {

TrialDataset small_trial(std::vector<int> a, std::vector<double> y, int K = 3, std::optional<Vector> prop = std::nullopt) {
  const auto n = static_cast<Eigen::Index>(a.size());
  return TrialDataset(Matrix::Zero(n, 1), std::move(a), Eigen::Map<Vector>(y.data(), n), K, std::move(prop));
}

// Randomized binary trial: Y = 2 when the received group matches sign(score), else 0.
// With m = 1 the AOL label is sign(score) and every weight is 2.
template <class Score>
BinarySubproblem benefit_sub(std::mt19937_64& rng, int n, Score score) {
  auto sub = testutil::separated_sub(rng, n, 2, score, 0.1);
  std::bernoulli_distribution coin(0.5);
  for (int i = 0; i < n; ++i) {
    const double b = coin(rng) ? 1.0 : -1.0;
    sub.treatment(i) = b;
    sub.outcome(i) = b == sub.labels(i) ? 2.0 : 0.0;
    sub.weights(i) = 1.0 / 0.5;
    sub.propensity(i) = 0.5;
  }
  return sub;
}

}  // namespace

TEST_CASE("misclassification examples", "[eval]") {
  const std::vector<int> t{1, 2, 3, 1};
  CHECK(misclassification(t, t) == 0.0);
  CHECK(misclassification({2, 3, 1, 2}, t) == 1.0);
  CHECK(misclassification({1, 2, 3, 3}, t) == 0.25);
  CHECK(mean_disagreement({3, 2, 3, 1}, t) == 0.5);
  CHECK_THROWS_AS(misclassification({1}, t), DomainError);
  CHECK_THROWS_AS(misclassification({}, {}), DomainError);

  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> arm(1, 4);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<int> a(37), b(37);
    for (auto& v : a) v = arm(rng);
    for (auto& v : b) v = arm(rng);
    std::size_t agree = 0;
    for (std::size_t i = 0; i < a.size(); ++i) agree += a[i] == b[i];
    CHECK(static_cast<double>(agree) / 37.0 + misclassification(a, b) == 1.0);
  }
}

TEST_CASE("value and ITR effect examples", "[eval]") {
  // Matched outcomes {4, 6}, unmatched {2, 4}, constant P = 1/3.
  const TrialDataset d = small_trial({1, 2, 3, 1}, {4.0, 6.0, 2.0, 4.0});
  const std::vector<int> pred{1, 2, 1, 3};
  CHECK(value_estimate(pred, d) == 5.0);
  CHECK(itr_effect(pred, d) == 2.0);
  CHECK_THROWS_AS(value_estimate({2, 3, 1, 2}, d), UndefinedMetric);
  CHECK_THROWS_AS(itr_effect(d.treatment(), d), UndefinedMetric);
  CHECK(itr_effect({1, 2, 2, 3}, small_trial({1, 2, 3, 1}, {4.0, 6.0, 4.0, 6.0})) == 0.0);

  Vector prop(2);
  prop << 0.5, 0.25;
  const TrialDataset h = small_trial({1, 2}, {2.0, 4.0}, 3, prop);
  CHECK(value_estimate({1, 2}, h) == Approx(20.0 / 6.0).epsilon(1e-14));
  CHECK_THROWS_AS(value_estimate({1}, h), DomainError);
}

TEST_CASE("value estimate properties", "[eval]") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> arm(1, 3);
  std::normal_distribution<double> z(3.0, 2.0);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  for (int rep = 0; rep < 30; ++rep) {
    const int n = 60;
    std::vector<int> a(n), pred(n);
    std::vector<double> y(n);
    Vector prop(n);
    for (int i = 0; i < n; ++i) {
      a[static_cast<std::size_t>(i)] = arm(rng);
      pred[static_cast<std::size_t>(i)] = arm(rng);
      y[static_cast<std::size_t>(i)] = z(rng);
      prop(i) = u(rng);
    }
    // constant propensity: the value is the matched-subject mean
    const TrialDataset c = small_trial(a, y);
    double sum = 0.0;
    int cnt = 0;
    for (int i = 0; i < n; ++i)
      if (a[static_cast<std::size_t>(i)] == pred[static_cast<std::size_t>(i)]) {
        sum += y[static_cast<std::size_t>(i)];
        ++cnt;
      }
    REQUIRE(cnt > 0);
    CHECK(std::abs(value_estimate(pred, c) - sum / cnt) <= 1e-12);

    const TrialDataset h = small_trial(a, y, 3, prop);
    const double c_scale = u(rng);
    const TrialDataset hs = small_trial(a, y, 3, Vector(prop * c_scale));
    CHECK(std::abs(value_estimate(pred, h) - value_estimate(pred, hs)) <= 1e-10);
  }
}

TEST_CASE("assignment proportions and report", "[eval]") {
  const auto pr = assignment_proportions({1, 1, 3, 2, 3, 3}, 4);
  REQUIRE(pr.size() == 4);
  CHECK(pr[0] == Approx(2.0 / 6));
  CHECK(pr[3] == 0.0);
  CHECK(pr[0] + pr[1] + pr[2] + pr[3] == Approx(1.0).margin(1e-10));
  CHECK_THROWS_AS(assignment_proportions({5}, 4), DomainError);

  const TrialDataset plain = small_trial({1, 2, 3, 1}, {4.0, 6.0, 2.0, 4.0});
  const EvaluationReport r = evaluate({1, 2, 1, 3}, plain);
  CHECK_FALSE(r.misclassification);
  CHECK(*r.value == 5.0);
  CHECK(*r.itr_effect == 2.0);
  CHECK(r.n_test == 4);

  const TrialDataset truth(Matrix::Zero(4, 1), {1, 2, 3, 1}, Vector::Ones(4), 3, std::nullopt, std::vector<int>{1, 2, 2, 2});
  const EvaluationReport t = evaluate({1, 2, 3, 1}, truth);
  CHECK(*t.misclassification == 0.5);
  CHECK(*t.disagreement == 0.5);
  CHECK_FALSE(t.itr_effect);  // every subject matched
}

TEST_CASE("stratified folds", "[eval][cv]") {
  Vector l(30), w = Vector::Ones(30);
  for (int i = 0; i < 30; ++i) l(i) = i < 8 ? -1.0 : 1.0;
  int folds = 5;
  const auto f = stratified_folds(l, w, folds, 9);
  CHECK(folds == 5);
  for (int g = 0; g < 5; ++g) {
    int neg = 0, pos = 0;
    for (int i = 0; i < 30; ++i)
      if (f[static_cast<std::size_t>(i)] == g) (l(i) < 0 ? neg : pos)++;
    CHECK(neg >= 1);
    CHECK(pos >= 1);
  }
  CHECK(stratified_folds(l, w, folds, 9) == f);

  // three negatives only support three folds
  for (int i = 0; i < 30; ++i) l(i) = i < 3 ? -1.0 : 1.0;
  folds = 5;
  stratified_folds(l, w, folds, 1);
  CHECK(folds == 3);

  for (int i = 0; i < 30; ++i) l(i) = i < 1 ? -1.0 : 1.0;
  folds = 5;
  CHECK_THROWS_AS(stratified_folds(l, w, folds, 1), DegenerateStep);
}

TEST_CASE("cv_tune examples", "[eval][cv]") {
  std::mt19937_64 rng(21);
  const auto sub = testutil::separated_sub(rng, 80, 2, [](const auto& x) { return x(0) - x(1); }, 0.1);

  const CVResult one = cv_tune(sub, {{0.05, 0.0}});
  CHECK(one.best == GridPoint{0.05, 0.0});
  CHECK(one.folds_used == 5);
  CHECK(one.fold_of.size() == 80);

  // duplicates tie exactly; the later entry wins
  const CVResult dup = cv_tune(sub, {{0.05, 0.0}, {0.05, 0.0}});
  CHECK(dup.mean_score[0] == dup.mean_score[1]);
  CHECK(dup.best == GridPoint{0.05, 0.0});

  // An enormous lambda collapses to a near-flat rule with lower held-out value.
  int small_wins = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    std::mt19937_64 r(100 + s);
    const auto sep = benefit_sub(r, 80, [](const auto& x) { return x(0) + 0.5 * x(1) - 0.3; });
    CvOptions opt;
    opt.seed = s;
    const CVResult res = cv_tune(sep, {{1e-3, 0.0}, {1e3, 0.0}}, opt);
    small_wins += res.best.lambda == 1e-3;
    CHECK(res.mean_score[0] >= res.mean_score[1]);
  }
  CHECK(small_wins >= 9);

  CHECK_THROWS_AS(cv_tune(sub, {}), DomainError);
  CHECK_THROWS_AS(cv_tune(sub, {{0.0, 0.0}}), DomainError);
}

TEST_CASE("cv_tune tie-breaks and best point", "[eval][cv]") {
  std::mt19937_64 rng(4);
  const auto sub = testutil::separated_sub(rng, 60, 2, [](const auto& x) { return x(0); }, 0.2);
  CvOptions opt;
  opt.kernel = KernelKind::Gaussian;
  const std::vector<GridPoint> grid{{0.01, 0.5}, {0.01, 1.0}, {0.1, 0.5}, {0.1, 1.0}};
  const CVResult r = cv_tune(sub, grid, opt);
  double best = -1e300;
  for (double v : r.mean_score) best = std::max(best, v);
  const auto it = std::find(r.grid.begin(), r.grid.end(), r.best);
  REQUIRE(it != r.grid.end());
  CHECK(r.mean_score[static_cast<std::size_t>(it - r.grid.begin())] == best);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    if (r.mean_score[g] != best) continue;
    CHECK(grid[g].lambda <= r.best.lambda);
    if (grid[g].lambda == r.best.lambda) CHECK(grid[g].sigma <= r.best.sigma);
  }

  // Parallel evaluation gives identical scores.
  opt.parallel = thread_pool_for(3);
  const CVResult rp = cv_tune(sub, grid, opt);
  CHECK(rp.mean_score == r.mean_score);
  CHECK(rp.best == r.best);
}

TEST_CASE("cv_tune L1 and two-stage fitters", "[eval][cv]") {
  std::mt19937_64 rng(8);
  const auto sub = testutil::separated_sub(rng, 120, 4, [](const auto& x) { return x(0) - 0.2; }, 0.1);
  CvOptions opt;
  opt.fitter = Fitter::L1Linear;
  const double lmax = l1_lambda_max(sub.features, sub.weights);
  std::vector<GridPoint> grid;
  for (double f : {0.01, 0.05, 0.2, 1.0}) grid.push_back({f * lmax, 0.0});
  const CVResult r = cv_tune(sub, grid, opt);
  CHECK(r.best.lambda < lmax);
  CHECK(r.l1_path_violations <= 2);

  opt.fitter = Fitter::TwoStage;
  const CVResult t = cv_tune(sub, {{0.01, 0.0}, {0.1, 0.0}}, opt);
  CHECK(std::find(t.selected_features.begin(), t.selected_features.end(), 0) != t.selected_features.end());
  CHECK(t.selected_features.size() <= 2);
}

TEST_CASE("cv_tune weighted misclassification criterion", "[eval][cv]") {
  std::mt19937_64 rng(12);
  const auto sub = testutil::separated_sub(rng, 50, 2, [](const auto& x) { return x(1); }, 0.1);
  CvOptions opt;
  opt.criterion = CvCriterion::WeightedMisclassification;
  const CVResult r = cv_tune(sub, {{1e-3, 0.0}, {1e3, 0.0}}, opt);
  for (double v : r.mean_score) {
    CHECK(v <= 0.0);
    CHECK(v >= -1.0);
  }
  CHECK(r.best.lambda == 1e-3);
}
