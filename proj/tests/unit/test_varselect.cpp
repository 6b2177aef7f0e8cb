#include <catch_amalgamated.hpp>

#include <algorithm>
#include <chrono>
#include <random>

#include "srlearn/varselect.hpp"
#include "test_util.hpp"

using namespace srlearn;

namespace {

// Labels from `rule(x)` flipped with probability `flip`, as {0,1}.
template <class Rule>
Vector noisy_labels(std::mt19937_64& rng, const Matrix& X, Rule rule, double flip) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vector y(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const bool v = rule(X.row(i));
    y(i) = (u(rng) < flip) != v ? 1.0 : 0.0;
  }
  return y;
}

bool contains(const std::vector<int>& v, int x) { return std::find(v.begin(), v.end(), x) != v.end(); }

ScreenResult screen(const Matrix& X, const Vector& y) {
  const auto ex = expand_second_order(X);
  return screen_stepwise(ex.values, ex.monomials, y);
}

}  // namespace

TEST_CASE("expand_second_order layout", "[varselect]") {
  Matrix X(1, 2);
  X << 1, 2;
  const auto ex = expand_second_order(X);
  REQUIRE(ex.values.cols() == 5);
  Eigen::RowVectorXd want(5);
  want << 1, 2, 1, 2, 4;
  CHECK(ex.values.row(0) == want);
  CHECK(ex.monomials[2] == Monomial{0, 0});
  CHECK(ex.monomials[3] == Monomial{0, 1});
  CHECK(ex.monomials[4] == Monomial{1, 1});
  CHECK(ex.monomials[3].name() == "x1*x2");
  CHECK(ex.monomials[4].name() == "x2^2");
  CHECK(ex.monomials[0].name({"age", "hb"}) == "age");

  CHECK(expand_second_order(Matrix::Ones(3, 1)).values.cols() == 2);
  CHECK(expand_second_order(Matrix::Ones(3, 10)).values.cols() == 65);
  CHECK_THROWS_AS(expand_second_order(Matrix(3, 0)), DomainError);
}

TEST_CASE("screen_stepwise finds a single informative covariate", "[varselect][montecarlo]") {
  std::mt19937_64 rng(21);
  int hits = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const Matrix X = testutil::uniform_matrix(rng, 400, 10);
    const Vector y = noisy_labels(rng, X, [](const auto& x) { return x(0) > 0; }, 0.1);
    hits += contains(screen(X, y).selected_covariates, 0);
  }
  CHECK(hits >= 95);
}

TEST_CASE("screen_stepwise keeps noise out", "[varselect][montecarlo]") {
  std::mt19937_64 rng(22);
  int empty = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const Matrix X = testutil::uniform_matrix(rng, 400, 10);
    const Vector y = noisy_labels(rng, X, [](const auto&) { return false; }, 0.5);
    empty += screen(X, y).selected_columns.empty();
  }
  CHECK(empty > 50);
}

TEST_CASE("screen_stepwise picks squares for a circle", "[varselect]") {
  std::mt19937_64 rng(23);
  int hits = 0;
  for (int rep = 0; rep < 20; ++rep) {
    const Matrix X = testutil::uniform_matrix(rng, 400, 5);
    const Vector y = noisy_labels(rng, X, [](const auto& x) { return x(0) * x(0) + x(1) * x(1) < 0.5; }, 0.1);
    const auto r = screen(X, y);
    const bool sq1 = std::find(r.selected_monomials.begin(), r.selected_monomials.end(), Monomial{0, 0}) !=
                     r.selected_monomials.end();
    const bool sq2 = std::find(r.selected_monomials.begin(), r.selected_monomials.end(), Monomial{1, 1}) !=
                     r.selected_monomials.end();
    hits += sq1 && sq2;
    // The EBIC trace only ever decreases.
    for (std::size_t t = 1; t < r.trace.size(); ++t) CHECK(r.trace[t] < r.trace[t - 1]);
  }
  CHECK(hits >= 19);
}

TEST_CASE("screen_stepwise equivariance and scale robustness", "[varselect][property]") {
  std::mt19937_64 rng(24);
  for (int rep = 0; rep < 5; ++rep) {
    const Matrix X = testutil::uniform_matrix(rng, 300, 4);
    const Vector y = noisy_labels(rng, X, [](const auto& x) { return x(2) - 0.5 * x(0) * x(0) > 0; }, 0.1);
    const auto base = screen(X, y);

    const std::vector<int> perm{3, 1, 0, 2};  // new column c holds old column perm[c]
    Matrix Xp(X.rows(), 4);
    for (int c = 0; c < 4; ++c) Xp.col(c) = X.col(perm[static_cast<std::size_t>(c)]);
    std::vector<int> mapped;
    for (int c : screen(Xp, y).selected_covariates) mapped.push_back(perm[static_cast<std::size_t>(c)]);
    std::sort(mapped.begin(), mapped.end());
    CHECK(mapped == base.selected_covariates);

    Matrix Xs = X;
    Xs.col(1) *= 10.0;
    Xs.col(2) *= 10.0;
    CHECK(screen(Xs, y).selected_covariates == base.selected_covariates);
  }
}

TEST_CASE("screen_stepwise input checks", "[varselect]") {
  const Matrix X = Matrix::Random(30, 2);
  const auto ex = expand_second_order(X);
  CHECK_THROWS_AS(screen_stepwise(ex.values, ex.monomials, Vector::Ones(30)), DomainError);
  CHECK_THROWS_AS(screen_stepwise(ex.values.topRows(10), ex.monomials, Vector::Ones(10)), DomainError);
}

TEST_CASE("fit_two_stage on a noisy circle with 48 noise covariates", "[varselect]") {
  std::mt19937_64 rng(25);
  const Matrix X = testutil::uniform_matrix(rng, 400, 50);
  const Vector y01 = noisy_labels(rng, X, [](const auto& x) { return x(0) * x(0) + x(1) * x(1) < 0.6; }, 0.1);
  const Vector l = 2.0 * y01.array() - 1.0;
  std::uniform_real_distribution<double> wd(0.2, 2.0);
  Vector w(400);
  for (int i = 0; i < 400; ++i) w(i) = wd(rng);
  const auto sub = testutil::make_sub(X, l, w);
  const auto t0 = std::chrono::steady_clock::now();
  const BinaryRule two = fit_two_stage(sub, KernelSpec::gaussian(0.5), 0.01);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(two.selected_features == std::vector<int>{0, 1});
  CHECK_FALSE(two.selection_fallback);
  CHECK(secs < 20.0);

  // Held-out agreement with the true circle beats the all-covariate fit.
  const Matrix T = testutil::uniform_matrix(rng, 2000, 50);
  const BinaryRule full = fit_aol_l2(sub, KernelSpec::gaussian(median_bandwidth(X)), 0.01);
  std::vector<int> truth(2000);
  for (int i = 0; i < 2000; ++i) truth[static_cast<std::size_t>(i)] = T.row(i).head(2).squaredNorm() < 0.6 ? 1 : -1;
  const double acc_two = testutil::agreement(predict_binary_batch(two, T), truth);
  const double acc_full = testutil::agreement(predict_binary_batch(full, T), truth);
  CHECK(acc_two > 0.85);
  CHECK(acc_two > acc_full + 0.1);
}

TEST_CASE("fit_two_stage fallback and full-set identity", "[varselect]") {
  std::mt19937_64 rng(26);
  const Matrix X = testutil::uniform_matrix(rng, 200, 3);
  const Vector noise = noisy_labels(rng, X, [](const auto&) { return false; }, 0.5);
  Vector l = 2.0 * noise.array() - 1.0;
  auto sub = testutil::make_sub(X, l, Vector::Ones(200));
  const auto screened = screen_subproblem(sub);
  if (screened.selected_covariates.empty()) {
    const BinaryRule r = fit_two_stage(sub, KernelSpec::gaussian(0.7), 0.05);
    CHECK(r.selection_fallback);
    CHECK(r.selected_features == std::vector<int>{0, 1, 2});
  }
  L2FitOptions all;
  all.selected = {0, 1, 2};
  const Matrix G = testutil::uniform_matrix(rng, 300, 3);
  const BinaryRule a = fit_aol_l2(sub, KernelSpec::gaussian(0.7), 0.05);
  const BinaryRule b = fit_aol_l2(sub, KernelSpec::gaussian(0.7), 0.05, all);
  CHECK(predict_binary_batch(a, G) == predict_binary_batch(b, G));
}
