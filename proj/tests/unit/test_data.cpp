#include <catch_amalgamated.hpp>

#include <random>
#include <sstream>

#include "srlearn/data.hpp"
#include "test_util.hpp"

using namespace srlearn;
using Catch::Approx;

namespace {

TrialDataset parse(const std::string& text, const CsvSchema& schema = {}) {
  std::istringstream in(text);
  return read_csv(in, schema);
}

Matrix column(std::initializer_list<double> v) {
  Matrix m(static_cast<Eigen::Index>(v.size()), 1);
  Eigen::Index i = 0;
  for (double d : v) m(i++, 0) = d;
  return m;
}

}  // namespace

TEST_CASE("load_csv examples", "[data]") {
  const TrialDataset d = parse("x1,x2,a,y\n0.1,0.2,1,3.5\n0.3,-0.4,2,1\n1,2,3,-2\n");
  CHECK(d.n() == 3);
  CHECK(d.p() == 2);
  CHECK(d.K() == 3);
  CHECK(d.feature_names() == std::vector<std::string>{"x1", "x2"});
  CHECK(d.features()(1, 1) == -0.4);
  CHECK(d.treatment() == std::vector<int>{1, 2, 3});
  CHECK(d.outcome()(2) == -2.0);
  CHECK_FALSE(d.propensity());
  CHECK_FALSE(d.true_optimal());
  CHECK(d.prop(0) == Approx(1.0 / 3.0));

  CHECK_THROWS_AS(parse("x1,a,y\n0.5,0,1\n0.2,1,2\n"), DomainError);

  const TrialDataset s = parse("x1,a,y,prop,d_star\n0.5,1,1,0.5,2\n0.2,2,2,0.25,1\n");
  REQUIRE(s.true_optimal());
  CHECK(*s.true_optimal() == std::vector<int>{2, 1});
  REQUIRE(s.propensity());
  CHECK((*s.propensity())(1) == 0.25);
  CHECK(s.p() == 1);
}

TEST_CASE("load_csv rejects malformed rows with their line number", "[data]") {
  auto line_of = [](const std::string& text) -> std::size_t {
    try {
      parse(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  CHECK(line_of("x1,a,y\n0.5,1,1\n0.2,2\n") == 3);
  CHECK(line_of("x1,a,y\n0.5,1,1\n0.2,2,\n") == 3);
  CHECK(line_of("x1,a,y\n0.5,1,abc\n") == 2);
  CHECK(line_of("x1,a,y\n0.5,1.5,1\n") == 2);
  CHECK(line_of("x1,y\n0.5,1\n") == 1);
  CHECK(line_of("x1,x1,a,y\n0.5,0.5,1,1\n") == 1);
  CHECK(line_of("") == 1);
  CHECK_THROWS_AS(parse("x1,a,y,prop\n0.5,1,1,0\n0.2,2,1,0.5\n"), DomainError);
}

TEST_CASE("schema overrides", "[data]") {
  const std::string text = "g,r,age,arm,y\n6,1,30,1,0\n5,0,40,2,0\n3,2,50,3,0\n";
  CsvSchema s;
  s.treatment = "arm";
  s.benefit = "g";
  s.risk = "r";
  s.tradeoff = 2.0;
  const TrialDataset d = parse(text, s);
  CHECK(d.feature_names() == std::vector<std::string>{"age"});
  CHECK(d.outcome()(0) == 4.0);
  CHECK(d.outcome()(1) == 5.0);
  CHECK(d.outcome()(2) == -1.0);

  s.K = 4;
  s.reverse_arms = true;
  const TrialDataset r = parse(text, s);
  CHECK(r.K() == 4);
  CHECK(r.treatment() == std::vector<int>{4, 3, 2});

  CsvSchema only_benefit;
  only_benefit.treatment = "arm";
  only_benefit.benefit = "g";
  CHECK_THROWS_AS(parse(text, only_benefit), DomainError);
}

TEST_CASE("compute_utility examples", "[data]") {
  CHECK(compute_utility(6, 1, 2) == 4.0);
  for (double b : {0.0, 1.0, 3.7}) CHECK(compute_utility(5, 0, b) == 5.0);
  CHECK(compute_utility(3, 2, 3) == -3.0);
}

TEST_CASE("dataset invariants are enforced at construction", "[data]") {
  const Matrix X = Matrix::Zero(2, 1);
  const Vector y = Vector::Zero(2);
  CHECK_THROWS_AS(TrialDataset(X, {1, 4}, y, 3), DomainError);
  CHECK_THROWS_AS(TrialDataset(X, {1, 2}, y, 1), DomainError);
  CHECK_THROWS_AS(TrialDataset(X, {1, 2}, y, 2, Vector::Constant(2, 1.5)), DomainError);
  CHECK_THROWS_AS(TrialDataset(X, {1, 2}, y, 2, Vector::Constant(2, 0.0)), DomainError);
  CHECK_THROWS_AS(TrialDataset(X, {1, 2}, y, 2, std::nullopt, std::vector<int>{1, 3}), DomainError);
  Matrix bad = X;
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(TrialDataset(bad, {1, 2}, y, 2), DomainError);
  CHECK_THROWS_AS(TrialDataset(X, {1}, y, 2), DomainError);
}

TEST_CASE("scaling examples", "[data]") {
  const ScalingParams s = fit_scaling(column({0, 5, 10}));
  CHECK(s.min[0] == 0.0);
  CHECK(s.max[0] == 10.0);
  CHECK_FALSE(s.degenerate(0));

  const ScalingParams c = fit_scaling(column({3, 3, 3}));
  CHECK(c.degenerate(0));
  CHECK(apply_scaling(c, column({3, 7})).isZero());

  const Matrix unit = column({-1, 1});
  CHECK(apply_scaling(fit_scaling(unit), column({-1, 0.25, 1})) == column({-1, 0.25, 1}));

  // endpoints, midpoint and an unclipped test value
  const Matrix mapped = apply_scaling(s, column({0, 5, 15}));
  CHECK(mapped(0, 0) == -1.0);
  CHECK(mapped(1, 0) == 0.0);
  CHECK(mapped(2, 0) == 2.0);

  CHECK_THROWS_AS(apply_scaling(s, Matrix(Matrix::Zero(2, 2))), DomainError);
  CHECK_THROWS_AS(fit_scaling(Matrix(0, 1)), DomainError);
  const TrialDataset one(Matrix::Zero(1, 1), {1}, Vector::Zero(1), 2);
  CHECK_THROWS_AS(fit_scaling(one), DomainError);
}

TEST_CASE("scaled training data spans [-1, 1]", "[data][property]") {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 50; ++rep) {
    Matrix X = testutil::uniform_matrix(rng, 3 + rep % 17, 1 + rep % 4, -20.0, 35.0);
    if (rep % 5 == 0) X.col(0).setConstant(2.5);
    const ScalingParams s = fit_scaling(X);
    const Matrix Z = apply_scaling(s, X);
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      if (s.degenerate(static_cast<int>(j))) {
        CHECK(Z.col(j).isZero());
        continue;
      }
      CHECK(Z.col(j).minCoeff() == Approx(-1.0).margin(1e-12));
      CHECK(Z.col(j).maxCoeff() == Approx(1.0).margin(1e-12));
    }
  }
}

TEST_CASE("csv and scaling round trips", "[data][property]") {
  std::mt19937_64 rng(9);
  const int n = 40;
  Matrix X = testutil::uniform_matrix(rng, n, 3, -1e3, 1e3);
  X(0, 0) = 1e-300;
  X(1, 1) = 0.1 + 0.2;
  std::vector<int> a(n), d(n);
  Vector y(n), p(n);
  for (int i = 0; i < n; ++i) {
    a[static_cast<std::size_t>(i)] = 1 + i % 4;
    d[static_cast<std::size_t>(i)] = 4 - i % 4;
    y(i) = std::ldexp(static_cast<double>(i) - 17.3, i % 7);
    p(i) = 0.1 + 0.9 * (i + 1) / n;
  }
  const TrialDataset src(X, a, y, 4, p, d, {"age", "dose", "hb"});
  std::stringstream buf;
  write_csv(buf, src);
  const TrialDataset back = read_csv(buf);
  CHECK(back.features() == src.features());
  CHECK(back.treatment() == src.treatment());
  CHECK(back.outcome() == src.outcome());
  CHECK(*back.propensity() == *src.propensity());
  CHECK(*back.true_optimal() == *src.true_optimal());
  CHECK(back.feature_names() == src.feature_names());
  CHECK(back.K() == 4);

  const ScalingParams s = fit_scaling(src);
  std::stringstream sb;
  write_scaling(sb, s);
  CHECK(read_scaling(sb) == s);
  std::istringstream bad("feature,min,max\nx1,2,1\n");
  CHECK_THROWS_AS(read_scaling(bad), ParseError);
}

TEST_CASE("subset and feature-only reading", "[data]") {
  const TrialDataset d = parse("x1,x2,a,y,d_star\n1,2,1,5,1\n3,4,2,6,2\n5,6,3,7,3\n");
  const TrialDataset s = d.subset({2, 0});
  CHECK(s.treatment() == std::vector<int>{3, 1});
  CHECK(s.features()(0, 1) == 6.0);
  CHECK(*s.true_optimal() == std::vector<int>{3, 1});
  CHECK(s.K() == 3);

  std::istringstream in("x1,a,x2\n1,9,2\n3,9,4\n");
  const FeatureTable t = read_feature_csv(in);
  CHECK(t.names == std::vector<std::string>{"x1", "x2"});
  CHECK(t.X.rows() == 2);
  CHECK(t.X(1, 1) == 4.0);
  std::istringstream bad("x1,x2\n1\n");
  CHECK_THROWS_AS(read_feature_csv(bad), ParseError);
}
