#include <catch_amalgamated.hpp>

#include <cmath>

#include "srlearn/eval/metrics.hpp"
#include "srlearn/simgen.hpp"

using namespace srlearn;
using Catch::Approx;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) x(i++) = d;
  return x;
}

}  // namespace

TEST_CASE("true_optimal examples", "[simgen]") {
  const SettingSpec n8 = make_setting("N8");
  CHECK(true_optimal(n8, vec({0.0, 0.0})) == 1);
  CHECK(true_optimal(n8, vec({1.0, 1.0})) == 3);
  CHECK(true_optimal(n8, vec({0.8, 0.0})) == 2);

  SettingSpec custom;
  custom.K = 3;
  custom.p = 5;
  custom.geometry = Geometry::LinearIndex;
  custom.direction = {1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0), 0.0, 0.0, 0.0};
  custom.thresholds = {-0.3, 0.3};
  CHECK(true_optimal(custom, vec({0.5, -0.5, 0.9, -0.9, 0.1})) == 2);
  CHECK(true_optimal(custom, vec({-1.0, -1.0, 0.0, 0.0, 0.0})) == 1);
  CHECK(true_optimal(custom, vec({1.0, 1.0, 0.0, 0.0, 0.0})) == 3);

  CHECK_THROWS_AS(true_optimal(n8, vec({0.0, 0.0, 0.0})), DomainError);
}

TEST_CASE("nonparallel curves", "[simgen]") {
  const SettingSpec n7 = make_setting("N7");
  CHECK(true_optimal(n7, vec({-1.0, -1.0})) == 1);  // u = (0,0), inside the quarter circle
  CHECK(true_optimal(n7, vec({0.9, 0.9})) == 3);    // above the parabola
  CHECK(true_optimal(n7, vec({0.9, 0.0})) == 2);    // 0 < 0.81 - 0.3
  const SettingSpec n9 = make_setting("N9");
  CHECK(true_optimal(n9, vec({0.4, -0.4})) == 1);
  CHECK(true_optimal(n9, vec({0.0, 0.7})) == 2);
  CHECK(true_optimal(n9, vec({1.0, 0.9})) == 3);
  const SettingSpec n10 = make_setting("N10");
  CHECK(n10.K == 4);
  CHECK(true_optimal(n10, vec({0.0, 0.0})) == 1);
  CHECK(true_optimal(n10, vec({0.6, 0.0})) == 2);
  CHECK(true_optimal(n10, vec({0.7, 0.6})) == 3);
  CHECK(true_optimal(n10, vec({1.0, 1.0})) == 4);
}

TEST_CASE("loss examples and symmetry", "[simgen]") {
  SettingSpec abs = make_setting("P1"), quad = make_setting("P6");
  CHECK(loss(abs, 3, 1) == 2.0);
  CHECK(loss(quad, 3, 1) == 4.0);
  for (int a = 1; a <= 5; ++a)
    for (int d = 1; d <= 5; ++d) {
      CHECK(loss(abs, a, d) == loss(abs, d, a));
      CHECK(loss(quad, a, d) == loss(quad, d, a));
      CHECK((loss(abs, a, d) == 0.0) == (a == d));
    }
}

TEST_CASE("every shipped setting covers every class", "[simgen]") {
  // Frequencies from an independent Monte Carlo run of the same boundaries.
  const std::vector<std::pair<std::string, std::vector<double>>> expected = {
      {"P1", {0.31, 0.39, 0.31}}, {"P2", {0.10, 0.53, 0.37}}, {"P3", {0.63, 0.21, 0.15}},
      {"N7", {0.50, 0.16, 0.34}}, {"N8", {0.31, 0.57, 0.11}}, {"N9", {0.25, 0.42, 0.33}},
      {"N10", {0.20, 0.35, 0.37, 0.08}}};
  for (const auto& id : setting_ids()) {
    for (int p : {0, 50}) {
      const SettingSpec s = make_setting(id, p);
      REQUIRE(static_cast<int>(s.class_freq.size()) == s.K);
      double total = 0.0;
      for (double f : s.class_freq) {
        CHECK(f >= 0.01);
        total += f;
      }
      CHECK(total == Approx(1.0).margin(1e-12));
      CHECK(s.p == (p == 0 ? s.informative() : 50));
    }
  }
  for (const auto& [id, freq] : expected) {
    const SettingSpec s = make_setting(id);
    for (std::size_t k = 0; k < freq.size(); ++k) CHECK(s.class_freq[k] == Approx(freq[k]).margin(0.01));
  }
  // class-1 share spans roughly 10% to over 60% across the parallel settings
  CHECK(make_setting("P2").class_freq[0] < 0.12);
  CHECK(make_setting("P3").class_freq[0] > 0.6);
  CHECK_THROWS_AS(make_setting("P7"), DomainError);
  CHECK_THROWS_AS(make_setting("P1", 3), DomainError);
}

TEST_CASE("generate is deterministic and well formed", "[simgen]") {
  const SettingSpec s = make_setting("N10", 6);
  const TrialDataset a = generate(s, 300, 7), b = generate(s, 300, 7), c = generate(s, 300, 8);
  CHECK(a.features() == b.features());
  CHECK(a.treatment() == b.treatment());
  CHECK(a.outcome() == b.outcome());
  CHECK(a.features() != c.features());
  CHECK(a.n() == 300);
  CHECK(a.p() == 6);
  CHECK(a.K() == 4);
  REQUIRE(a.propensity());
  CHECK((a.propensity()->array() == 0.25).all());
  REQUIRE(a.true_optimal());
  CHECK(a.features().minCoeff() >= -1.0);
  CHECK(a.features().maxCoeff() <= 1.0);
  for (int i = 0; i < a.n(); ++i)
    CHECK((*a.true_optimal())[static_cast<std::size_t>(i)] == true_optimal(s, a.features().row(i).transpose()));
  CHECK_THROWS_AS(generate(s, 0, 1), DomainError);
}

TEST_CASE("large-sample behaviour of generated data", "[simgen]") {
  const int n = 100000;
  for (const std::string id : {"P1", "P5", "N8"}) {
    const SettingSpec s = make_setting(id);
    const TrialDataset d = generate(s, n, 11);
    std::vector<int> count(static_cast<std::size_t>(s.K), 0);
    for (int a : d.treatment()) ++count[static_cast<std::size_t>(a - 1)];
    for (int c : count) CHECK(std::abs(static_cast<double>(c) / n - 1.0 / s.K) < 0.01);

    // Zero-loss subjects: outcome mean tracks the mean of mu over the same subjects.
    double ysum = 0.0, musum = 0.0, mu_all = 0.0, mu_sq = 0.0;
    int matched = 0;
    for (int i = 0; i < n; ++i) {
      const double mu = main_effect(s, d.features().row(i).transpose());
      mu_all += mu;
      mu_sq += mu * mu;
      if (d.treatment()[static_cast<std::size_t>(i)] != (*d.true_optimal())[static_cast<std::size_t>(i)]) continue;
      ysum += d.outcome()(i);
      musum += mu;
      ++matched;
    }
    CHECK(std::abs(ysum / matched - musum / matched) < 3.0 / std::sqrt(static_cast<double>(matched)));

    // Value of D* against the Monte Carlo mean of mu, within three standard errors.
    const double mean_mu = mu_all / n;
    const double var_mu = mu_sq / n - mean_mu * mean_mu;
    const double se = std::sqrt((1.0 + var_mu) / matched + var_mu / n);
    CHECK(std::abs(value_estimate(*d.true_optimal(), d) - mean_mu) < 3.0 * se);
  }
}

TEST_CASE("setting manifest echoes the design", "[simgen]") {
  std::ostringstream out;
  write_setting_manifest(out, make_setting("P6", 50));
  const std::string text = out.str();
  CHECK(text.find("setting P6") != std::string::npos);
  CHECK(text.find("noise 45") != std::string::npos);
  CHECK(text.find("quadratic") != std::string::npos);
  CHECK(text.find("class_frequencies") != std::string::npos);
}
