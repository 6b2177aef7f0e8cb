#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "srlearn/data.hpp"
#include "srlearn/error.hpp"

namespace srlearn {

enum class Loss { Absolute, Quadratic };
enum class Geometry { LinearIndex, QuadraticIndex, QuarterCircleParabola, Circles, SquareEllipse };
enum class MainEffect { Linear12, Constant5 };

/*
 * Simulation design. Parallel designs threshold a scalar index s(x) over
 * x1..x5: class 1 + #{t in thresholds : t <= s(x)}. Nonparallel designs use
 * curves in (x1, x2). Covariates beyond the informative ones are noise.
 */
struct SettingSpec {
  std::string id;
  int K = 3;
  int p = 2;
  Loss loss = Loss::Absolute;
  Geometry geometry = Geometry::LinearIndex;
  MainEffect main_effect = MainEffect::Constant5;
  std::vector<double> direction;   // LinearIndex weights over x1..x5
  std::vector<double> thresholds;  // index thresholds or squared radii
  std::vector<double> class_freq;  // Monte Carlo class frequencies, filled by make_setting

  int informative() const { return geometry == Geometry::LinearIndex || geometry == Geometry::QuadraticIndex ? 5 : 2; }
};

inline double loss(const SettingSpec& spec, int a, int d) {
  const double gap = std::abs(a - d);
  return spec.loss == Loss::Absolute ? gap : gap * gap;
}

inline double main_effect(const SettingSpec& spec, const Eigen::Ref<const Vector>& x) {
  return spec.main_effect == MainEffect::Linear12 ? 5.0 + x(0) + 2.0 * x(1) : 5.0;
}

inline int true_optimal(const SettingSpec& spec, const Eigen::Ref<const Vector>& x) {
  if (x.size() != spec.p) throw DomainError("true_optimal: expected " + std::to_string(spec.p) + " covariates");
  auto count_below = [&](double s) {
    int c = 1;
    for (double t : spec.thresholds) c += t <= s;
    return c;
  };
  switch (spec.geometry) {
    case Geometry::LinearIndex: {
      double s = 0.0;
      for (std::size_t j = 0; j < spec.direction.size(); ++j) s += spec.direction[j] * x(static_cast<Eigen::Index>(j));
      return count_below(s);
    }
    case Geometry::QuadraticIndex: {
      const double s = (x(0) + x(1) + x(2)) / std::sqrt(3.0) + x(3) * x(3) + x(4) * x(4) - 2.0 / 3.0;
      return count_below(s);
    }
    case Geometry::Circles: return count_below(x(0) * x(0) + x(1) * x(1));
    case Geometry::QuarterCircleParabola: {
      const double u1 = (x(0) + 1.0) / 2.0, u2 = (x(1) + 1.0) / 2.0;
      if (u1 * u1 + u2 * u2 < 0.64) return 1;
      return x(1) > x(0) * x(0) - 0.3 ? 3 : 2;
    }
    case Geometry::SquareEllipse: {
      if (std::max(std::abs(x(0)), std::abs(x(1))) < 0.5) return 1;
      return x(0) * x(0) / 1.21 + x(1) * x(1) / 0.64 < 1.0 ? 2 : 3;
    }
  }
  return 1;
}

inline std::vector<std::string> setting_ids() {
  return {"P1", "P2", "P3", "P4", "P5", "P6", "N7", "N8", "N9", "N10"};
}

/*
 * Shipped designs. p = 0 keeps the default dimension (5 for P*, 2 for N*);
 * larger p appends noise covariates. Class frequencies are checked on 1e5
 * Monte Carlo draws: every class must reach 1%.
 */
inline SettingSpec make_setting(const std::string& id, int p = 0) {
  SettingSpec s;
  s.id = id;
  const double r5 = 1.0 / std::sqrt(5.0);
  const std::vector<double> w5(5, r5);
  if (id == "P1") {
    s.K = 3, s.geometry = Geometry::LinearIndex, s.direction = w5, s.thresholds = {-0.3, 0.3};
  } else if (id == "P2") {
    s.K = 3, s.geometry = Geometry::LinearIndex, s.direction = w5, s.thresholds = {-0.74, 0.2};
  } else if (id == "P3") {
    s.K = 3, s.geometry = Geometry::LinearIndex, s.direction = w5, s.thresholds = {0.2, 0.6};
  } else if (id == "P4") {
    s.K = 4, s.geometry = Geometry::LinearIndex, s.direction = w5, s.thresholds = {-0.4, 0.0, 0.4};
  } else if (id == "P5") {
    s.K = 5, s.geometry = Geometry::LinearIndex, s.direction = w5, s.thresholds = {-0.5, -0.17, 0.17, 0.5};
  } else if (id == "P6") {
    s.K = 3, s.geometry = Geometry::QuadraticIndex, s.thresholds = {-0.33, 0.31}, s.loss = Loss::Quadratic;
  } else if (id == "N7") {
    s.K = 3, s.geometry = Geometry::QuarterCircleParabola;
  } else if (id == "N8") {
    s.K = 3, s.geometry = Geometry::Circles, s.thresholds = {0.4, 1.2};
  } else if (id == "N9") {
    s.K = 3, s.geometry = Geometry::SquareEllipse;
  } else if (id == "N10") {
    s.K = 4, s.geometry = Geometry::Circles, s.thresholds = {0.25, 0.7, 1.3};
  } else {
    throw DomainError("unknown setting '" + id + "'");
  }
  s.main_effect = id[0] == 'P' ? MainEffect::Linear12 : MainEffect::Constant5;
  s.p = p == 0 ? s.informative() : p;
  if (s.p < s.informative())
    throw DomainError("setting " + id + " needs p >= " + std::to_string(s.informative()));

  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int draws = 100000;
  std::vector<int> count(static_cast<std::size_t>(s.K), 0);
  Vector x = Vector::Zero(s.p);
  for (int i = 0; i < draws; ++i) {
    for (int j = 0; j < s.informative(); ++j) x(j) = u(rng);
    ++count[static_cast<std::size_t>(true_optimal(s, x) - 1)];
  }
  for (int c : count) {
    s.class_freq.push_back(static_cast<double>(c) / draws);
    if (c < draws / 100) throw std::logic_error("setting " + id + " leaves a class below 1%");
  }
  return s;
}

/// X ~ U[-1,1]^p, A ~ U{1..K}, Y ~ N(mu(X) - loss(A, D*(X)), 1); prop = 1/K.
inline TrialDataset generate(const SettingSpec& spec, int n, std::uint64_t seed) {
  if (n < 1) throw DomainError("generate: n must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> arm(1, spec.K);
  std::normal_distribution<double> z(0.0, 1.0);
  Matrix X(n, spec.p);
  std::vector<int> a(static_cast<std::size_t>(n)), d(static_cast<std::size_t>(n));
  Vector y(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < spec.p; ++j) X(i, j) = u(rng);
    const Vector xi = X.row(i).transpose();
    const auto ui = static_cast<std::size_t>(i);
    a[ui] = arm(rng);
    d[ui] = true_optimal(spec, xi);
    y(i) = main_effect(spec, xi) - loss(spec, a[ui], d[ui]) + z(rng);
  }
  return TrialDataset(std::move(X), std::move(a), std::move(y), spec.K, Vector::Constant(n, 1.0 / spec.K),
                      std::move(d));
}

inline std::string describe_geometry(const SettingSpec& s) {
  auto list = [](const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + format_double(v[i]);
    return out;
  };
  switch (s.geometry) {
    case Geometry::LinearIndex: return "linear index w.x, w=(" + list(s.direction) + "), thresholds {" + list(s.thresholds) + "}";
    case Geometry::QuadraticIndex:
      return "index (x1+x2+x3)/sqrt(3)+x4^2+x5^2-2/3, thresholds {" + list(s.thresholds) + "}";
    case Geometry::QuarterCircleParabola:
      return "class 1 if u1^2+u2^2<0.64 with u=(x+1)/2; else class 3 above x2=x1^2-0.3, class 2 below";
    case Geometry::Circles: return "concentric circles x1^2+x2^2 at squared radii {" + list(s.thresholds) + "}";
    case Geometry::SquareEllipse: return "class 1 inside max(|x1|,|x2|)<0.5; class 2 inside x1^2/1.21+x2^2/0.64<1; else 3";
  }
  return {};
}

/// Sidecar text echoing the design constants.
inline void write_setting_manifest(std::ostream& out, const SettingSpec& s) {
  out << "setting " << s.id << '\n';
  out << "K " << s.K << '\n';
  out << "p " << s.p << " (informative " << s.informative() << ", noise " << s.p - s.informative() << ")\n";
  out << "boundary " << describe_geometry(s) << '\n';
  out << "main_effect " << (s.main_effect == MainEffect::Linear12 ? "5 + x1 + 2*x2" : "5") << '\n';
  out << "loss " << (s.loss == Loss::Absolute ? "absolute |a-d|" : "quadratic (a-d)^2") << '\n';
  out << "covariates U[-1,1]; arms uniform 1..K; outcome N(mu - loss, 1)\n";
  out << "class_frequencies";
  for (double f : s.class_freq) out << ' ' << format_double(f);
  out << '\n';
}

}  // namespace srlearn
