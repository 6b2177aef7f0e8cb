#include <catch_amalgamated.hpp>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

#include "srlearn/kernels.hpp"
#include "test_util.hpp"

using namespace srlearn;
using Catch::Approx;

TEST_CASE("kernel_eval examples", "[kernels]") {
  Vector u(2), v(2);
  u << 1, 2;
  v << 3, -1;
  CHECK(kernel_eval(KernelSpec::linear(), u, v) == 1.0);
  CHECK(kernel_eval(KernelSpec::gaussian(0.7), u, u) == 1.0);

  // |u - w|^2 = 2 sigma^2
  const double sigma = 0.8;
  Vector w = u;
  w(0) += sigma * std::sqrt(2.0);
  CHECK(kernel_eval(KernelSpec::gaussian(sigma), u, w) == Approx(std::exp(-1.0)).epsilon(1e-14));

  Vector x3(3);
  x3 << 1, 2, 3;
  CHECK_THROWS_AS(kernel_eval(KernelSpec::linear(), u, x3), DomainError);
  CHECK_THROWS_AS(KernelSpec::gaussian(0.0), DomainError);
  CHECK_THROWS_AS(KernelSpec::gaussian(-1.0), DomainError);
}

TEST_CASE("gram_matrix examples", "[kernels]") {
  std::mt19937_64 rng(3);
  const Matrix A = testutil::uniform_matrix(rng, 3, 2);
  const Matrix G = gram_matrix(KernelSpec::gaussian(0.5), A);
  CHECK((G.diagonal().array() == 1.0).all());
  CHECK(G(0, 1) == G(1, 0));
  CHECK(G(0, 2) == G(2, 0));

  CHECK(gram_matrix(KernelSpec::linear(), Matrix::Identity(4, 4)) == Matrix::Identity(4, 4));

  const Matrix B = testutil::uniform_matrix(rng, 5, 2);
  const Matrix C = gram_matrix(KernelSpec::gaussian(1.3), A, B);
  REQUIRE(C.rows() == 3);
  REQUIRE(C.cols() == 5);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 5; ++j)
      CHECK(C(i, j) == Approx(kernel_eval(KernelSpec::gaussian(1.3), A.row(i), B.row(j))).epsilon(1e-12));
  CHECK_THROWS_AS(gram_matrix(KernelSpec::linear(), A, Matrix::Zero(2, 3)), DomainError);
}

TEST_CASE("Gaussian values lie in (0, 1] and gram matrices are PSD", "[kernels][property]") {
  std::mt19937_64 rng(17);
  for (int rep = 0; rep < 40; ++rep) {
    const int m = 2 + rep % 30, p = 1 + rep % 5;
    const Matrix A = testutil::uniform_matrix(rng, m, p, -2.0, 2.0);
    const double sigma = 0.5 + 0.2 * (rep % 9);  // keeps exp(-d^2 / 2 sigma^2) above underflow
    for (const KernelSpec k : {KernelSpec::linear(), KernelSpec::gaussian(sigma)}) {
      const Matrix G = gram_matrix(k, A);
      CHECK(G == G.transpose());
      const Eigen::SelfAdjointEigenSolver<Matrix> es(G, Eigen::EigenvaluesOnly);
      CHECK(es.eigenvalues().minCoeff() >= -1e-8 * std::max(1.0, G.norm()));
      if (k.kind == KernelKind::Gaussian) {
        CHECK(G.minCoeff() > 0.0);
        CHECK(G.maxCoeff() <= 1.0);
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < m; ++j)
            if (i != j && A.row(i) != A.row(j)) CHECK(kernel_eval(k, A.row(i), A.row(j)) < 1.0);
      }
    }
  }
}

TEST_CASE("median_bandwidth examples", "[kernels]") {
  Matrix two(2, 2);
  two << 0, 0, 2, 0;
  CHECK(median_bandwidth(two) == 2.0);

  Matrix line(3, 1);
  line << 0, 1, 3;
  CHECK(median_bandwidth(line) == 2.0);

  Matrix four(4, 1);
  four << 0, 1, 3, 7;  // distances 1 2 3 4 6 7
  CHECK(median_bandwidth(four) == 3.5);

  CHECK_THROWS_AS(median_bandwidth(Matrix::Ones(5, 2)), DomainError);
  CHECK_THROWS_AS(median_bandwidth(Matrix::Ones(1, 2)), DomainError);
}

TEST_CASE("median_bandwidth subsampling is seeded", "[kernels]") {
  std::mt19937_64 rng(23);
  const Matrix X = testutil::uniform_matrix(rng, 1500, 2);
  const double a = median_bandwidth(X, 4), b = median_bandwidth(X, 4);
  CHECK(a == b);
  // close to the full-sample value on uniform data
  CHECK(a == Approx(median_bandwidth(X, 0, 1500)).epsilon(0.03));
  CHECK(median_bandwidth(X.topRows(10), 4) == median_bandwidth(X.topRows(10), 99));
}
