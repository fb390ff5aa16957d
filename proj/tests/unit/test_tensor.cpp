#include <cmath>
#include <numeric>

#include "doctest.h"
#include "lasrl/errors.hpp"
#include "lasrl/tensor.hpp"
#include "support.hpp"

using namespace lasrl;

TEST_CASE("matmul and matvec agree with hand products") {
  const Matrix a{{1, 2}, {3, 4}, {5, 6}};
  const Matrix b{{1, 0, 2}, {0, 1, 3}};
  CHECK(matmul(a, b) == Matrix{{1, 2, 8}, {3, 4, 18}, {5, 6, 28}});
  CHECK(matvec(a, Vector{1, -1}) == Vector{-1, -1, -1});
  CHECK(matvec_transposed(a, Vector{1, 0, 1}) == Vector{6, 8});
  CHECK(matmul(Matrix::identity(3), a) == a);
}

TEST_CASE("add_outer accumulates a scaled outer product") {
  Matrix m(2, 2, 1.0);
  add_outer(m, Vector{1, 2}, Vector{3, 4}, 0.5);
  CHECK(m == Matrix{{2.5, 3}, {4, 5}});
}

TEST_CASE("shape mismatches raise DimensionError") {
  const Matrix a(2, 3);
  CHECK_THROWS_AS(matmul(a, a), DimensionError);
  CHECK_THROWS_AS(matvec(a, Vector{1, 2}), DimensionError);
  CHECK_THROWS_AS(matvec_transposed(a, Vector{1, 2, 3}), DimensionError);
  CHECK_THROWS_AS(Matrix(2, 2, Vector{1, 2, 3}), DimensionError);
  CHECK_THROWS_AS((Matrix{{1, 2}, {3}}), DimensionError);
}

TEST_CASE("softmax is normalized and shift invariant, even for huge logits") {
  const Vector logits{1000.0, 1001.0, 999.0};
  const Vector p = softmax(logits);
  CHECK(std::accumulate(p.begin(), p.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-15));
  const Vector q = softmax(Vector{0.0, 1.0, -1.0});
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(p[i] == doctest::Approx(q[i]).epsilon(1e-12));
  }
  const Vector lp = log_softmax(Vector{-1e4, 0.0});
  CHECK(std::isfinite(lp[0]));
  CHECK(lp[0] == doctest::Approx(-1e4).epsilon(1e-12));
}

TEST_CASE("smoothed cross-entropy: closed form and gradient") {
  Rng rng(7);
  const Vector logits = test::random_vector(rng, 6, 2.0);
  const double eps = 0.1;
  const auto ce = cross_entropy_smoothed(logits, 2, eps);
  const Vector lp = log_softmax(logits);
  double expected = 0.0;
  for (std::size_t i = 0; i < 6; ++i) {
    const double q = (i == 2 ? 1.0 - eps : 0.0) + eps / 6.0;
    expected -= q * lp[i];
  }
  CHECK(ce.loss == doctest::Approx(expected).epsilon(1e-12));

  Vector x = logits;
  const double err = test::gradcheck(x, ce.grad, [&] { return cross_entropy_smoothed(x, 2, eps).loss; });
  CHECK(err < test::kGradTol);
}

TEST_CASE("cross-entropy rejects bad gold ids and smoothing") {
  CHECK_THROWS_AS(cross_entropy_smoothed(Vector{0, 0}, 2, 0.0), IndexError);
  CHECK_THROWS_AS(cross_entropy_smoothed(Vector{0, 0}, 0, 1.0), ConfigError);
  CHECK_THROWS_AS(cross_entropy_smoothed(Vector{0, 0}, 0, -0.1), ConfigError);
}
