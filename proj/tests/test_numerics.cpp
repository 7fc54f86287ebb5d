#include <doctest.h>

#include "coralign/matrix.hpp"
#include "coralign/rng.hpp"
#include "oracles.hpp"

using namespace coralign;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double span = 2.0) {
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows * cols; ++i) {
    m.data()[i] = rng.uniform(-span, span);
  }
  return m;
}

}  // namespace

TEST_CASE("covariance of a 2x2 example") {
  const Matrix x = Matrix::from_rows({{1, 2}, {3, 4}});
  const Matrix cov = covariance(x);
  CHECK(cov(0, 0) == doctest::Approx(2.0));
  CHECK(cov(0, 1) == doctest::Approx(2.0));
  CHECK(cov(1, 0) == doctest::Approx(2.0));
  CHECK(cov(1, 1) == doctest::Approx(2.0));
}

TEST_CASE("covariance of identical rows is zero") {
  Matrix x(5, 3);
  for (std::size_t r = 0; r < 5; ++r) {
    x(r, 0) = 1.5;
    x(r, 1) = -2.0;
    x(r, 2) = 7.0;
  }
  const Matrix cov = covariance(x);
  for (double v : cov.values()) CHECK(v == 0.0);
}

TEST_CASE("covariance rejects single-row batches") {
  CHECK_THROWS_AS(covariance(Matrix(1, 4)), DegenerateBatch);
  CHECK_THROWS_AS(covariance(Matrix(0, 4)), DegenerateBatch);
}

TEST_CASE("covariance matches the naive oracle on random inputs") {
  Rng rng(20240);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.below(31);
    const std::size_t d = 1 + rng.below(16);
    const Matrix x = random_matrix(n, d, rng);
    const Matrix expected = oracles::naive_covariance(x);
    const Matrix actual = covariance(x);
    REQUIRE(actual.same_shape(expected));
    for (std::size_t i = 0; i < actual.values().size(); ++i) {
      CHECK(actual.data()[i] == doctest::Approx(expected.data()[i]).epsilon(1e-10));
    }
  }
}

TEST_CASE("covariance is translation invariant") {
  Rng rng(7);
  const Matrix x = random_matrix(12, 6, rng);
  Matrix shifted = x;
  for (std::size_t r = 0; r < shifted.rows(); ++r) {
    for (std::size_t c = 0; c < shifted.cols(); ++c) {
      shifted(r, c) += 3.25 * static_cast<double>(c + 1);
    }
  }
  const Matrix a = covariance(x);
  const Matrix b = covariance(shifted);
  for (std::size_t i = 0; i < a.values().size(); ++i) {
    CHECK(oracles::rel_err(a.data()[i], b.data()[i]) < 1e-9);
  }
}

TEST_CASE("covariance scales quadratically") {
  Rng rng(8);
  const Matrix x = random_matrix(10, 4, rng);
  const double c = -2.5;
  const Matrix a = scale(covariance(x), c * c);
  const Matrix b = covariance(scale(x, c));
  for (std::size_t i = 0; i < a.values().size(); ++i) {
    CHECK(oracles::rel_err(a.data()[i], b.data()[i]) < 1e-9);
  }
}

TEST_CASE("frob_sq_diff basics") {
  const Matrix a = Matrix::from_rows({{2, 0}, {0, 0}});
  const Matrix zero(2, 2);
  CHECK(frob_sq_diff(a, a) == 0.0);
  CHECK(frob_sq_diff(a, zero) == doctest::Approx(4.0));
  CHECK(frob_sq_diff(zero, a) == doctest::Approx(4.0));
  CHECK_THROWS_AS(frob_sq_diff(Matrix(2, 2), Matrix(3, 3)), ShapeError);
}

TEST_CASE("frob_sq_diff is symmetric on random pairs") {
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = random_matrix(5, 5, rng);
    const Matrix b = random_matrix(5, 5, rng);
    CHECK(frob_sq_diff(a, b) == frob_sq_diff(b, a));
  }
}

TEST_CASE("matmul identity and shape checks") {
  Rng rng(10);
  const Matrix a = random_matrix(3, 4, rng);
  CHECK(matmul(Matrix::identity(3), a) == a);
  CHECK(matmul(a, Matrix::identity(4)) == a);
  CHECK_THROWS_AS(matmul(a, Matrix(3, 2)), ShapeError);
}

TEST_CASE("matmul matches a hand example") {
  const Matrix a = Matrix::from_rows({{1, 2}, {3, 4}});
  const Matrix b = Matrix::from_rows({{5, 6}, {7, 8}});
  const Matrix ab = matmul(a, b);
  CHECK(ab(0, 0) == 19.0);
  CHECK(ab(0, 1) == 22.0);
  CHECK(ab(1, 0) == 43.0);
  CHECK(ab(1, 1) == 50.0);
}

TEST_CASE("transpose is an involution") {
  Rng rng(11);
  const Matrix a = random_matrix(4, 7, rng);
  CHECK(transpose(transpose(a)) == a);
}

TEST_CASE("scale by zero annihilates") {
  Rng rng(12);
  const Matrix a = scale(random_matrix(3, 3, rng), 0.0);
  for (double v : a.values()) CHECK(v == 0.0);
}

TEST_CASE("add and sub are elementwise with shape checks") {
  const Matrix a = Matrix::from_rows({{1, 2}});
  const Matrix b = Matrix::from_rows({{10, 20}});
  CHECK(add(a, b) == Matrix::from_rows({{11, 22}}));
  CHECK(sub(b, a) == Matrix::from_rows({{9, 18}}));
  CHECK_THROWS_AS(add(a, Matrix(2, 2)), ShapeError);
}

TEST_CASE("matrix constructor validates data length") {
  CHECK_THROWS_AS(Matrix(2, 2, {1.0, 2.0, 3.0}), ShapeError);
}

TEST_CASE("ensure_finite flags NaN") {
  Matrix m(2, 2);
  m(1, 1) = std::nan("");
  CHECK_THROWS_AS(ensure_finite(m, "test"), ParseError);
}

TEST_CASE("rng streams are reproducible") {
  Rng a(1234), b(1234);
  for (int i = 0; i < 100; ++i) {
    CHECK(a.next_u64() == b.next_u64());
  }
  Rng c(1234), d(1235);
  CHECK(c.next_u64() != d.next_u64());
}

TEST_CASE("rng uniform lies in range and normal draws are finite") {
  Rng rng(55);
  double sum = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const double z = rng.normal();
    CHECK(std::isfinite(z));
    sum += z;
  }
  CHECK(std::abs(sum / 1000.0) < 0.15);  // loose sanity on the mean
}

TEST_CASE("rng below is bounded and hits every residue") {
  Rng rng(66);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 700; ++i) {
    const auto v = rng.below(7);
    REQUIRE(v < 7);
    ++counts[static_cast<std::size_t>(v)];
  }
  for (int c : counts) CHECK(c > 0);
}

TEST_CASE("derived seeds differ by stream") {
  CHECK(Rng::derive(42, 0) != Rng::derive(42, 1));
  CHECK(Rng::derive(42, 0) == Rng::derive(42, 0));
}
