#include <doctest.h>

#include <algorithm>

#include "coralign/alignment.hpp"
#include "coralign/rng.hpp"
#include "oracles.hpp"

using namespace coralign;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double span = 1.0) {
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows * cols; ++i) {
    m.data()[i] = rng.uniform(-span, span);
  }
  return m;
}

Matrix permute_rows(const Matrix& m, Rng& rng) {
  std::vector<std::size_t> order(m.rows());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);
  return gather_rows(m, order);
}

}  // namespace

TEST_CASE("coral loss vanishes on identical batches") {
  Rng rng(1);
  const Matrix x = random_matrix(6, 4, rng);
  CHECK(coral_loss(x, x) == 0.0);
}

TEST_CASE("coral loss hand-computed example") {
  // cov(first) = [[2,0],[0,0]], cov(second) = 0, gap 4, d = 2 -> 4 / 16.
  const Matrix first = Matrix::from_rows({{1, 0}, {-1, 0}});
  const Matrix second = Matrix::from_rows({{0, 0}, {0, 0}});
  CHECK(coral_loss(first, second) == doctest::Approx(0.25));
}

TEST_CASE("coral loss is invariant to row permutations") {
  Rng rng(2);
  const Matrix first = random_matrix(8, 5, rng);
  const Matrix second = random_matrix(6, 5, rng);
  const double base = coral_loss(first, second);
  for (int trial = 0; trial < 5; ++trial) {
    const double permuted = coral_loss(permute_rows(first, rng), permute_rows(second, rng));
    CHECK(permuted == doctest::Approx(base).epsilon(1e-12));
  }
  CHECK(coral_loss(permute_rows(first, rng), first) == doctest::Approx(0.0));
}

TEST_CASE("coral loss preconditions") {
  CHECK_THROWS_AS(coral_loss(Matrix(1, 3), Matrix(4, 3)), DegenerateBatch);
  CHECK_THROWS_AS(coral_loss(Matrix(4, 3), Matrix(4, 2)), ShapeError);
}

TEST_CASE("coral grad is zero when covariances agree") {
  Rng rng(3);
  const Matrix x = random_matrix(7, 4, rng);
  Rng rng2(3);
  const Matrix y = permute_rows(x, rng2);
  const PairGrads grads = coral_grad(x, y);
  for (double v : grads.first.values()) CHECK(std::abs(v) < 1e-14);
  for (double v : grads.second.values()) CHECK(std::abs(v) < 1e-14);
}

TEST_CASE("coral grad on an all-zero batch is zero") {
  Rng rng(4);
  const Matrix zero(8, 5);
  const Matrix other = random_matrix(6, 5, rng);
  const PairGrads grads = coral_grad(zero, other);
  for (double v : grads.first.values()) CHECK(v == 0.0);
}

TEST_CASE("coral grad matches central finite differences on 20 seeds") {
  const double eps = 1e-5;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    const Matrix first = random_matrix(8, 5, rng);
    const Matrix second = random_matrix(6, 5, rng);
    const PairGrads grads = coral_grad(first, second);

    double worst = 0.0;
    for (std::size_t r = 0; r < first.rows(); ++r) {
      for (std::size_t c = 0; c < first.cols(); ++c) {
        const double fd = oracles::central_difference(
            [&](const Matrix& m) { return coral_loss(m, second); }, first, r, c, eps);
        worst = std::max(worst, oracles::rel_err(grads.first(r, c), fd));
      }
    }
    for (std::size_t r = 0; r < second.rows(); ++r) {
      for (std::size_t c = 0; c < second.cols(); ++c) {
        const double fd = oracles::central_difference(
            [&](const Matrix& m) { return coral_loss(first, m); }, second, r, c, eps);
        worst = std::max(worst, oracles::rel_err(grads.second(r, c), fd));
      }
    }
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("mmd loss basics") {
  const Matrix one = Matrix::from_rows({{1}, {1}});
  CHECK(mmd_loss(one, one, 1.0, 2) <= 1e-12);

  // k(x,x)=1, k(y,y)=0, k(x,y)=0 under (x.y)^2.
  const Matrix x = Matrix::from_rows({{1}});
  const Matrix y = Matrix::from_rows({{0}});
  CHECK(mmd_loss(x, y, 0.0, 2) == doctest::Approx(1.0));

  CHECK_THROWS_AS(mmd_loss(Matrix(2, 2), Matrix(2, 3)), ShapeError);
}

TEST_CASE("mmd loss is symmetric and non-negative") {
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix a = random_matrix(5, 3, rng);
    const Matrix b = random_matrix(7, 3, rng);
    const double ab = mmd_loss(a, b);
    CHECK(ab == doctest::Approx(mmd_loss(b, a)).epsilon(1e-12));
    CHECK(ab >= 0.0);
  }
}

TEST_CASE("mmd grad matches finite differences away from the clamp") {
  const double eps = 1e-6;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Rng rng(seed);
    Matrix first = random_matrix(4, 3, rng);
    const Matrix second = random_matrix(5, 3, rng);
    // Shift one batch so the squared MMD is comfortably positive.
    for (std::size_t i = 0; i < first.values().size(); ++i) first.data()[i] += 1.0;
    REQUIRE(mmd_loss(first, second) > 1e-3);

    const PairGrads grads = mmd_grad(first, second);
    double worst = 0.0;
    for (std::size_t r = 0; r < first.rows(); ++r) {
      for (std::size_t c = 0; c < first.cols(); ++c) {
        const double fd = oracles::central_difference(
            [&](const Matrix& m) { return mmd_loss(m, second); }, first, r, c, eps);
        worst = std::max(worst, oracles::rel_err(grads.first(r, c), fd, 1e-6));
      }
    }
    for (std::size_t r = 0; r < second.rows(); ++r) {
      for (std::size_t c = 0; c < second.cols(); ++c) {
        const double fd = oracles::central_difference(
            [&](const Matrix& m) { return mmd_loss(first, m); }, second, r, c, eps);
        worst = std::max(worst, oracles::rel_err(grads.second(r, c), fd, 1e-6));
      }
    }
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("mmd kernel scale conditions wide inputs") {
  Rng rng(8);
  Matrix a = random_matrix(6, 50, rng, 3.0);
  const Matrix b = random_matrix(7, 50, rng, 3.0);
  for (std::size_t i = 0; i < a.values().size(); ++i) a.data()[i] += 0.5;
  const double scale = 1.0 / 50.0;
  const double loss = mmd_loss(a, b, 1.0, 2, scale);
  CHECK(loss > 0.0);
  CHECK(loss < 10.0);

  // Gradient stays consistent with finite differences under the scale.
  const PairGrads grads = mmd_grad(a, b, 1.0, 2, scale);
  const double eps = 1e-6;
  double worst = 0.0;
  for (std::size_t r = 0; r < 2; ++r) {
    for (std::size_t c = 0; c < 5; ++c) {
      const double fd = oracles::central_difference(
          [&](const Matrix& m) { return mmd_loss(m, b, 1.0, 2, scale); }, a, r, c, eps);
      worst = std::max(worst, oracles::rel_err(grads.first(r, c), fd, 1e-8));
    }
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("triplet loss examples") {
  // Anchors equal positives, negatives at distance >= margin: hinge inactive.
  const Matrix a = Matrix::from_rows({{0, 0}, {1, 1}});
  const Matrix n = Matrix::from_rows({{5, 0}, {1, 7}});
  CHECK(triplet_loss(a, a, n, 0.5) == 0.0);

  // 0.5 + 1 - 1.
  CHECK(triplet_loss(Matrix::from_rows({{0}}), Matrix::from_rows({{1}}),
                     Matrix::from_rows({{1}}), 0.5) == doctest::Approx(0.5));

  // margin 0, positives equal negatives.
  CHECK(triplet_loss(a, n, n, 0.0) == 0.0);

  CHECK_THROWS_AS(triplet_loss(Matrix(2, 2), Matrix(2, 3), Matrix(2, 2), 1.0),
                  ShapeError);
}

TEST_CASE("triplet loss is non-negative and non-increasing in negative distance") {
  Rng rng(6);
  const Matrix a = random_matrix(4, 3, rng);
  const Matrix p = random_matrix(4, 3, rng);
  Matrix n = random_matrix(4, 3, rng);
  double previous = triplet_loss(a, p, n, 1.0);
  CHECK(previous >= 0.0);
  // Push negatives radially away from their anchors; loss must not grow.
  for (int step = 0; step < 4; ++step) {
    for (std::size_t r = 0; r < n.rows(); ++r) {
      for (std::size_t c = 0; c < n.cols(); ++c) {
        n(r, c) = a(r, c) + (n(r, c) - a(r, c)) * 2.0;
      }
    }
    const double current = triplet_loss(a, p, n, 1.0);
    CHECK(current <= previous + 1e-12);
    previous = current;
  }
}

TEST_CASE("triplet grad matches finite differences on active hinges") {
  const double eps = 1e-6;
  Rng rng(7);
  const Matrix a = random_matrix(5, 4, rng);
  const Matrix p = random_matrix(5, 4, rng);
  const Matrix n = random_matrix(5, 4, rng);
  const double margin = 2.0;  // wide margin keeps every hinge active
  const TripletGrads grads = triplet_grad(a, p, n, margin);

  auto check_block = [&](const Matrix& grad, const Matrix& base, int which) {
    for (std::size_t r = 0; r < base.rows(); ++r) {
      for (std::size_t c = 0; c < base.cols(); ++c) {
        const double fd = oracles::central_difference(
            [&](const Matrix& m) {
              return triplet_loss(which == 0 ? m : a, which == 1 ? m : p,
                                  which == 2 ? m : n, margin);
            },
            base, r, c, eps);
        CHECK(oracles::rel_err(grad(r, c), fd, 1e-6) < 1e-4);
      }
    }
  };
  check_block(grads.anchors, a, 0);
  check_block(grads.positives, p, 1);
  check_block(grads.negatives, n, 2);
}

TEST_CASE("alignment config validation") {
  AlignmentConfig bad_margin;
  bad_margin.kind = AlignmentKind::Triplet;
  bad_margin.triplet_margin = 0.0;
  CHECK_THROWS_AS(bad_margin.validate(), ConfigError);

  AlignmentConfig bad_degree;
  bad_degree.kind = AlignmentKind::Mmd;
  bad_degree.mmd_degree = 0;
  CHECK_THROWS_AS(bad_degree.validate(), ConfigError);

  CHECK(parse_alignment("coral") == AlignmentKind::Coral);
  CHECK_THROWS_AS(parse_alignment("banana"), ConfigError);
}
