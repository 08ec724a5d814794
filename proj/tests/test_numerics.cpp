#include <doctest.h>

#include <cmath>

#include "core/errors.hpp"
#include "core/graph.hpp"
#include "core/kmeans.hpp"
#include "core/matrix.hpp"
#include "core/rng.hpp"
#include "core/simplex.hpp"
#include "oracles.hpp"

using namespace sida;

TEST_CASE("rng streams are reproducible and label-separated") {
  SeededRng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  SeededRng c(42);
  SeededRng d1 = c.derive("one");
  SeededRng d2 = c.derive("two");
  CHECK(d1.next_u64() != d2.next_u64());

  SeededRng e(43);
  SeededRng f(42);
  CHECK(e.next_u64() != f.next_u64());
}

TEST_CASE("rng gaussian moments are sane") {
  SeededRng rng(7);
  double sum = 0.0, sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double g = rng.gaussian();
    sum += g;
    sq += g * g;
  }
  CHECK(std::abs(sum / n) < 0.03);
  CHECK(std::abs(sq / n - 1.0) < 0.05);
}

TEST_CASE("simplex projection on given points") {
  const std::vector<double> already{0.2, 0.3, 0.5};
  CHECK(simplex_project(already) == already);

  const std::vector<double> dominant = simplex_project(std::vector<double>{2.0, 0.0, 0.0});
  CHECK(dominant[0] == doctest::Approx(1.0));
  CHECK(dominant[1] == doctest::Approx(0.0));
  CHECK(dominant[2] == doctest::Approx(0.0));

  const std::vector<double> uniform = simplex_project(std::vector<double>{0.5, 0.5, 0.5});
  for (double x : uniform) CHECK(x == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("simplex projection rejects non-finite input") {
  CHECK_THROWS_AS(simplex_project(std::vector<double>{1.0, std::nan("")}),
                  InvalidArgumentError);
}

TEST_CASE("simplex projection is exactly idempotent and on-simplex") {
  SeededRng rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t d = 2 + rng.uniform_index(9);
    std::vector<double> v(d);
    for (double& x : v) x = rng.uniform(-10.0, 10.0);
    const std::vector<double> p = simplex_project(v);

    double total = 0.0;
    for (double x : p) {
      CHECK(x >= 0.0);
      total += x;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(simplex_project(p) == p);
  }
}

TEST_CASE("simplex projection matches brute-force grid search in 2-3 dims") {
  SeededRng rng(12);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t d = 2 + rng.uniform_index(2);
    std::vector<double> v(d);
    for (double& x : v) x = rng.uniform(-3.0, 3.0);
    const std::vector<double> fast = simplex_project(v);
    const std::vector<double> brute = oracles::grid_simplex_project(v);
    for (std::size_t i = 0; i < d; ++i) CHECK(std::abs(fast[i] - brute[i]) <= 1e-6);
  }
}

TEST_CASE("pairwise distances: diagonal, symmetry, 3-4-5") {
  Matrix z = Matrix::from_rows({{0.0, 0.0}, {3.0, 4.0}, {1.0, 1.0}});
  const Matrix d = pairwise_distances(z);
  for (std::size_t i = 0; i < 3; ++i) CHECK(d(i, i) == 0.0);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(d(i, j) == d(j, i));
  CHECK(d(0, 1) == doctest::Approx(5.0));
}

TEST_CASE("knn adjacency hand case: 1-D points 0, 1, 3 with K=1") {
  const Matrix points = Matrix::from_rows({{0.0}, {1.0}, {3.0}});
  const Matrix a = knn_adjacency(points, 1);
  // 0 and 1 pick each other; 3 picks 1; union gives edges {0-1}, {1-3}
  CHECK(a(0, 1) == 1.0);
  CHECK(a(1, 0) == 1.0);
  CHECK(a(1, 2) == 1.0);
  CHECK(a(2, 1) == 1.0);
  CHECK(a(0, 2) == 0.0);
  CHECK(a(2, 0) == 0.0);
}

TEST_CASE("knn adjacency: K = n-1 gives the complete graph") {
  SeededRng rng(3);
  Matrix points(6, 2);
  for (std::size_t i = 0; i < points.size(); ++i) points.data()[i] = rng.gaussian();
  const Matrix a = knn_adjacency(points, 5);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j) CHECK(a(i, j) == (i == j ? 0.0 : 1.0));
}

TEST_CASE("knn adjacency: duplicated points stay symmetric with zero diagonal") {
  const Matrix points = Matrix::from_rows({{1.0}, {1.0}, {1.0}, {5.0}});
  const Matrix a = knn_adjacency(points, 2);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(a(i, i) == 0.0);
    for (std::size_t j = 0; j < 4; ++j) CHECK(a(i, j) == a(j, i));
  }
}

TEST_CASE("knn adjacency: symmetric, zero-diagonal on random inputs") {
  SeededRng rng(19);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = 5 + rng.uniform_index(20);
    Matrix points(n, 3);
    for (std::size_t i = 0; i < points.size(); ++i) points.data()[i] = rng.gaussian();
    const int k = 1 + static_cast<int>(rng.uniform_index(n - 1));
    const Matrix a = knn_adjacency(points, k);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(a(i, i) == 0.0);
      for (std::size_t j = 0; j < n; ++j) {
        CHECK(a(i, j) == a(j, i));
        CHECK((a(i, j) == 0.0 || a(i, j) == 1.0));
      }
    }
  }
}

TEST_CASE("knn adjacency rejects K >= n") {
  const Matrix points = Matrix::from_rows({{0.0}, {1.0}});
  CHECK_THROWS_AS(knn_adjacency(points, 2), InvalidArgumentError);
}

TEST_CASE("kmeans: zero iterations assign points to their own centers") {
  const Matrix points = Matrix::from_rows({{0.0, 0.0}, {4.0, 4.0}});
  const KmeansResult r = kmeans(points, points, 0);
  CHECK(r.assignments == std::vector<int>{0, 1});
  CHECK(r.centers == points);
}

TEST_CASE("kmeans: converged centers equal blob sample means") {
  SeededRng rng(5);
  const std::size_t per = 40;
  Matrix points(2 * per, 2);
  Matrix expected(2, 2);
  for (int blob = 0; blob < 2; ++blob) {
    const double cx = blob == 0 ? -5.0 : 5.0;
    for (std::size_t i = 0; i < per; ++i) {
      const std::size_t row = blob * per + i;
      points(row, 0) = cx + 0.3 * rng.gaussian();
      points(row, 1) = 0.3 * rng.gaussian();
      expected(blob, 0) += points(row, 0) / per;
      expected(blob, 1) += points(row, 1) / per;
    }
  }
  const Matrix init = Matrix::from_rows({{-5.0, 0.0}, {5.0, 0.0}});
  const KmeansResult r = kmeans(points, init, 50);
  for (std::size_t c = 0; c < 2; ++c)
    for (std::size_t j = 0; j < 2; ++j)
      CHECK(r.centers(c, j) == doctest::Approx(expected(c, j)).epsilon(1e-12));
}

TEST_CASE("kmeans: one point per center converges in a single iteration") {
  const Matrix points = Matrix::from_rows({{0.0}, {10.0}});
  const Matrix init = Matrix::from_rows({{-1.0}, {11.0}});
  const KmeansResult r = kmeans(points, init, 1);
  CHECK(r.centers(0, 0) == 0.0);
  CHECK(r.centers(1, 0) == 10.0);
}

TEST_CASE("kmeans objective is non-increasing in the iteration budget") {
  SeededRng rng(21);
  Matrix points(60, 2);
  for (std::size_t i = 0; i < points.size(); ++i) points.data()[i] = rng.gaussian();
  Matrix init(3, 2);
  for (std::size_t i = 0; i < init.size(); ++i) init.data()[i] = rng.gaussian();

  double prev = std::numeric_limits<double>::infinity();
  for (int iters = 0; iters <= 8; ++iters) {
    const double obj = kmeans_objective(points, kmeans(points, init, iters));
    CHECK(obj <= prev + 1e-12);
    prev = obj;
  }
}

TEST_CASE("kmeans keeps previous center when a cluster empties") {
  // the far-away center loses every point after the first update
  const Matrix points = Matrix::from_rows({{0.0}, {1.0}, {2.0}});
  const Matrix init = Matrix::from_rows({{1.0}, {100.0}});
  const KmeansResult r = kmeans(points, init, 5);
  CHECK(r.centers(1, 0) == 100.0);
  CHECK(r.assignments == std::vector<int>{0, 0, 0});
}

TEST_CASE("kmeans rejects empty point sets") {
  CHECK_THROWS_AS(kmeans(Matrix(), Matrix(1, 1), 3), InvalidArgumentError);
}
