#include "core/kmeans.hpp"

#include "core/errors.hpp"

namespace sida {
namespace {

int nearest_center(const Matrix& centers, std::span<const double> point) {
  int best = 0;
  double best_d2 = squared_distance(point, centers.row_span(0));
  for (std::size_t c = 1; c < centers.rows(); ++c) {
    const double d2 = squared_distance(point, centers.row_span(c));
    if (d2 < best_d2) {
      best_d2 = d2;
      best = static_cast<int>(c);
    }
  }
  return best;
}

}  // namespace

KmeansResult kmeans(const Matrix& points, const Matrix& init_centers, int max_iters) {
  require(points.rows() > 0, "kmeans: empty point set");
  require(init_centers.rows() > 0, "kmeans: no centers");
  require(points.cols() == init_centers.cols(), "kmeans: dimensionality mismatch");
  require(max_iters >= 0, "kmeans: negative max_iters");

  const std::size_t n = points.rows();
  const std::size_t k = init_centers.rows();
  const std::size_t d = points.cols();

  KmeansResult result;
  result.centers = init_centers;
  result.assignments.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    result.assignments[i] = nearest_center(result.centers, points.row_span(i));

  for (int iter = 0; iter < max_iters; ++iter) {
    Matrix sums(k, d);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const int a = result.assignments[i];
      counts[a] += 1;
      for (std::size_t j = 0; j < d; ++j) sums(a, j) += points(i, j);
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;  // empty cluster keeps its center
      for (std::size_t j = 0; j < d; ++j)
        result.centers(c, j) = sums(c, j) / static_cast<double>(counts[c]);
    }

    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      const int a = nearest_center(result.centers, points.row_span(i));
      if (a != result.assignments[i]) {
        result.assignments[i] = a;
        changed = true;
      }
    }
    if (!changed) break;
  }
  return result;
}

double kmeans_objective(const Matrix& points, const KmeansResult& result) {
  double total = 0.0;
  for (std::size_t i = 0; i < points.rows(); ++i)
    total += squared_distance(points.row_span(i),
                              result.centers.row_span(result.assignments[i]));
  return total;
}

}  // namespace sida
