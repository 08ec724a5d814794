#include "core/graph.hpp"

#include <algorithm>
#include <cmath>

#include "core/errors.hpp"

namespace sida {

Matrix pairwise_distances(const Matrix& points) {
  require(points.all_finite(), "pairwise_distances: non-finite input");
  const std::size_t n = points.rows();
  Matrix d(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dist = euclidean_distance(points.row_span(i), points.row_span(j));
      d(i, j) = dist;
      d(j, i) = dist;
    }
  }
  return d;
}

namespace {

Matrix knn_union_edges(const Matrix& points, int k) {
  const std::size_t n = points.rows();
  require(k >= 1, "knn_adjacency: K must be >= 1");
  require(static_cast<std::size_t>(k) < n, "knn_adjacency: K must be < point count");

  const Matrix dist = pairwise_distances(points);
  Matrix adj(n, n);
  std::vector<std::pair<double, std::size_t>> order(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t m = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      order[m++] = {dist(i, j), j};
    }
    // (distance, index) pairs: equal distances resolve to the lower index
    std::nth_element(order.begin(), order.begin() + (k - 1), order.end());
    for (int s = 0; s < k; ++s) {
      const std::size_t j = order[s].second;
      adj(i, j) = 1.0;
      adj(j, i) = 1.0;
    }
  }
  return adj;
}

}  // namespace

Matrix knn_adjacency(const Matrix& points, int k) { return knn_union_edges(points, k); }

Matrix knn_adjacency_gaussian(const Matrix& points, int k, double sigma) {
  Matrix adj = knn_union_edges(points, k);
  const Matrix dist = pairwise_distances(points);
  if (sigma <= 0.0) {
    std::vector<double> edge_dists;
    for (std::size_t i = 0; i < adj.rows(); ++i)
      for (std::size_t j = i + 1; j < adj.cols(); ++j)
        if (adj(i, j) > 0.0) edge_dists.push_back(dist(i, j));
    std::sort(edge_dists.begin(), edge_dists.end());
    sigma = edge_dists.empty() ? 1.0 : edge_dists[edge_dists.size() / 2];
    if (sigma <= 0.0) sigma = 1.0;
  }
  for (std::size_t i = 0; i < adj.rows(); ++i)
    for (std::size_t j = 0; j < adj.cols(); ++j)
      if (adj(i, j) > 0.0)
        adj(i, j) = std::exp(-dist(i, j) * dist(i, j) / (2.0 * sigma * sigma));
  return adj;
}

double median_offdiagonal(const Matrix& distances) {
  const std::size_t n = distances.rows();
  std::vector<double> upper;
  upper.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) upper.push_back(distances(i, j));
  if (upper.empty()) return 0.0;
  const std::size_t mid = upper.size() / 2;
  std::nth_element(upper.begin(), upper.begin() + mid, upper.end());
  return upper[mid];
}

}  // namespace sida
