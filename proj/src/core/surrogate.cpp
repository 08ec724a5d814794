#include "core/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "core/errors.hpp"
#include "core/kmeans.hpp"
#include "core/simplex.hpp"

namespace sida {

LaplacianPair normalized_laplacian(const Matrix& adjacency) {
  const std::size_t n = adjacency.rows();
  require(n > 0 && adjacency.cols() == n, "normalized_laplacian: not square");

  LaplacianPair pair;
  pair.adjacency = adjacency;
  pair.degrees.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    require(adjacency(i, i) == 0.0, "normalized_laplacian: nonzero diagonal");
    double deg = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      require(adjacency(i, j) >= 0.0, "normalized_laplacian: negative weight");
      require(adjacency(i, j) == adjacency(j, i), "normalized_laplacian: not symmetric");
      deg += adjacency(i, j);
    }
    if (deg <= 0.0)
      throw InvalidArgumentError("normalized_laplacian: isolated vertex " +
                                 std::to_string(i));
    pair.degrees[i] = deg;
  }

  pair.laplacian = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const double di = 1.0 / std::sqrt(pair.degrees[i]);
    for (std::size_t j = 0; j < n; ++j) {
      const double v = -adjacency(i, j) * di / std::sqrt(pair.degrees[j]);
      pair.laplacian(i, j) = (i == j) ? 1.0 + v : v;
    }
  }
  return pair;
}

LaplacianLoss laplacian_loss_grad(const Matrix& weights, const Matrix& laplacian) {
  require(laplacian.rows() == laplacian.cols(), "laplacian_loss_grad: L not square");
  require(weights.rows() == laplacian.rows(), "laplacian_loss_grad: shape mismatch");

  LaplacianLoss out;
  const Matrix lw = matmul(laplacian, weights);
  double loss = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i)
    loss += weights.data()[i] * lw.data()[i];
  out.loss = std::max(loss, 0.0);  // PSD form; shave rounding noise
  out.grad = scale(lw, 2.0);
  return out;
}

void validate(const SurrogateConfig& cfg) {
  require(cfg.knn_k >= 1, "surrogate config: K must be >= 1");
  require(cfg.update_steps >= 0, "surrogate config: T must be >= 0");
  require(cfg.eta1 >= 0.0 && cfg.eta2 >= 0.0, "surrogate config: negative step size");
  require(cfg.theta_percentile >= 0.0, "surrogate config: negative percentile");
  require(cfg.kmeans_max_iters >= 0, "surrogate config: negative kmeans iters");
}

Matrix init_weights(const Matrix& target_features, const Matrix& class_centroids,
                    double theta_percentile, int kmeans_max_iters) {
  require(target_features.rows() > 0, "init_weights: no target features");
  require(class_centroids.rows() > 0, "init_weights: no class centroids");
  const std::size_t n = target_features.rows();
  const std::size_t k = class_centroids.rows();

  const KmeansResult clustering =
      kmeans(target_features, class_centroids, kmeans_max_iters);

  std::vector<double> nearest(n);
  for (std::size_t i = 0; i < n; ++i)
    nearest[i] = euclidean_distance(
        target_features.row_span(i),
        clustering.centers.row_span(clustering.assignments[i]));

  double theta = std::numeric_limits<double>::infinity();
  if (theta_percentile < 100.0) {
    // nearest-rank percentile of the nearest-center distances
    std::vector<double> sorted = nearest;
    std::sort(sorted.begin(), sorted.end());
    const double rank = theta_percentile / 100.0 * static_cast<double>(n);
    std::size_t idx = rank <= 0.0 ? 0 : static_cast<std::size_t>(std::ceil(rank)) - 1;
    idx = std::min(idx, n - 1);
    theta = sorted[idx];
  }

  Matrix w(n, k);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = static_cast<std::size_t>(clustering.assignments[i]);
    if (nearest[i] < theta) w(i, j) = 1.0;
  }

  // normalize columns; an empty column collapses to the feature nearest its
  // centroid so every class keeps a valid conditional
  for (std::size_t j = 0; j < k; ++j) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += w(i, j);
    if (total > 0.0) {
      for (std::size_t i = 0; i < n; ++i) w(i, j) /= total;
      continue;
    }
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      const double d = euclidean_distance(target_features.row_span(i),
                                          clustering.centers.row_span(j));
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    w(best, j) = 1.0;
  }

  check_surrogate_invariants(w);
  return w;
}

Matrix update_weights(Matrix weights, const Matrix& laplacian,
                      const std::function<Matrix(const Matrix&)>& mi_grad,
                      const SurrogateConfig& cfg) {
  surrogate_update_counter().fetch_add(1, std::memory_order_relaxed);
  validate(cfg);
  check_surrogate_invariants(weights);
  if (cfg.eta1 == 0.0 && cfg.eta2 == 0.0) return weights;  // identity update

  for (int step = 0; step < cfg.update_steps; ++step) {
    const Matrix grad_lap = laplacian_loss_grad(weights, laplacian).grad;
    Matrix direction = scale(grad_lap, -cfg.eta1);  // eta1 * d1
    if (cfg.eta2 != 0.0 && mi_grad) {
      const Matrix grad_mi = mi_grad(weights);
      require(grad_mi.same_shape(weights), "update_weights: MI gradient shape mismatch");
      // d2 gates the MI force by |grad_Laplacian|: entries the graph regards
      // as settled cannot move
      for (std::size_t i = 0; i < direction.size(); ++i)
        direction.data()[i] -=
            cfg.eta2 * std::abs(grad_lap.data()[i]) * grad_mi.data()[i];
    }
    axpy_inplace(weights, 1.0, direction);
    simplex_project_columns(weights);
    check_surrogate_invariants(weights);
  }
  return weights;
}

void check_surrogate_invariants(const Matrix& weights) {
  require(weights.rows() > 0 && weights.cols() > 0, "surrogate weights: empty");
  for (std::size_t j = 0; j < weights.cols(); ++j) {
    double total = 0.0;
    for (std::size_t i = 0; i < weights.rows(); ++i) {
      const double v = weights(i, j);
      if (!(v >= 0.0 && v <= 1.0))
        throw NumericError("surrogate weights: entry outside [0, 1]");
      total += v;
    }
    if (std::abs(total - 1.0) > 1e-9)
      throw NumericError("surrogate weights: column " + std::to_string(j) +
                         " sums to " + std::to_string(total));
  }
}

std::atomic<std::uint64_t>& surrogate_update_counter() {
  static std::atomic<std::uint64_t> counter{0};
  return counter;
}

}  // namespace sida
