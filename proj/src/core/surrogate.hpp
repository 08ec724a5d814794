#pragma once

#include <atomic>
#include <cstdint>
#include <functional>

#include "core/matrix.hpp"

namespace sida {

struct LaplacianPair {
  Matrix adjacency;
  std::vector<double> degrees;
  Matrix laplacian;  // I - D^{-1/2} A D^{-1/2}
};

/// Requires A symmetric, non-negative, zero diagonal, no isolated vertex.
LaplacianPair normalized_laplacian(const Matrix& adjacency);

struct LaplacianLoss {
  double loss = 0.0;  // Tr(W^T L W) >= 0
  Matrix grad;        // 2 L W
};

LaplacianLoss laplacian_loss_grad(const Matrix& weights, const Matrix& laplacian);

struct SurrogateConfig {
  int knn_k = 3;
  int update_steps = 3;       // T
  double eta1 = 0.5;          // Laplacian direction step
  double eta2 = 0.05;         // gated MI direction step
  double theta_percentile = 80.0;
  bool gaussian_adjacency = false;
  int kmeans_max_iters = 100;
};

void validate(const SurrogateConfig& cfg);

/// Weight matrix from K-means seeded at the per-class centroids (cluster j
/// is class j by construction). Points farther from their center than the
/// theta percentile of nearest-center distances are filtered out before
/// column normalization; a column losing all mass falls back to a point
/// mass on the target feature nearest its centroid. percentile >= 100
/// disables the filter.
Matrix init_weights(const Matrix& target_features, const Matrix& class_centroids,
                    double theta_percentile, int kmeans_max_iters = 100);

/// T projected descent steps: d1 = -grad_Laplacian,
/// d2 = -|grad_Laplacian| (.) grad_MI, W <- project(W + eta1 d1 + eta2 d2).
/// Both gradients are recomputed from the current W at every step. Column
/// invariants are enforced after each step.
Matrix update_weights(Matrix weights, const Matrix& laplacian,
                      const std::function<Matrix(const Matrix&)>& mi_grad,
                      const SurrogateConfig& cfg);

/// Throws unless every entry is in [0, 1] and every column sums to 1
/// within 1e-9.
void check_surrogate_invariants(const Matrix& weights);

/// Counts update_weights invocations, for flag-isolation tests.
std::atomic<std::uint64_t>& surrogate_update_counter();

}  // namespace sida
