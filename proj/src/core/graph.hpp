#pragma once

#include "core/matrix.hpp"

namespace sida {

/// All-pairs Euclidean distances: symmetric, zero diagonal.
Matrix pairwise_distances(const Matrix& points);

/// Binary K-nearest-neighbour adjacency, symmetrized by union: edge (i, j)
/// exists iff j is among i's K nearest (self excluded) or vice versa.
/// Distance ties break toward the lower index. Requires 1 <= K < n.
Matrix knn_adjacency(const Matrix& points, int k);

/// Same edge set, with Gaussian kernel weights exp(-d^2 / (2 sigma^2)).
/// sigma <= 0 selects the median edge distance.
Matrix knn_adjacency_gaussian(const Matrix& points, int k, double sigma = 0.0);

/// Median of the off-diagonal entries of a symmetric distance matrix.
double median_offdiagonal(const Matrix& distances);

}  // namespace sida
