#pragma once

#include <vector>

#include "core/matrix.hpp"

namespace sida {

struct KmeansResult {
  std::vector<int> assignments;
  Matrix centers;
};

/// Lloyd iterations from the given centers. Ties go to the lower center
/// index; a cluster that empties keeps its previous center. Deterministic.
KmeansResult kmeans(const Matrix& points, const Matrix& init_centers, int max_iters);

/// Sum of squared distances from each point to its assigned center.
double kmeans_objective(const Matrix& points, const KmeansResult& result);

}  // namespace sida
