#pragma once

#include <span>
#include <vector>

#include "core/matrix.hpp"

namespace sida {

/// Euclidean projection onto the probability simplex (entries >= 0, sum = 1)
/// by sort-and-threshold. The threshold step is iterated to a bitwise fixed
/// point, so project(project(v)) == project(v) exactly.
std::vector<double> simplex_project(std::span<const double> v);

/// Column-wise projection, in place.
void simplex_project_columns(Matrix& m);

}  // namespace sida
