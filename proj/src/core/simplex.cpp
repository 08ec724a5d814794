#include "core/simplex.hpp"

#include <algorithm>
#include <cmath>

#include "core/errors.hpp"

namespace sida {
namespace {

std::vector<double> threshold_step(const std::vector<double>& v) {
  std::vector<double> sorted = v;
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  double cumulative = 0.0;
  double tau = sorted.front() - 1.0;  // support of size 1 as fallback
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    cumulative += sorted[k];
    const double candidate = (cumulative - 1.0) / static_cast<double>(k + 1);
    if (sorted[k] - candidate > 0.0) tau = candidate;
  }
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::max(v[i] - tau, 0.0);
  return out;
}

}  // namespace

std::vector<double> simplex_project(std::span<const double> v) {
  require(!v.empty(), "simplex_project: empty vector");
  for (double x : v) require(std::isfinite(x), "simplex_project: non-finite entry");

  std::vector<double> current(v.begin(), v.end());
  // One threshold pass lands within rounding error of the simplex; iterating
  // to a bitwise fixed point makes the map exactly idempotent.
  for (int pass = 0; pass < 16; ++pass) {
    std::vector<double> next = threshold_step(current);
    if (next == current) break;
    current = std::move(next);
  }
  return current;
}

void simplex_project_columns(Matrix& m) {
  std::vector<double> col(m.rows());
  for (std::size_t j = 0; j < m.cols(); ++j) {
    for (std::size_t i = 0; i < m.rows(); ++i) col[i] = m(i, j);
    const std::vector<double> projected = simplex_project(col);
    for (std::size_t i = 0; i < m.rows(); ++i) m(i, j) = projected[i];
  }
}

}  // namespace sida
