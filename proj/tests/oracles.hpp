// Test-side oracles: brute force, finite differences, and closed forms that
// stay independent of the implementation paths they check.
#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "core/matrix.hpp"

namespace oracles {

/// Central finite differences of a scalar callable over every entry of x.
inline sida::Matrix finite_diff(sida::Matrix& x, const std::function<double()>& eval,
                                double step = 1e-5) {
  sida::Matrix grad(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x.data()[i];
    x.data()[i] = saved + step;
    const double up = eval();
    x.data()[i] = saved - step;
    const double down = eval();
    x.data()[i] = saved;
    grad.data()[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

/// Norm-relative gap between two gradients.
inline double relative_gap(const sida::Matrix& a, const sida::Matrix& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a.data()[i] - b.data()[i];
    num += d * d;
    den += a.data()[i] * a.data()[i] + b.data()[i] * b.data()[i];
  }
  if (den == 0.0) return num == 0.0 ? 0.0 : 1.0;
  return std::sqrt(num) / std::sqrt(den);
}

/// Brute-force Euclidean projection onto the simplex by refined grid search
/// over the free coordinates (dimensions 2 and 3 only).
std::vector<double> grid_simplex_project(const std::vector<double>& v);

/// Direct double-sum evaluation of the variational MI loss over all pairs:
/// no matrix algebra, exponentials unclamped.
double direct_pair_sum_mi_loss(const sida::Matrix& mixture, const sida::Matrix& scores,
                               int n_classes);

/// Exact MI of correlated standard Gaussians.
inline double gaussian_mi(double rho) { return -0.5 * std::log(1.0 - rho * rho); }

}  // namespace oracles
