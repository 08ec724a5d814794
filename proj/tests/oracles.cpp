#include "oracles.hpp"

#include <algorithm>

namespace oracles {

namespace {

double sqdist(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return acc;
}

}  // namespace

std::vector<double> grid_simplex_project(const std::vector<double>& v) {
  const std::size_t d = v.size();
  if (d == 1) return {1.0};

  // refine a grid over the free coordinates around the running best
  auto clamp01 = [](double x) { return std::max(0.0, std::min(1.0, x)); };
  std::vector<double> best(d, 1.0 / static_cast<double>(d));
  double best_obj = sqdist(best, v);
  double radius = 1.0;
  const int divisions = 40;
  for (int round = 0; round < 8; ++round) {
    const std::vector<double> center = best;
    const double step = 2.0 * radius / divisions;
    if (d == 2) {
      for (int i = 0; i <= divisions; ++i) {
        const double a = clamp01(center[0] - radius + i * step);
        const std::vector<double> cand = {a, 1.0 - a};
        if (cand[1] < 0.0) continue;
        const double obj = sqdist(cand, v);
        if (obj < best_obj) {
          best_obj = obj;
          best = cand;
        }
      }
    } else {
      for (int i = 0; i <= divisions; ++i) {
        const double a = clamp01(center[0] - radius + i * step);
        for (int j = 0; j <= divisions; ++j) {
          const double b = clamp01(center[1] - radius + j * step);
          if (a + b > 1.0) continue;
          const std::vector<double> cand = {a, b, 1.0 - a - b};
          const double obj = sqdist(cand, v);
          if (obj < best_obj) {
            best_obj = obj;
            best = cand;
          }
        }
      }
    }
    radius /= 10.0;
  }
  return best;
}

double direct_pair_sum_mi_loss(const sida::Matrix& mixture, const sida::Matrix& scores,
                               int n_classes) {
  const std::size_t n = mixture.rows();
  const double ny = static_cast<double>(n_classes);
  double joint = 0.0;
  for (int y = 0; y < n_classes; ++y)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        joint += (1.0 / ny) * mixture(i, y) * mixture(j, y) * scores(i, j);

  double marginal = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double pi = 0.0;
    for (int y = 0; y < n_classes; ++y) pi += mixture(i, y) / ny;
    for (std::size_t j = 0; j < n; ++j) {
      double pj = 0.0;
      for (int y = 0; y < n_classes; ++y) pj += mixture(j, y) / ny;
      marginal += pi * pj * std::exp(scores(i, j));
    }
  }
  return -(joint - std::exp(-1.0) * marginal);
}

}  // namespace oracles
