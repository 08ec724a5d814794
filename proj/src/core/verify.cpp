#include "core/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <sstream>

#include "core/graph.hpp"
#include "core/matrix.hpp"
#include "core/mi.hpp"
#include "core/model.hpp"
#include "core/rng.hpp"
#include "core/surrogate.hpp"
#include "core/trainer.hpp"

namespace sida {
namespace {

constexpr double kFdStep = 1e-5;

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

double relative_gap(const Matrix& a, const Matrix& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a.data()[i] - b.data()[i];
    num += d * d;
    den += a.data()[i] * a.data()[i] + b.data()[i] * b.data()[i];
  }
  if (den == 0.0) return num == 0.0 ? 0.0 : 1.0;
  return std::sqrt(num) / std::sqrt(den);
}

/// Central finite differences of a scalar function over every entry of x.
Matrix finite_diff(Matrix& x, const std::function<double()>& eval) {
  Matrix grad(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x.data()[i];
    x.data()[i] = saved + kFdStep;
    const double up = eval();
    x.data()[i] = saved - kFdStep;
    const double down = eval();
    x.data()[i] = saved;
    grad.data()[i] = (up - down) / (2.0 * kFdStep);
  }
  return grad;
}

Matrix random_matrix(std::size_t rows, std::size_t cols, SeededRng& rng,
                     double scale = 1.0) {
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = scale * rng.gaussian();
  return m;
}

Matrix random_column_stochastic(std::size_t rows, std::size_t cols, SeededRng& rng) {
  Matrix w(rows, cols);
  for (std::size_t j = 0; j < cols; ++j) {
    double total = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
      w(i, j) = -std::log(1.0 - rng.uniform());
      total += w(i, j);
    }
    for (std::size_t i = 0; i < rows; ++i) w(i, j) /= total;
  }
  return w;
}

std::vector<int> cycling_labels(std::size_t n, int n_classes) {
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i % n_classes);
  return labels;
}

CheckResult gap_check(const std::string& name, double gap, double tolerance) {
  CheckResult r;
  r.name = name;
  r.passed = gap < tolerance;
  r.detail = "rel err " + fmt(gap) + " (tol " + fmt(tolerance) + ")";
  return r;
}

// ---- mi-bench helpers ---------------------------------------------------

struct TableCritics {
  std::vector<double> joint_values, joint_weights;
  std::vector<double> marginal_values, marginal_weights;
};

/// Enumerates a discrete joint with per-cell critic values: the joint
/// expectation is weighted by p(i,j), the marginal one by p(i) p(j).
TableCritics enumerate_table(const Matrix& table,
                             const std::function<double(std::size_t, std::size_t)>& critic) {
  TableCritics out;
  const std::vector<double> row = table.row_sums();
  const std::vector<double> col = table.col_sums();
  for (std::size_t i = 0; i < table.rows(); ++i) {
    for (std::size_t j = 0; j < table.cols(); ++j) {
      const double f = critic(i, j);
      out.joint_values.push_back(f);
      out.joint_weights.push_back(table(i, j));
      out.marginal_values.push_back(f);
      out.marginal_weights.push_back(row[i] * col[j]);
    }
  }
  return out;
}

double optimal_critic_value(const Matrix& table, std::size_t i, std::size_t j) {
  const std::vector<double> row = table.row_sums();
  const std::vector<double> col = table.col_sums();
  const double ratio = table(i, j) / (row[i] * col[j]);
  // zero-probability cells carry zero joint weight; a floor keeps the log finite
  return 1.0 + std::log(std::max(ratio, 1e-300));
}

CheckResult optimal_critic_check(const std::string& name, const Matrix& table) {
  const double oracle = discrete_mi_oracle(table);
  const TableCritics tc = enumerate_table(
      table, [&](std::size_t i, std::size_t j) { return optimal_critic_value(table, i, j); });
  const double estimate =
      nwj_estimate_weighted(tc.joint_values, tc.joint_weights, tc.marginal_values,
                            tc.marginal_weights);
  CheckResult r;
  r.name = name;
  r.passed = std::abs(estimate - oracle) < 1e-9;
  r.detail = "estimate " + fmt(estimate) + " vs exact " + fmt(oracle);
  return r;
}

Matrix random_joint_table(std::size_t rows, std::size_t cols, SeededRng& rng) {
  Matrix t(rows, cols);
  double total = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    t.data()[i] = -std::log(1.0 - rng.uniform());
    total += t.data()[i];
  }
  for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] /= total;
  return t;
}

double direct_pair_sum_loss(const Matrix& m, const Matrix& s, int n_classes) {
  // Eq. form written as explicit sums over every pair, no matrix algebra
  const std::size_t n = m.rows();
  const double ny = static_cast<double>(n_classes);
  double joint = 0.0;
  for (int y = 0; y < n_classes; ++y)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        joint += (1.0 / ny) * m(i, y) * m(j, y) * s(i, j);
  double marginal = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double pi = 0.0;
    for (int y = 0; y < n_classes; ++y) pi += m(i, y) / ny;
    for (std::size_t j = 0; j < n; ++j) {
      double pj = 0.0;
      for (int y = 0; y < n_classes; ++y) pj += m(j, y) / ny;
      marginal += pi * pj * std::exp(s(i, j));
    }
  }
  return -(joint - std::exp(-1.0) * marginal);
}

}  // namespace

std::vector<CheckResult> mi_bench_suite(std::uint64_t seed) {
  std::vector<CheckResult> checks;
  SeededRng rng(seed);

  const Matrix skewed = Matrix::from_rows({{0.4, 0.1}, {0.1, 0.4}});
  const Matrix diagonal = Matrix::from_rows({{0.5, 0.0}, {0.0, 0.5}});
  checks.push_back(optimal_critic_check("optimal critic equality, skewed 2x2", skewed));
  checks.push_back(optimal_critic_check("optimal critic equality, diagonal 2x2", diagonal));

  {
    // arbitrary critics can only under-estimate
    bool ok = true;
    double worst = 0.0;
    SeededRng critic_rng = rng.derive("suboptimal");
    for (int trial = 0; trial < 20; ++trial) {
      const Matrix table = random_joint_table(2, 3, critic_rng);
      const double oracle = discrete_mi_oracle(table);
      const TableCritics tc = enumerate_table(table, [&](std::size_t, std::size_t) {
        return critic_rng.uniform(-2.0, 2.0);
      });
      const double estimate =
          nwj_estimate_weighted(tc.joint_values, tc.joint_weights, tc.marginal_values,
                                tc.marginal_weights);
      worst = std::max(worst, estimate - oracle);
      if (estimate > oracle + 1e-12) ok = false;
    }
    CheckResult r;
    r.name = "lower bound holds for 20 random critics";
    r.passed = ok;
    r.detail = "max(estimate - exact) = " + fmt(worst);
    checks.push_back(r);
  }

  {
    // constant critic f = 1 on an independent joint: estimate and MI both 0
    const Matrix independent = Matrix::from_rows({{0.21, 0.09}, {0.49, 0.21}});
    const TableCritics tc =
        enumerate_table(independent, [](std::size_t, std::size_t) { return 1.0; });
    const double estimate =
        nwj_estimate_weighted(tc.joint_values, tc.joint_weights, tc.marginal_values,
                              tc.marginal_weights);
    const double oracle = discrete_mi_oracle(independent);
    CheckResult r;
    r.name = "constant critic on independent joint";
    r.passed = std::abs(estimate) < 1e-12 && std::abs(oracle) < 1e-12;
    r.detail = "estimate " + fmt(estimate) + ", exact " + fmt(oracle);
    checks.push_back(r);
  }

  {
    // closed form at constant scores: L = -(c - e^{c-1})
    SeededRng inst_rng = rng.derive("const-scores");
    bool ok = true;
    double worst = 0.0;
    for (double c : {0.0, 1.0, -0.5}) {
      const std::size_t n_s = 6, n_t = 5;
      const Matrix w = random_column_stochastic(n_t, 2, inst_rng);
      const Matrix m = build_mixture_matrix(cycling_labels(n_s, 2), 2, w);
      Matrix s(n_s + n_t, n_s + n_t, c);
      const double expected = -(c - std::exp(c - 1.0));
      const double got = mi_loss(m, s, 2);
      worst = std::max(worst, std::abs(got - expected));
      if (std::abs(got - expected) > 1e-10) ok = false;
    }
    CheckResult r;
    r.name = "matrix loss closed form at constant scores";
    r.passed = ok;
    r.detail = "max |loss - closed form| = " + fmt(worst);
    checks.push_back(r);
  }

  {
    // matrix algebra vs the direct double sum over pairs
    SeededRng inst_rng = rng.derive("pair-sum");
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
      const std::size_t n_s = 3 + inst_rng.uniform_index(10);
      const std::size_t n_t = 3 + inst_rng.uniform_index(10);
      const int n_classes = 2 + static_cast<int>(inst_rng.uniform_index(2));
      const Matrix features = random_matrix(n_s + n_t, 4, inst_rng);
      ScoreParams sp;
      sp.m2 = 2.0 * median_offdiagonal(pairwise_distances(features));
      const Matrix s = score_matrix(features, sp);
      const Matrix w = random_column_stochastic(n_t, n_classes, inst_rng);
      const Matrix m = build_mixture_matrix(cycling_labels(n_s, n_classes), n_classes, w);
      worst = std::max(worst,
                       std::abs(mi_loss(m, s, n_classes) -
                                direct_pair_sum_loss(m, s, n_classes)));
    }
    CheckResult r;
    r.name = "matrix form equals direct pair sum";
    r.passed = worst < 1e-10;
    r.detail = "max gap " + fmt(worst);
    checks.push_back(r);
  }

  {
    // sampled correlated Gaussians; the clipped-distance critic must stay
    // under the closed-form MI -0.5 log(1 - rho^2) up to sampling noise
    const double rho = 0.9;
    const double true_mi = -0.5 * std::log(1.0 - rho * rho);
    const std::size_t n = 4000;
    SeededRng g = rng.derive("gaussian");
    std::vector<double> z1(n), z2(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double a = g.gaussian();
      const double b = g.gaussian();
      z1[i] = a;
      z2[i] = rho * a + std::sqrt(1.0 - rho * rho) * b;
    }
    ScoreParams sp;
    sp.m2 = 2.0;
    std::vector<double> joint(n), marginal(n);
    std::vector<double> je(n), me(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double d1[1] = {z1[i]}, d2[1] = {z2[i]};
      joint[i] = score(d1, d2, sp);
      const double m2v[1] = {z2[(i + n / 2) % n]};  // decorrelated pairing
      marginal[i] = score(d1, m2v, sp);
      je[i] = joint[i];
      me[i] = std::exp(marginal[i]);
    }
    const double estimate = nwj_estimate(joint, marginal);
    auto stderr_of = [n](const std::vector<double>& v) {
      double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
      double var = 0.0;
      for (double x : v) var += (x - mean) * (x - mean);
      var /= (v.size() - 1);
      return std::sqrt(var / static_cast<double>(n));
    };
    const double se = stderr_of(je) + std::exp(-1.0) * stderr_of(me);
    CheckResult r;
    r.name = "sampled Gaussian estimate below closed-form MI";
    r.passed = estimate <= true_mi + 3.0 * se;
    r.detail = "estimate " + fmt(estimate) + " <= " + fmt(true_mi) + " + 3 se (" +
               fmt(se) + ")";
    checks.push_back(r);
  }

  return checks;
}

std::vector<CheckResult> gradcheck_suite(std::uint64_t seed) {
  std::vector<CheckResult> checks;
  SeededRng rng(seed);

  {
    // encoder parameter gradients and input sensitivities
    SeededRng r = rng.derive("encoder");
    EncoderParams enc = make_encoder(5, {9, 7}, 4, Activation::tanh_fn, r.derive("init"));
    Matrix x = random_matrix(6, 5, r);
    const Matrix projection = random_matrix(6, 4, r);
    auto loss = [&]() {
      const Matrix z = encode_forward(enc, x);
      double acc = 0.0;
      for (std::size_t i = 0; i < z.size(); ++i)
        acc += projection.data()[i] * z.data()[i];
      return acc;
    };
    EncodeCache cache;
    encode_forward(enc, x, &cache);
    EncoderGrads grads = zero_encoder_grads(enc);
    Matrix dx;
    encode_backward(enc, cache, projection, grads, &dx);

    double worst = relative_gap(dx, finite_diff(x, loss));
    for (std::size_t l = 0; l < enc.weights.size(); ++l) {
      worst = std::max(worst, relative_gap(grads.weights[l], finite_diff(enc.weights[l], loss)));
      worst = std::max(worst, relative_gap(grads.biases[l], finite_diff(enc.biases[l], loss)));
    }
    checks.push_back(gap_check("encoder backward matches finite differences", worst, 1e-5));
  }

  {
    SeededRng r = rng.derive("classify");
    Matrix logits = random_matrix(8, 3, r);
    const std::vector<int> labels = cycling_labels(8, 3);
    ClassifierParams id_clf;
    id_clf.weight = Matrix::identity(3);
    id_clf.bias = Matrix(1, 3);
    auto loss = [&]() {
      return classification_loss(classifier_forward(id_clf, logits).probabilities,
                                 labels)
          .loss;
    };
    const Matrix analytic =
        classification_loss(classifier_forward(id_clf, logits).probabilities, labels)
            .grad_logits;
    checks.push_back(gap_check("classification loss gradient",
                               relative_gap(analytic, finite_diff(logits, loss)), 1e-6));
  }

  {
    SeededRng r = rng.derive("auxiliary");
    Matrix logits = random_matrix(7, 3, r);
    const Matrix w = random_column_stochastic(7, 3, r);
    ClassifierParams id_clf;
    id_clf.weight = Matrix::identity(3);
    id_clf.bias = Matrix(1, 3);
    auto loss = [&]() {
      return auxiliary_loss(classifier_forward(id_clf, logits).probabilities, w).loss;
    };
    const Matrix analytic =
        auxiliary_loss(classifier_forward(id_clf, logits).probabilities, w).grad_logits;
    checks.push_back(gap_check("auxiliary loss gradient",
                               relative_gap(analytic, finite_diff(logits, loss)), 1e-6));
  }

  {
    SeededRng r = rng.derive("laplacian");
    const Matrix points = random_matrix(12, 3, r);
    const LaplacianPair lap = normalized_laplacian(knn_adjacency(points, 3));
    Matrix w = random_column_stochastic(12, 2, r);
    auto loss = [&]() { return laplacian_loss_grad(w, lap.laplacian).loss; };
    const Matrix analytic = laplacian_loss_grad(w, lap.laplacian).grad;
    checks.push_back(gap_check("laplacian regularizer gradient",
                               relative_gap(analytic, finite_diff(w, loss)), 1e-8));
  }

  {
    SeededRng r = rng.derive("mi-w");
    const std::size_t n_s = 8, n_t = 7;
    const Matrix features = random_matrix(n_s + n_t, 4, r);
    ScoreParams sp;
    sp.m2 = 2.0 * median_offdiagonal(pairwise_distances(features));
    const Matrix s = score_matrix(features, sp);
    const std::vector<int> labels = cycling_labels(n_s, 2);
    Matrix w = random_column_stochastic(n_t, 2, r);
    auto loss = [&]() { return mi_loss(build_mixture_matrix(labels, 2, w), s, 2); };
    const Matrix analytic = mi_grad_w(build_mixture_matrix(labels, 2, w), s, 2, n_s);
    checks.push_back(gap_check("MI gradient w.r.t. surrogate weights",
                               relative_gap(analytic, finite_diff(w, loss)), 1e-6));
  }

  {
    // clamp boundaries are kinks; retry until every pair sits clear of them
    SeededRng r = rng.derive("mi-features");
    Matrix features;
    ScoreParams sp;
    for (std::uint64_t attempt = 0;; ++attempt) {
      SeededRng rr = r.derive("attempt", attempt);
      features = random_matrix(10, 3, rr);
      const Matrix dist = pairwise_distances(features);
      sp.m2 = 2.0 * median_offdiagonal(dist);
      bool clear = true;
      for (std::size_t i = 0; i < dist.rows() && clear; ++i)
        for (std::size_t j = i + 1; j < dist.cols() && clear; ++j)
          if (std::abs(dist(i, j) - sp.m2) < 1e-3 || std::abs(dist(i, j) - sp.m1) < 1e-3)
            clear = false;
      if (clear) break;
    }
    const std::vector<int> labels = cycling_labels(5, 2);
    const Matrix w = random_column_stochastic(5, 2, r);
    const Matrix m = build_mixture_matrix(labels, 2, w);
    auto loss = [&]() { return mi_loss(m, score_matrix(features, sp), 2); };
    const Matrix analytic = mi_grad_features(features, m, sp, 2);
    checks.push_back(gap_check("MI gradient w.r.t. features",
                               relative_gap(analytic, finite_diff(features, loss)), 1e-4));
  }

  return checks;
}

std::string render_check_table(const std::vector<CheckResult>& checks) {
  std::ostringstream out;
  for (const CheckResult& c : checks)
    out << (c.passed ? "[PASS] " : "[FAIL] ") << c.name << ": " << c.detail << '\n';
  const int failures = count_failures(checks);
  out << (failures == 0 ? "all checks passed" : std::to_string(failures) + " check(s) failed")
      << " (" << checks.size() << " total)\n";
  return out.str();
}

int count_failures(const std::vector<CheckResult>& checks) {
  int n = 0;
  for (const CheckResult& c : checks)
    if (!c.passed) ++n;
  return n;
}

}  // namespace sida
