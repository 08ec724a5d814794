#include "core/mi.hpp"

#include <algorithm>
#include <cmath>

#include "core/errors.hpp"

namespace sida {

namespace {
constexpr double kExpClamp = 50.0;

double clamped_exp(double x, bool* flag) {
  if (x > kExpClamp) {
    if (flag != nullptr) *flag = true;
    x = kExpClamp;
  }
  return std::exp(x);
}
}  // namespace

void validate(const ScoreParams& p) {
  require(p.m1 <= p.m2, "score params: m1 > m2");
  require(p.sign == 1.0 || p.sign == -1.0, "score params: sign must be +1 or -1");
  require(p.eps_norm > 0.0, "score params: eps_norm must be positive");
}

double threshold(double a, double m1, double m2) {
  require(m1 <= m2, "threshold: m1 > m2");
  return std::max(m1, std::min(m2, a));
}

double score(std::span<const double> z1, std::span<const double> z2,
             const ScoreParams& params) {
  validate(params);
  const double d = std::sqrt(squared_distance(z1, z2) +
                             params.eps_norm * params.eps_norm);
  return params.sign * threshold(d, params.m1, params.m2);
}

Matrix score_matrix(const Matrix& features, const ScoreParams& params) {
  validate(params);
  const std::size_t n = features.rows();
  Matrix s(n, n);
  const double diag = params.sign * threshold(params.eps_norm, params.m1, params.m2);
  for (std::size_t i = 0; i < n; ++i) {
    s(i, i) = diag;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = score(features.row_span(i), features.row_span(j), params);
      s(i, j) = v;
      s(j, i) = v;
    }
  }
  return s;
}

Matrix build_mixture_matrix(const std::vector<int>& source_labels, int n_classes,
                            const Matrix& surrogate_weights) {
  require(n_classes >= 1, "build_mixture_matrix: bad class count");
  require(surrogate_weights.cols() == static_cast<std::size_t>(n_classes),
          "build_mixture_matrix: W column count != class count");
  const std::size_t n_s = source_labels.size();
  const std::size_t n_t = surrogate_weights.rows();

  std::vector<std::size_t> counts(n_classes, 0);
  for (int y : source_labels) {
    require(y >= 0 && y < n_classes, "build_mixture_matrix: label out of range");
    counts[y] += 1;
  }
  for (int c = 0; c < n_classes; ++c)
    require(counts[c] > 0, "build_mixture_matrix: class " + std::to_string(c) +
                               " absent from source");

  Matrix m(n_s + n_t, n_classes);
  for (std::size_t i = 0; i < n_s; ++i)
    m(i, source_labels[i]) = 0.5 / static_cast<double>(counts[source_labels[i]]);
  for (std::size_t i = 0; i < n_t; ++i)
    for (int j = 0; j < n_classes; ++j)
      m(n_s + i, j) = 0.5 * surrogate_weights(i, j);
  return m;
}

double mi_loss(const Matrix& M, const Matrix& S, int n_classes, bool* exp_clamped) {
  require(M.rows() == S.rows() && S.rows() == S.cols(), "mi_loss: shape mismatch");
  require(M.cols() == static_cast<std::size_t>(n_classes), "mi_loss: class count mismatch");
  const std::size_t n = M.rows();
  const double ny = static_cast<double>(n_classes);
  bool clamped = false;

  // joint term: (1/n_Y) sum_y m_y^T S m_y
  double joint = 0.0;
  for (int y = 0; y < n_classes; ++y) {
    for (std::size_t i = 0; i < n; ++i) {
      const double mi_ = M(i, y);
      if (mi_ == 0.0) continue;
      const double* srow = S.row(i);
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += srow[j] * M(j, y);
      joint += mi_ * acc;
    }
  }
  joint /= ny;

  // marginal term: (1/(e n_Y^2)) u^T e^S u with u = M 1
  const std::vector<double> u = M.row_sums();
  double marginal = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (u[i] == 0.0) continue;
    const double* srow = S.row(i);
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += clamped_exp(srow[j], &clamped) * u[j];
    marginal += u[i] * acc;
  }
  marginal *= std::exp(-1.0) / (ny * ny);

  if (exp_clamped != nullptr) *exp_clamped = clamped;
  return -(joint - marginal);
}

Matrix mi_grad_w(const Matrix& M, const Matrix& S, int n_classes,
                 std::size_t n_source) {
  mi_call_counters().grad_w.fetch_add(1, std::memory_order_relaxed);
  require(M.rows() == S.rows() && S.rows() == S.cols(), "mi_grad_w: shape mismatch");
  require(M.cols() == static_cast<std::size_t>(n_classes), "mi_grad_w: class count mismatch");
  require(n_source < M.rows(), "mi_grad_w: no target rows");
  const std::size_t n = M.rows();
  const std::size_t n_t = n - n_source;

  const double ny = static_cast<double>(n_classes);
  const std::vector<double> u = M.row_sums();

  const Matrix sm = matmul(S, M);
  std::vector<double> esu(n, 0.0);  // e^S u
  bool clamped = false;
  for (std::size_t i = 0; i < n; ++i) {
    const double* srow = S.row(i);
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += clamped_exp(srow[j], &clamped) * u[j];
    esu[i] = acc;
  }

  // (0, I) selects the target block; the 1/2 chain factor through
  // M = 1/2 [P; W] cancels the leading 2 of the full gradient.
  Matrix grad(n_t, static_cast<std::size_t>(n_classes));
  const double marg_coeff = std::exp(-1.0) / (ny * ny);
  for (std::size_t i = 0; i < n_t; ++i)
    for (int y = 0; y < n_classes; ++y)
      grad(i, y) = -(sm(n_source + i, y) / ny - marg_coeff * esu[n_source + i]);
  return grad;
}

Matrix mi_grad_features(const Matrix& features, const Matrix& M,
                        const ScoreParams& params, int n_classes, double* loss_out) {
  mi_call_counters().grad_features.fetch_add(1, std::memory_order_relaxed);
  validate(params);
  require(features.rows() == M.rows(), "mi_grad_features: row count mismatch");
  require(M.cols() == static_cast<std::size_t>(n_classes),
          "mi_grad_features: class count mismatch");

  const std::size_t n = features.rows();
  const std::size_t d = features.cols();
  const double ny = static_cast<double>(n_classes);
  const double marg_coeff = std::exp(-1.0) / (ny * ny);
  const std::vector<double> u = M.row_sums();

  Matrix grad(n, d);
  double joint_acc = 0.0;
  double marginal_acc = 0.0;

  // diagonal contributes to the loss but never to the gradient
  {
    const double sdiag =
        params.sign * threshold(params.eps_norm, params.m1, params.m2);
    const double ediag = clamped_exp(sdiag, nullptr);
    for (std::size_t i = 0; i < n; ++i) {
      double mm = 0.0;
      for (int y = 0; y < n_classes; ++y) mm += M(i, y) * M(i, y);
      joint_acc += mm * sdiag;
      marginal_acc += u[i] * u[i] * ediag;
    }
  }

  std::vector<double> diff(d);
  for (std::size_t i = 0; i < n; ++i) {
    const double* zi = features.row(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      const double* zj = features.row(j);
      double d2 = params.eps_norm * params.eps_norm;
      for (std::size_t k = 0; k < d; ++k) {
        diff[k] = zi[k] - zj[k];
        d2 += diff[k] * diff[k];
      }
      const double dist = std::sqrt(d2);
      const double clamped_dist = std::max(params.m1, std::min(params.m2, dist));
      const double s_ij = params.sign * clamped_dist;
      const double e_ij = clamped_exp(s_ij, nullptr);

      double mm = 0.0;  // (M M^T)_ij
      for (int y = 0; y < n_classes; ++y) mm += M(i, y) * M(j, y);
      const double uu = u[i] * u[j];

      joint_acc += 2.0 * mm * s_ij;
      marginal_acc += 2.0 * uu * e_ij;

      if (dist <= params.m1 || dist >= params.m2) continue;  // saturated clamp

      // dL/dS_ij (+ the symmetric S_ji term) times dS_ij/ddist / dist
      const double dl_ds = -(mm / ny) + marg_coeff * uu * e_ij;
      const double coeff = 2.0 * dl_ds * params.sign / dist;
      double* gi = grad.row(i);
      double* gj = grad.row(j);
      for (std::size_t k = 0; k < d; ++k) {
        const double c = coeff * diff[k];
        gi[k] += c;
        gj[k] -= c;
      }
    }
  }

  if (loss_out != nullptr)
    *loss_out = -(joint_acc / ny - marg_coeff * marginal_acc);
  return grad;
}

double nwj_estimate(std::span<const double> joint_values,
                    std::span<const double> marginal_values, bool* clamped) {
  require(!joint_values.empty() && !marginal_values.empty(),
          "nwj_estimate: empty sample set");
  bool flag = false;
  double joint = 0.0;
  for (double v : joint_values) joint += v;
  joint /= static_cast<double>(joint_values.size());
  double marginal = 0.0;
  for (double v : marginal_values) marginal += clamped_exp(v, &flag);
  marginal /= static_cast<double>(marginal_values.size());
  if (clamped != nullptr) *clamped = flag;
  return joint - std::exp(-1.0) * marginal;
}

double nwj_estimate_weighted(std::span<const double> joint_values,
                             std::span<const double> joint_weights,
                             std::span<const double> marginal_values,
                             std::span<const double> marginal_weights,
                             bool* clamped) {
  require(joint_values.size() == joint_weights.size() &&
              marginal_values.size() == marginal_weights.size(),
          "nwj_estimate_weighted: weight length mismatch");
  require(!joint_values.empty() && !marginal_values.empty(),
          "nwj_estimate_weighted: empty sample set");
  bool flag = false;
  double joint = 0.0;
  for (std::size_t i = 0; i < joint_values.size(); ++i)
    joint += joint_weights[i] * joint_values[i];
  double marginal = 0.0;
  for (std::size_t i = 0; i < marginal_values.size(); ++i)
    marginal += marginal_weights[i] * clamped_exp(marginal_values[i], &flag);
  if (clamped != nullptr) *clamped = flag;
  return joint - std::exp(-1.0) * marginal;
}

double discrete_mi_oracle(const Matrix& joint_table) {
  require(!joint_table.empty(), "discrete_mi_oracle: empty table");
  double total = 0.0;
  for (std::size_t i = 0; i < joint_table.size(); ++i) {
    const double p = joint_table.data()[i];
    require(p >= 0.0, "discrete_mi_oracle: negative entry");
    total += p;
  }
  require(std::abs(total - 1.0) <= 1e-9, "discrete_mi_oracle: table not normalized");

  const std::vector<double> row = joint_table.row_sums();
  const std::vector<double> col = joint_table.col_sums();
  double mi = 0.0;
  for (std::size_t i = 0; i < joint_table.rows(); ++i) {
    for (std::size_t j = 0; j < joint_table.cols(); ++j) {
      const double p = joint_table(i, j);
      if (p <= 0.0) continue;
      mi += p * std::log(p / (row[i] * col[j]));
    }
  }
  return mi;
}

MiCallCounters& mi_call_counters() {
  static MiCallCounters counters;
  return counters;
}

}  // namespace sida
