#pragma once

#include <atomic>
#include <cstdint>
#include <span>
#include <vector>

#include "core/matrix.hpp"

namespace sida {

/// Clipped-distance critic f(z1, z2) = sign * clamp(|z1 - z2|, m1, m2).
/// The distance is smoothed as sqrt(d^2 + eps_norm^2) so it stays
/// differentiable at coincident points. sign = -1 makes same-class pairs
/// attract under bound maximization.
struct ScoreParams {
  double m1 = 0.0;
  double m2 = 1.0;
  double sign = -1.0;
  double eps_norm = 1e-8;
};

void validate(const ScoreParams& p);

double threshold(double a, double m1, double m2);
double score(std::span<const double> z1, std::span<const double> z2,
             const ScoreParams& params);

/// S[i][j] = f(z_i, z_j); symmetric, diagonal sign * clamp(eps_norm, m1, m2).
Matrix score_matrix(const Matrix& features, const ScoreParams& params);

/// Mixture class-conditional matrix M = 1/2 [P; W]. The source block P puts
/// a uniform conditional on each class's members; W is the surrogate
/// conditional over target features. Every column of M sums to 1.
Matrix build_mixture_matrix(const std::vector<int>& source_labels, int n_classes,
                            const Matrix& surrogate_weights);

/// L_MI = -((1/n_Y) Tr(M^T S M) - (1/(e n_Y^2)) 1^T M^T e^S M 1).
/// -mi_loss is the variational lower-bound estimate of the mixture MI.
/// Exponents are clamped at 50; `exp_clamped`, when given, reports whether
/// the clamp fired.
double mi_loss(const Matrix& M, const Matrix& S, int n_classes,
               bool* exp_clamped = nullptr);

/// Analytic gradient of mi_loss w.r.t. the surrogate block W (n_T x n_Y):
/// -((1/n_Y) (0, I) S M - (1/(e n_Y^2)) (0, I) e^S M 1 1^T), where the W
/// block is the bottom rows(M) - n_source rows of M.
Matrix mi_grad_w(const Matrix& M, const Matrix& S, int n_classes,
                 std::size_t n_source);

/// Gradient of mi_loss w.r.t. every feature row, chained through the clipped
/// smoothed distance. Saturated pairs contribute nothing. Also returns the
/// loss value through `loss_out` when non-null (one fused pass).
Matrix mi_grad_features(const Matrix& features, const Matrix& M,
                        const ScoreParams& params, int n_classes,
                        double* loss_out = nullptr);

/// Lower-bound estimate mean(joint) - e^{-1} mean(exp(marginal)). Critic
/// values above 50 are clamped before exponentiation and flagged.
double nwj_estimate(std::span<const double> joint_values,
                    std::span<const double> marginal_values,
                    bool* clamped = nullptr);

/// Same estimate with exact (weighted) expectations; weights must sum to 1.
double nwj_estimate_weighted(std::span<const double> joint_values,
                             std::span<const double> joint_weights,
                             std::span<const double> marginal_values,
                             std::span<const double> marginal_weights,
                             bool* clamped = nullptr);

/// Exact MI of a discrete joint table, in nats. 0 log 0 := 0.
double discrete_mi_oracle(const Matrix& joint_table);

/// Invocation counters for the two gradient entry points, used by tests to
/// verify that disabled components stay disabled.
struct MiCallCounters {
  std::atomic<std::uint64_t> grad_w{0};
  std::atomic<std::uint64_t> grad_features{0};
  void reset() {
    grad_w = 0;
    grad_features = 0;
  }
};

MiCallCounters& mi_call_counters();

}  // namespace sida
