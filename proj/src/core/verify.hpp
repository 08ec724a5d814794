#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sida {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Validates the variational MI estimator against exact discrete oracles:
/// equality at the optimal critic, the lower-bound property for arbitrary
/// critics, closed forms of the matrix loss, matrix-vs-pair-sum consistency,
/// and a sampled Gaussian sanity check.
std::vector<CheckResult> mi_bench_suite(std::uint64_t seed = 7);

/// Central-finite-difference checks for every analytic gradient: encoder
/// backprop, classification and auxiliary losses, the Laplacian regularizer,
/// and both MI gradients.
std::vector<CheckResult> gradcheck_suite(std::uint64_t seed = 7);

std::string render_check_table(const std::vector<CheckResult>& checks);
int count_failures(const std::vector<CheckResult>& checks);

}  // namespace sida
