#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "core/dataset.hpp"
#include "core/matrix.hpp"
#include "core/mi.hpp"
#include "core/model.hpp"
#include "core/surrogate.hpp"

namespace sida {

/// Config-level critic parameters; m2 is data-relative and resolved against
/// the median pairwise feature distance at the start of every epoch.
struct ScoreConfig {
  double m1 = 0.0;
  double m2_scale = 2.0;
  double sign = -1.0;
  double eps_norm = 1e-8;
};

ScoreParams resolve_score_params(const ScoreConfig& cfg, const Matrix& features);

struct TrainFlags {
  bool mi_enabled = true;
  bool sd_enabled = true;
};

struct TrainConfig {
  double alpha1 = 0.3;
  double alpha2 = 0.1;
  int epochs = 60;
  int batch = 64;
  LrSchedule lr;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  SurrogateConfig surrogate;
  ScoreConfig score;
  std::vector<int> hidden = {32, 32};
  int feature_dim = 16;
  Activation activation = Activation::tanh_fn;
  std::uint64_t seed = 1;
  int seed_count = 1;  // independent runs aggregated into one metrics row
  TrainFlags flags;
  std::string weight_dump_dir;  // when set, per-epoch surrogate W CSVs land here
};

void validate(const TrainConfig& config, const DomainPair& data);

struct EpochReport {
  int epoch = 0;
  double loss_classify = 0.0;
  double loss_mi = 0.0;
  double loss_auxiliary = 0.0;
  double loss_laplacian = 0.0;
  double loss_model = 0.0;  // classify + a1 * mi + a2 * auxiliary
  double mi_lower_bound = std::numeric_limits<double>::quiet_NaN();
  double target_accuracy = std::numeric_limits<double>::quiet_NaN();
  double wall_ms = 0.0;
};

struct TrainResult {
  EncoderParams encoder;
  ClassifierParams classifier;
  std::vector<EpochReport> epochs;
  Matrix final_weights;  // last epoch's surrogate W; empty if never built
  double final_accuracy = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t seed = 0;
};

/// One full training run. Deterministic given (config, data).
TrainResult train(const TrainConfig& config, const DomainPair& data);

struct EvalResult {
  double accuracy = 0.0;
  std::vector<double> per_class_accuracy;
  double risk = 0.0;  // 2 (1 - accuracy): L1 risk under point-mass conditionals
};

EvalResult evaluate(const EncoderParams& encoder, const ClassifierParams& classifier,
                    const UnlabeledSet& target);

/// `config.seed_count` runs with derived seeds, aggregated.
struct RunMetrics {
  std::vector<TrainResult> runs;
  double accuracy_mean = std::numeric_limits<double>::quiet_NaN();
  double accuracy_std = std::numeric_limits<double>::quiet_NaN();
  std::string flags_label;  // none | sd | mi | mi+sd
};

RunMetrics run_seeds(const TrainConfig& config, const DomainPair& data);

/// The four {MI} x {SD} cells with shared seeds, in the order
/// none, sd, mi, mi+sd.
std::array<RunMetrics, 4> ablation_grid(const TrainConfig& config, const DomainPair& data);

/// Runtime decomposition of the generalization bound. The hypothesis-family
/// divergence term has no tractable estimator here and is reported as not
/// computed.
struct BoundReport {
  double risk_source = 0.0;
  double risk_target = std::numeric_limits<double>::quiet_NaN();
  double mi_estimate = 0.0;  // lower-bound estimate of the mixture MI
  double mi_term = 0.0;      // -4 * mi_estimate
  double entropy_term = 0.0; // 4 H(Y), H(Y) = ln n_Y for balanced labels
  double surrogate_bias = std::numeric_limits<double>::quiet_NaN();
  bool has_target_terms = false;
  std::string to_json() const;
};

BoundReport bound_diagnostics(const EncoderParams& encoder,
                              const ClassifierParams& classifier, const Matrix& W,
                              const DomainPair& data, const ScoreConfig& score);

std::string flags_label(const TrainFlags& flags);

}  // namespace sida
