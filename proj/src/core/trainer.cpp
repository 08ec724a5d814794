#include "core/trainer.hpp"

#include <chrono>
#include <cmath>
#include <sstream>
#include <utility>

#include "core/errors.hpp"
#include "core/graph.hpp"

#include <nlohmann/json.hpp>

namespace sida {

ScoreParams resolve_score_params(const ScoreConfig& cfg, const Matrix& features) {
  require(cfg.m2_scale > 0.0, "score config: m2_scale must be positive");
  ScoreParams p;
  p.m1 = cfg.m1;
  p.sign = cfg.sign;
  p.eps_norm = cfg.eps_norm;
  const double median = median_offdiagonal(pairwise_distances(features));
  p.m2 = std::max(cfg.m2_scale * median, cfg.m1);
  validate(p);
  return p;
}

void validate(const TrainConfig& config, const DomainPair& data) {
  require(config.alpha1 >= 0.0 && config.alpha2 >= 0.0,
          "train config: loss coefficients must be non-negative");
  require(config.epochs >= 1, "train config: epochs must be >= 1");
  require(config.batch >= 1, "train config: batch must be >= 1");
  require(config.feature_dim >= 1, "train config: feature_dim must be >= 1");
  require(config.seed_count >= 1, "train config: seed count must be >= 1");
  validate(config.surrogate);
  require(data.n_classes >= 2, "domain pair: need at least 2 classes");
  require(config.batch % data.n_classes == 0,
          "train config: batch size not divisible by class count");
  require(data.source.size() > 0 && data.target.size() > 0, "domain pair: empty domain");
  require(data.source.dim() == data.target.dim(),
          "domain pair: source/target dimensionality differs");
  require(static_cast<std::size_t>(config.surrogate.knn_k) < data.target.size(),
          "train config: knn K must be < target size");
}

namespace {

Matrix class_centroids(const Matrix& features, const std::vector<int>& labels,
                       int n_classes) {
  Matrix centroids(n_classes, features.cols());
  std::vector<std::size_t> counts(n_classes, 0);
  for (std::size_t i = 0; i < features.rows(); ++i) {
    const int y = labels[i];
    counts[y] += 1;
    for (std::size_t j = 0; j < features.cols(); ++j)
      centroids(y, j) += features(i, j);
  }
  for (int c = 0; c < n_classes; ++c) {
    require(counts[c] > 0, "class_centroids: class absent from source");
    for (std::size_t j = 0; j < features.cols(); ++j)
      centroids(c, j) /= static_cast<double>(counts[c]);
  }
  return centroids;
}

Matrix gather_rows(const Matrix& m, const std::vector<std::size_t>& rows) {
  Matrix out(rows.size(), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(rows[i], j);
  return out;
}

int argmax_row(const Matrix& m, std::size_t i) {
  int best = 0;
  double best_v = m(i, 0);
  for (std::size_t j = 1; j < m.cols(); ++j) {
    if (m(i, j) > best_v) {
      best_v = m(i, j);
      best = static_cast<int>(j);
    }
  }
  return best;
}

}  // namespace

TrainResult train(const TrainConfig& config, const DomainPair& data) {
  validate(config, data);

  SeededRng root(config.seed);
  EncoderParams encoder =
      make_encoder(data.source.dim(), config.hidden, config.feature_dim,
                   config.activation, root.derive("encoder-init"));
  ClassifierParams classifier =
      make_classifier(config.feature_dim, data.n_classes, root.derive("classifier-init"));
  OptimizerState enc_opt = make_optimizer_state(
      encoder_param_list(std::as_const(encoder)), config.momentum, config.weight_decay);
  OptimizerState clf_opt = make_optimizer_state(
      classifier_param_list(std::as_const(classifier)), config.momentum,
      config.weight_decay);
  SeededRng batch_rng = root.derive("batches");

  const std::size_t n_s = data.source.size();
  const std::size_t n_t = data.target.size();
  const int n_classes = data.n_classes;
  const bool mi_on = config.flags.mi_enabled;
  const bool sd_on = config.flags.sd_enabled;
  const bool needs_w = mi_on || sd_on;
  const Matrix x_all = needs_w ? vstack(data.source.X, data.target.X) : Matrix();

  const int steps_per_epoch =
      std::max<int>(1, static_cast<int>(n_s) / config.batch);
  const long total_steps = static_cast<long>(config.epochs) * steps_per_epoch;

  TrainResult result;
  result.seed = config.seed;
  long global_step = 0;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const auto t_start = std::chrono::steady_clock::now();

    // -- epoch prologue: refresh the surrogate on frozen features
    Matrix W;
    Matrix M;
    ScoreParams score_params;
    double lap_loss = 0.0;
    double epoch_bound = std::numeric_limits<double>::quiet_NaN();
    if (needs_w) {
      const Matrix z_s = encode_forward(encoder, data.source.X);
      const Matrix z_t = encode_forward(encoder, data.target.X);
      const Matrix z_all = vstack(z_s, z_t);
      score_params = resolve_score_params(config.score, z_all);
      const Matrix centroids = class_centroids(z_s, data.source.y, n_classes);
      if (sd_on) {
        W = init_weights(z_t, centroids, config.surrogate.theta_percentile,
                         config.surrogate.kmeans_max_iters);
        const Matrix adjacency =
            config.surrogate.gaussian_adjacency
                ? knn_adjacency_gaussian(z_t, config.surrogate.knn_k)
                : knn_adjacency(z_t, config.surrogate.knn_k);
        const LaplacianPair lap = normalized_laplacian(adjacency);
        const Matrix s = score_matrix(z_all, score_params);
        W = update_weights(
            std::move(W), lap.laplacian,
            [&](const Matrix& w_cur) {
              return mi_grad_w(build_mixture_matrix(data.source.y, n_classes, w_cur),
                               s, n_classes, n_s);
            },
            config.surrogate);
        lap_loss = laplacian_loss_grad(W, lap.laplacian).loss;
        M = build_mixture_matrix(data.source.y, n_classes, W);
        epoch_bound = -mi_loss(M, s, n_classes);
      } else {
        // ablation without SD: hard pseudo-labels from the same K-means init
        W = init_weights(z_t, centroids, 100.0, config.surrogate.kmeans_max_iters);
        M = build_mixture_matrix(data.source.y, n_classes, W);
      }
      if (!config.weight_dump_dir.empty()) {
        write_feature_csv(config.weight_dump_dir + "/weights_epoch" +
                              std::to_string(epoch) + ".csv",
                          W, nullptr);
      }
    }

    // -- class-balanced minibatch SGD on the composite loss
    const auto batches = class_balanced_batches(data.source, n_classes, config.batch,
                                                steps_per_epoch, batch_rng);
    double sum_cls = 0.0, sum_mi = 0.0, sum_aux = 0.0, sum_model = 0.0;
    for (int step = 0; step < steps_per_epoch; ++step) {
      const double progress =
          total_steps > 1
              ? static_cast<double>(global_step) / static_cast<double>(total_steps - 1)
              : 0.0;
      const std::vector<std::size_t>& batch = batches[step];

      EncodeCache cache;
      Matrix features;  // rows: batch only, or source then target
      if (needs_w) {
        features = encode_forward(encoder, x_all, &cache);
      } else {
        features = encode_forward(encoder, gather_rows(data.source.X, batch), &cache);
      }

      Matrix d_features(features.rows(), features.cols());
      EncoderGrads enc_grads = zero_encoder_grads(encoder);
      Matrix clf_w_grad(classifier.weight.rows(), classifier.weight.cols());
      Matrix clf_b_grad(1, classifier.bias.cols());

      // classification on the source batch
      const Matrix z_batch =
          needs_w ? gather_rows(features, batch) : features;
      std::vector<int> batch_labels(batch.size());
      for (std::size_t i = 0; i < batch.size(); ++i)
        batch_labels[i] = data.source.y[batch[i]];
      const ClassifierOut cls_out = classifier_forward(classifier, z_batch);
      const LossGrad cls = classification_loss(cls_out.probabilities, batch_labels);

      axpy_inplace(clf_w_grad, 1.0, matmul_at_b(z_batch, cls.grad_logits));
      {
        const std::vector<double> bg = cls.grad_logits.col_sums();
        for (std::size_t j = 0; j < bg.size(); ++j) clf_b_grad(0, j) += bg[j];
      }
      const Matrix d_z_batch = matmul_a_bt(cls.grad_logits, classifier.weight);
      if (needs_w) {
        for (std::size_t i = 0; i < batch.size(); ++i)
          for (std::size_t j = 0; j < d_features.cols(); ++j)
            d_features(batch[i], j) += d_z_batch(i, j);
      } else {
        axpy_inplace(d_features, 1.0, d_z_batch);
      }

      // auxiliary MSE against the surrogate conditionals, target rows only
      double aux_value = 0.0;
      if (sd_on) {
        Matrix z_target(n_t, features.cols());
        for (std::size_t i = 0; i < n_t; ++i)
          for (std::size_t j = 0; j < features.cols(); ++j)
            z_target(i, j) = features(n_s + i, j);
        const ClassifierOut aux_out = classifier_forward(classifier, z_target);
        const LossGrad aux = auxiliary_loss(aux_out.probabilities, W);
        aux_value = aux.loss;
        axpy_inplace(clf_w_grad, config.alpha2, matmul_at_b(z_target, aux.grad_logits));
        {
          const std::vector<double> bg = aux.grad_logits.col_sums();
          for (std::size_t j = 0; j < bg.size(); ++j)
            clf_b_grad(0, j) += config.alpha2 * bg[j];
        }
        const Matrix d_z_target = matmul_a_bt(aux.grad_logits, classifier.weight);
        for (std::size_t i = 0; i < n_t; ++i)
          for (std::size_t j = 0; j < d_features.cols(); ++j)
            d_features(n_s + i, j) += config.alpha2 * d_z_target(i, j);
      }

      // variational MI term over the frozen epoch surrogate
      double mi_value = 0.0;
      if (mi_on) {
        double mi_loss_value = 0.0;
        const Matrix d_mi =
            mi_grad_features(features, M, score_params, n_classes, &mi_loss_value);
        mi_value = mi_loss_value;
        axpy_inplace(d_features, config.alpha1, d_mi);
        if (std::isnan(epoch_bound)) epoch_bound = -mi_loss_value;
      }

      encode_backward(encoder, cache, d_features, enc_grads);

      const double model_loss =
          cls.loss + config.alpha1 * mi_value + config.alpha2 * aux_value;
      if (!std::isfinite(model_loss)) {
        std::ostringstream oss;
        oss << "non-finite loss at epoch " << epoch << " step " << step
            << ": classify=" << cls.loss << " mi=" << mi_value
            << " auxiliary=" << aux_value;
        throw NumericError(oss.str());
      }

      std::vector<Matrix*> enc_params = encoder_param_list(encoder);
      std::vector<const Matrix*> enc_grad_ptrs;
      for (std::size_t l = 0; l < enc_grads.weights.size(); ++l) {
        enc_grad_ptrs.push_back(&enc_grads.weights[l]);
        enc_grad_ptrs.push_back(&enc_grads.biases[l]);
      }
      sgd_step(enc_params, enc_grad_ptrs, enc_opt,
               encoder_lr(config.lr, progress));
      sgd_step(classifier_param_list(classifier), {&clf_w_grad, &clf_b_grad}, clf_opt,
               classifier_lr(config.lr, progress));

      sum_cls += cls.loss;
      sum_mi += mi_value;
      sum_aux += aux_value;
      sum_model += model_loss;
      ++global_step;
    }

    EpochReport report;
    report.epoch = epoch;
    const double inv_steps = 1.0 / static_cast<double>(steps_per_epoch);
    report.loss_classify = sum_cls * inv_steps;
    report.loss_mi = sum_mi * inv_steps;
    report.loss_auxiliary = sum_aux * inv_steps;
    report.loss_laplacian = lap_loss;
    report.loss_model = sum_model * inv_steps;
    report.mi_lower_bound = epoch_bound;
    if (data.target.has_eval_labels())
      report.target_accuracy = evaluate(encoder, classifier, data.target).accuracy;
    report.wall_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - t_start)
                         .count();
    result.epochs.push_back(report);
    if (needs_w) result.final_weights = std::move(W);
  }

  result.encoder = std::move(encoder);
  result.classifier = std::move(classifier);
  if (data.target.has_eval_labels())
    result.final_accuracy =
        evaluate(result.encoder, result.classifier, data.target).accuracy;
  return result;
}

EvalResult evaluate(const EncoderParams& encoder, const ClassifierParams& classifier,
                    const UnlabeledSet& target) {
  const std::vector<int>& truth = target.eval_labels();  // throws when absent
  const Matrix z = encode_forward(encoder, target.X);
  const ClassifierOut out = classifier_forward(classifier, z);

  int n_classes = static_cast<int>(out.probabilities.cols());
  std::vector<std::size_t> per_class_total(n_classes, 0);
  std::vector<std::size_t> per_class_hit(n_classes, 0);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    const int truth_i = truth[i];
    require(truth_i >= 0 && truth_i < n_classes, "evaluate: label out of range");
    per_class_total[truth_i] += 1;
    if (argmax_row(out.probabilities, i) == truth_i) {
      ++hits;
      per_class_hit[truth_i] += 1;
    }
  }

  EvalResult result;
  result.accuracy = static_cast<double>(hits) / static_cast<double>(target.size());
  result.per_class_accuracy.resize(n_classes, 0.0);
  for (int c = 0; c < n_classes; ++c) {
    result.per_class_accuracy[c] =
        per_class_total[c] == 0
            ? std::numeric_limits<double>::quiet_NaN()
            : static_cast<double>(per_class_hit[c]) / static_cast<double>(per_class_total[c]);
  }
  result.risk = 2.0 * (1.0 - result.accuracy);
  return result;
}

RunMetrics run_seeds(const TrainConfig& config, const DomainPair& data) {
  RunMetrics metrics;
  metrics.flags_label = flags_label(config.flags);
  SeededRng root(config.seed);
  for (int i = 0; i < config.seed_count; ++i) {
    TrainConfig run_config = config;
    run_config.seed = root.derive("run", static_cast<std::uint64_t>(i)).seed();
    metrics.runs.push_back(train(run_config, data));
  }

  double sum = 0.0;
  int counted = 0;
  for (const TrainResult& r : metrics.runs) {
    if (std::isnan(r.final_accuracy)) continue;
    sum += r.final_accuracy;
    ++counted;
  }
  if (counted > 0) {
    metrics.accuracy_mean = sum / counted;
    double var = 0.0;
    for (const TrainResult& r : metrics.runs) {
      if (std::isnan(r.final_accuracy)) continue;
      const double d = r.final_accuracy - metrics.accuracy_mean;
      var += d * d;
    }
    metrics.accuracy_std = counted > 1 ? std::sqrt(var / (counted - 1)) : 0.0;
  }
  return metrics;
}

std::array<RunMetrics, 4> ablation_grid(const TrainConfig& config,
                                        const DomainPair& data) {
  std::array<RunMetrics, 4> grid;
  const std::array<TrainFlags, 4> cells = {
      TrainFlags{false, false}, TrainFlags{false, true},
      TrainFlags{true, false}, TrainFlags{true, true}};
  for (std::size_t i = 0; i < cells.size(); ++i) {
    TrainConfig cell_config = config;
    cell_config.flags = cells[i];
    grid[i] = run_seeds(cell_config, data);
  }
  return grid;
}

std::string BoundReport::to_json() const {
  nlohmann::json j;
  j["risk_source"] = risk_source;
  j["mi_estimate"] = mi_estimate;
  j["mi_term"] = mi_term;
  j["entropy_term"] = entropy_term;
  j["hdh_divergence"] = "not computed";
  if (has_target_terms) {
    j["risk_target"] = risk_target;
    j["surrogate_bias"] = surrogate_bias;
  } else {
    j["risk_target"] = nullptr;
    j["surrogate_bias"] = nullptr;
  }
  return j.dump();
}

BoundReport bound_diagnostics(const EncoderParams& encoder,
                              const ClassifierParams& classifier, const Matrix& W,
                              const DomainPair& data, const ScoreConfig& score) {
  require(!W.empty(), "bound_diagnostics: missing surrogate weights");
  require(W.rows() == data.target.size(), "bound_diagnostics: W row count mismatch");
  check_surrogate_invariants(W);

  const Matrix z_s = encode_forward(encoder, data.source.X);
  const Matrix z_t = encode_forward(encoder, data.target.X);
  const Matrix z_all = vstack(z_s, z_t);
  const ScoreParams sp = resolve_score_params(score, z_all);
  const Matrix s = score_matrix(z_all, sp);
  const Matrix m = build_mixture_matrix(data.source.y, data.n_classes, W);

  BoundReport report;
  report.mi_estimate = -mi_loss(m, s, data.n_classes);
  report.mi_term = -4.0 * report.mi_estimate;
  report.entropy_term = 4.0 * std::log(static_cast<double>(data.n_classes));

  // source risk from the labeled set
  const ClassifierOut src_out = classifier_forward(classifier, z_s);
  std::size_t src_hits = 0;
  for (std::size_t i = 0; i < z_s.rows(); ++i)
    if (argmax_row(src_out.probabilities, i) == data.source.y[i]) ++src_hits;
  report.risk_source =
      2.0 * (1.0 - static_cast<double>(src_hits) / static_cast<double>(z_s.rows()));

  if (data.target.has_eval_labels()) {
    report.has_target_terms = true;
    report.risk_target = evaluate(encoder, classifier, data.target).risk;
    const std::vector<int>& truth = data.target.eval_labels();
    std::size_t disagreements = 0;
    for (std::size_t i = 0; i < W.rows(); ++i)
      if (argmax_row(W, i) != truth[i]) ++disagreements;
    report.surrogate_bias =
        2.0 * static_cast<double>(disagreements) / static_cast<double>(W.rows());
  }
  return report;
}

std::string flags_label(const TrainFlags& flags) {
  if (flags.mi_enabled && flags.sd_enabled) return "mi+sd";
  if (flags.mi_enabled) return "mi";
  if (flags.sd_enabled) return "sd";
  return "none";
}

}  // namespace sida
