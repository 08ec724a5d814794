#include "sida.h"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "core/config.hpp"
#include "core/errors.hpp"
#include "core/metrics_io.hpp"
#include "core/model.hpp"
#include "core/trainer.hpp"
#include "core/verify.hpp"

struct sida_config {
  sida::Config config;
};

struct sida_dataset {
  sida::DomainPair pair;
};

struct sida_model {
  sida::Checkpoint model;
};

struct sida_metrics {
  std::vector<sida::RunMetrics> rows;
  std::vector<std::string> diagnostics;  // one JSON line per run with a surrogate
  std::uint64_t master_seed = 0;
  std::string task;
  int epochs = 0;
};

namespace {

thread_local std::string t_last_error;

sida_status to_status(const sida::Error& e) {
  t_last_error = e.what();
  switch (e.code()) {
    case sida::ErrorCode::invalid_argument: return SIDA_ERR_INVALID_ARGUMENT;
    case sida::ErrorCode::io: return SIDA_ERR_IO;
    case sida::ErrorCode::parse: return SIDA_ERR_PARSE;
    case sida::ErrorCode::schema: return SIDA_ERR_SCHEMA;
    case sida::ErrorCode::numeric: return SIDA_ERR_NUMERIC;
    case sida::ErrorCode::internal: return SIDA_ERR_INTERNAL;
  }
  return SIDA_ERR_INTERNAL;
}

template <typename Fn>
sida_status guarded(Fn&& fn) {
  try {
    fn();
    return SIDA_OK;
  } catch (const sida::Error& e) {
    return to_status(e);
  } catch (const std::exception& e) {
    t_last_error = e.what();
    return SIDA_ERR_INTERNAL;
  } catch (...) {
    t_last_error = "unknown error";
    return SIDA_ERR_INTERNAL;
  }
}

sida_status copy_out(const std::string& text, char* buffer, size_t capacity) {
  if (buffer == nullptr || capacity == 0) {
    t_last_error = "output buffer is null or empty";
    return SIDA_ERR_INVALID_ARGUMENT;
  }
  const size_t n = std::min(text.size(), capacity - 1);
  std::memcpy(buffer, text.data(), n);
  buffer[n] = '\0';
  if (n < text.size()) {
    t_last_error = "output truncated; need " + std::to_string(text.size() + 1) + " bytes";
    return SIDA_ERR_INVALID_ARGUMENT;
  }
  return SIDA_OK;
}

sida_status require_handle(const void* p, const char* what) {
  if (p != nullptr) return SIDA_OK;
  t_last_error = std::string(what) + " handle is null";
  return SIDA_ERR_INVALID_ARGUMENT;
}

/// Fills the metrics handle, including per-run bound diagnostics for runs
/// that carry a surrogate distribution.
void fill_metrics(sida_metrics& out, const sida::RunSetup& setup,
                  const sida::DomainPair& pair) {
  out.master_seed = setup.seed;
  out.task = sida::task_label(setup);
  out.epochs = setup.train.epochs;
  for (const sida::RunMetrics& row : out.rows) {
    for (const sida::TrainResult& run : row.runs) {
      if (run.final_weights.empty()) continue;
      sida::BoundReport report =
          sida::bound_diagnostics(run.encoder, run.classifier, run.final_weights,
                                  pair, setup.train.score);
      out.diagnostics.push_back(report.to_json());
    }
  }
}

}  // namespace

extern "C" {

const char* sida_version(void) { return "1.0.0"; }

const char* sida_status_name(sida_status status) {
  switch (status) {
    case SIDA_OK: return "ok";
    case SIDA_ERR_INVALID_ARGUMENT: return "invalid-argument";
    case SIDA_ERR_IO: return "io";
    case SIDA_ERR_PARSE: return "parse";
    case SIDA_ERR_SCHEMA: return "schema";
    case SIDA_ERR_NUMERIC: return "numeric";
    case SIDA_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* sida_last_error(void) { return t_last_error.c_str(); }

sida_status sida_config_create(sida_config** out) {
  if (auto s = require_handle(out, "output"); s != SIDA_OK) return s;
  return guarded([&] { *out = new sida_config(); });
}

void sida_config_destroy(sida_config* config) { delete config; }

sida_status sida_config_load_file(sida_config* config, const char* path) {
  if (auto s = require_handle(config, "config"); s != SIDA_OK) return s;
  if (auto s = require_handle(path, "path"); s != SIDA_OK) return s;
  return guarded([&] { config->config.load_file(path); });
}

sida_status sida_config_set(sida_config* config, const char* dotted_key,
                            const char* value) {
  if (auto s = require_handle(config, "config"); s != SIDA_OK) return s;
  if (auto s = require_handle(dotted_key, "key"); s != SIDA_OK) return s;
  if (auto s = require_handle(value, "value"); s != SIDA_OK) return s;
  return guarded([&] { config->config.set(dotted_key, value); });
}

sida_status sida_config_get(const sida_config* config, const char* dotted_key,
                            char* buffer, size_t capacity) {
  if (auto s = require_handle(config, "config"); s != SIDA_OK) return s;
  if (auto s = require_handle(dotted_key, "key"); s != SIDA_OK) return s;
  std::string value;
  if (auto s = guarded([&] { value = config->config.get(dotted_key); }); s != SIDA_OK)
    return s;
  return copy_out(value, buffer, capacity);
}

sida_status sida_config_describe(char* buffer, size_t capacity) {
  return copy_out(sida::Config::describe(), buffer, capacity);
}

sida_status sida_dataset_open(const sida_config* config, sida_dataset** out) {
  if (auto s = require_handle(config, "config"); s != SIDA_OK) return s;
  if (auto s = require_handle(out, "output"); s != SIDA_OK) return s;
  return guarded([&] {
    const sida::RunSetup setup = config->config.resolve();
    auto dataset = std::make_unique<sida_dataset>();
    dataset->pair = sida::open_dataset(setup);
    *out = dataset.release();
  });
}

void sida_dataset_destroy(sida_dataset* dataset) { delete dataset; }

sida_status sida_dataset_open_target(const char* target_csv, sida_dataset** out) {
  if (auto s = require_handle(target_csv, "path"); s != SIDA_OK) return s;
  if (auto s = require_handle(out, "output"); s != SIDA_OK) return s;
  return guarded([&] {
    const sida::FeatureFile file =
        sida::load_feature_csv(target_csv, sida::CsvRole::target);
    auto dataset = std::make_unique<sida_dataset>();
    dataset->pair.target.X = file.X;
    if (file.labels.has_value()) {
      dataset->pair.target.set_eval_labels(*file.labels);
      for (int y : *file.labels)
        dataset->pair.n_classes = std::max(dataset->pair.n_classes, y + 1);
    }
    *out = dataset.release();
  });
}

sida_status sida_dataset_shape(const sida_dataset* dataset, int32_t* n_source,
                               int32_t* n_target, int32_t* dim, int32_t* n_classes) {
  if (auto s = require_handle(dataset, "dataset"); s != SIDA_OK) return s;
  if (n_source != nullptr) *n_source = static_cast<int32_t>(dataset->pair.source.size());
  if (n_target != nullptr) *n_target = static_cast<int32_t>(dataset->pair.target.size());
  if (dim != nullptr) *dim = static_cast<int32_t>(dataset->pair.source.dim());
  if (n_classes != nullptr) *n_classes = dataset->pair.n_classes;
  return SIDA_OK;
}

sida_status sida_dataset_write_csv(const sida_dataset* dataset, const char* source_path,
                                   const char* target_path) {
  if (auto s = require_handle(dataset, "dataset"); s != SIDA_OK) return s;
  if (auto s = require_handle(source_path, "source path"); s != SIDA_OK) return s;
  if (auto s = require_handle(target_path, "target path"); s != SIDA_OK) return s;
  return guarded([&] {
    const sida::DomainPair& pair = dataset->pair;
    sida::write_feature_csv(source_path, pair.source.X, &pair.source.y);
    const std::vector<int>* hidden =
        pair.target.has_eval_labels() ? &pair.target.eval_labels() : nullptr;
    sida::write_feature_csv(target_path, pair.target.X, hidden);
  });
}

sida_status sida_train_run(const sida_config* config, const sida_dataset* dataset,
                           sida_model** out_model, sida_metrics** out_metrics) {
  if (auto s = require_handle(config, "config"); s != SIDA_OK) return s;
  if (auto s = require_handle(dataset, "dataset"); s != SIDA_OK) return s;
  return guarded([&] {
    const sida::RunSetup setup = config->config.resolve();
    auto metrics = std::make_unique<sida_metrics>();
    metrics->rows.push_back(sida::run_seeds(setup.train, dataset->pair));
    fill_metrics(*metrics, setup, dataset->pair);

    if (out_model != nullptr) {
      const sida::TrainResult& last = metrics->rows.front().runs.back();
      auto model = std::make_unique<sida_model>();
      model->model.encoder = last.encoder;
      model->model.classifier = last.classifier;
      model->model.n_classes = dataset->pair.n_classes;
      *out_model = model.release();
    }
    if (out_metrics != nullptr) *out_metrics = metrics.release();
  });
}

sida_status sida_ablate_run(const sida_config* config, const sida_dataset* dataset,
                            sida_metrics** out_metrics) {
  if (auto s = require_handle(config, "config"); s != SIDA_OK) return s;
  if (auto s = require_handle(dataset, "dataset"); s != SIDA_OK) return s;
  if (auto s = require_handle(out_metrics, "output"); s != SIDA_OK) return s;
  return guarded([&] {
    const sida::RunSetup setup = config->config.resolve();
    auto metrics = std::make_unique<sida_metrics>();
    const auto grid = sida::ablation_grid(setup.train, dataset->pair);
    metrics->rows.assign(grid.begin(), grid.end());
    fill_metrics(*metrics, setup, dataset->pair);
    *out_metrics = metrics.release();
  });
}

void sida_model_destroy(sida_model* model) { delete model; }

sida_status sida_model_save(const sida_model* model, const char* path) {
  if (auto s = require_handle(model, "model"); s != SIDA_OK) return s;
  if (auto s = require_handle(path, "path"); s != SIDA_OK) return s;
  return guarded([&] {
    sida::save_checkpoint(path, model->model.encoder, model->model.classifier,
                          model->model.n_classes);
  });
}

sida_status sida_model_load(sida_model** out, const char* path) {
  if (auto s = require_handle(out, "output"); s != SIDA_OK) return s;
  if (auto s = require_handle(path, "path"); s != SIDA_OK) return s;
  return guarded([&] {
    auto model = std::make_unique<sida_model>();
    model->model = sida::load_checkpoint(path);
    *out = model.release();
  });
}

sida_status sida_model_evaluate(const sida_model* model, const sida_dataset* dataset,
                                double* accuracy, double* risk, double* per_class,
                                int32_t per_class_capacity) {
  if (auto s = require_handle(model, "model"); s != SIDA_OK) return s;
  if (auto s = require_handle(dataset, "dataset"); s != SIDA_OK) return s;
  return guarded([&] {
    const sida::EvalResult result = sida::evaluate(
        model->model.encoder, model->model.classifier, dataset->pair.target);
    if (accuracy != nullptr) *accuracy = result.accuracy;
    if (risk != nullptr) *risk = result.risk;
    if (per_class != nullptr) {
      if (per_class_capacity < static_cast<int32_t>(result.per_class_accuracy.size()))
        throw sida::InvalidArgumentError("per_class buffer too small");
      for (std::size_t c = 0; c < result.per_class_accuracy.size(); ++c)
        per_class[c] = result.per_class_accuracy[c];
    }
  });
}

void sida_metrics_destroy(sida_metrics* metrics) { delete metrics; }

sida_status sida_metrics_row_count(const sida_metrics* metrics, int32_t* rows) {
  if (auto s = require_handle(metrics, "metrics"); s != SIDA_OK) return s;
  if (auto s = require_handle(rows, "output"); s != SIDA_OK) return s;
  *rows = static_cast<int32_t>(metrics->rows.size());
  return SIDA_OK;
}

sida_status sida_metrics_summary(const sida_metrics* metrics, int32_t row,
                                 double* acc_mean, double* acc_std) {
  if (auto s = require_handle(metrics, "metrics"); s != SIDA_OK) return s;
  if (row < 0 || row >= static_cast<int32_t>(metrics->rows.size())) {
    t_last_error = "metrics row out of range";
    return SIDA_ERR_INVALID_ARGUMENT;
  }
  if (acc_mean != nullptr) *acc_mean = metrics->rows[row].accuracy_mean;
  if (acc_std != nullptr) *acc_std = metrics->rows[row].accuracy_std;
  return SIDA_OK;
}

sida_status sida_metrics_write_jsonl(const sida_metrics* metrics, const char* path,
                                     int32_t include_timings) {
  if (auto s = require_handle(metrics, "metrics"); s != SIDA_OK) return s;
  if (auto s = require_handle(path, "path"); s != SIDA_OK) return s;
  return guarded([&] {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw sida::IoError("cannot write metrics file '" + std::string(path) + "'");
    for (const sida::RunMetrics& row : metrics->rows)
      for (const sida::TrainResult& run : row.runs)
        for (const sida::EpochReport& e : run.epochs)
          out << sida::epoch_report_json(e, run.seed, include_timings != 0) << '\n';
    if (!out) throw sida::IoError("write failed for '" + std::string(path) + "'");
  });
}

sida_status sida_metrics_write_summary_csv(const sida_metrics* metrics, const char* path,
                                           int32_t include_timings) {
  if (auto s = require_handle(metrics, "metrics"); s != SIDA_OK) return s;
  if (auto s = require_handle(path, "path"); s != SIDA_OK) return s;
  return guarded([&] {
    std::vector<const sida::RunMetrics*> rows;
    for (const sida::RunMetrics& row : metrics->rows) rows.push_back(&row);
    sida::write_summary_csv(path, rows, metrics->master_seed, metrics->task,
                            metrics->epochs, include_timings != 0);
  });
}

sida_status sida_metrics_write_diagnostics(const sida_metrics* metrics,
                                           const char* path) {
  if (auto s = require_handle(metrics, "metrics"); s != SIDA_OK) return s;
  if (auto s = require_handle(path, "path"); s != SIDA_OK) return s;
  return guarded([&] {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw sida::IoError("cannot write diagnostics file '" + std::string(path) + "'");
    for (const std::string& line : metrics->diagnostics) out << line << '\n';
    if (!out) throw sida::IoError("write failed for '" + std::string(path) + "'");
  });
}

sida_status sida_mi_bench(uint64_t seed, char* buffer, size_t capacity,
                          int32_t* failures) {
  std::vector<sida::CheckResult> checks;
  if (auto s = guarded([&] { checks = sida::mi_bench_suite(seed); }); s != SIDA_OK)
    return s;
  if (failures != nullptr) *failures = sida::count_failures(checks);
  return copy_out(sida::render_check_table(checks), buffer, capacity);
}

sida_status sida_gradcheck(uint64_t seed, char* buffer, size_t capacity,
                           int32_t* failures) {
  std::vector<sida::CheckResult> checks;
  if (auto s = guarded([&] { checks = sida::gradcheck_suite(seed); }); s != SIDA_OK)
    return s;
  if (failures != nullptr) *failures = sida::count_failures(checks);
  return copy_out(sida::render_check_table(checks), buffer, capacity);
}

}  // extern "C"
