/* SIDA - surrogate-information domain adaptation library.
 *
 * C interface over the C++ core: opaque handles, integer status codes,
 * thread-local error messages. All functions returning sida_status leave
 * their outputs untouched on failure; call sida_last_error() for the
 * single-line reason.
 */
#ifndef SIDA_H
#define SIDA_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SIDA_API __declspec(dllexport)
#else
#define SIDA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sida_status {
  SIDA_OK = 0,
  SIDA_ERR_INVALID_ARGUMENT = 1,
  SIDA_ERR_IO = 2,
  SIDA_ERR_PARSE = 3,
  SIDA_ERR_SCHEMA = 4,
  SIDA_ERR_NUMERIC = 5,
  SIDA_ERR_INTERNAL = 6
} sida_status;

typedef struct sida_config sida_config;
typedef struct sida_dataset sida_dataset;
typedef struct sida_model sida_model;
typedef struct sida_metrics sida_metrics;

SIDA_API const char* sida_version(void);
SIDA_API const char* sida_status_name(sida_status status);

/* Message describing the most recent failure on this thread. */
SIDA_API const char* sida_last_error(void);

/* ---- configuration ---------------------------------------------------- */

SIDA_API sida_status sida_config_create(sida_config** out);
SIDA_API void sida_config_destroy(sida_config* config);

/* Merge `[section] key = value` lines; unknown keys are schema errors. */
SIDA_API sida_status sida_config_load_file(sida_config* config, const char* path);
SIDA_API sida_status sida_config_set(sida_config* config, const char* dotted_key,
                                     const char* value);
SIDA_API sida_status sida_config_get(const sida_config* config, const char* dotted_key,
                                     char* buffer, size_t capacity);

/* Newline-separated listing of every key with default and description. */
SIDA_API sida_status sida_config_describe(char* buffer, size_t capacity);

/* ---- data ------------------------------------------------------------- */

/* Generate or load the domain pair named by [data] / [paths]. */
SIDA_API sida_status sida_dataset_open(const sida_config* config, sida_dataset** out);
SIDA_API void sida_dataset_destroy(sida_dataset* dataset);

SIDA_API sida_status sida_dataset_shape(const sida_dataset* dataset, int32_t* n_source,
                                        int32_t* n_target, int32_t* dim,
                                        int32_t* n_classes);

/* Feature CSVs; target labels, when known, are written as the label column. */
SIDA_API sida_status sida_dataset_write_csv(const sida_dataset* dataset,
                                            const char* source_path,
                                            const char* target_path);

/* Load just a target feature CSV for scoring. A label column, when present,
 * becomes the evaluation ground truth. */
SIDA_API sida_status sida_dataset_open_target(const char* target_csv,
                                              sida_dataset** out);

/* ---- training and evaluation ------------------------------------------ */

/* Runs [train] seeds runs; returns the last run's model plus aggregated
 * metrics. Either output pointer may be NULL. */
SIDA_API sida_status sida_train_run(const sida_config* config,
                                    const sida_dataset* dataset, sida_model** out_model,
                                    sida_metrics** out_metrics);

/* The four {MI} x {SD} ablation cells with shared seeds: rows none, sd, mi,
 * mi+sd in one metrics object. */
SIDA_API sida_status sida_ablate_run(const sida_config* config,
                                     const sida_dataset* dataset,
                                     sida_metrics** out_metrics);

SIDA_API void sida_model_destroy(sida_model* model);
SIDA_API sida_status sida_model_save(const sida_model* model, const char* path);
SIDA_API sida_status sida_model_load(sida_model** out, const char* path);

/* Accuracy and L1 risk on a dataset whose target carries evaluation labels.
 * Any output pointer may be NULL. per_class must hold n_classes doubles. */
SIDA_API sida_status sida_model_evaluate(const sida_model* model,
                                         const sida_dataset* dataset, double* accuracy,
                                         double* risk, double* per_class,
                                         int32_t per_class_capacity);

/* ---- metrics ----------------------------------------------------------- */

SIDA_API void sida_metrics_destroy(sida_metrics* metrics);
SIDA_API sida_status sida_metrics_row_count(const sida_metrics* metrics, int32_t* rows);
SIDA_API sida_status sida_metrics_summary(const sida_metrics* metrics, int32_t row,
                                          double* acc_mean, double* acc_std);

/* One epoch report per line, per seed. include_timings = 0 writes wall_ms as
 * 0 so identical runs produce byte-identical files. */
SIDA_API sida_status sida_metrics_write_jsonl(const sida_metrics* metrics,
                                              const char* path, int32_t include_timings);
SIDA_API sida_status sida_metrics_write_summary_csv(const sida_metrics* metrics,
                                                    const char* path,
                                                    int32_t include_timings);

/* Bound-decomposition JSON, one line per run. */
SIDA_API sida_status sida_metrics_write_diagnostics(const sida_metrics* metrics,
                                                    const char* path);

/* ---- verification suites ----------------------------------------------- */

/* Renders the pass/fail table into the buffer and reports the failure
 * count. Exposed so the CLI subcommands mi-bench and gradcheck run the same
 * checks as the library tests. */
SIDA_API sida_status sida_mi_bench(uint64_t seed, char* buffer, size_t capacity,
                                   int32_t* failures);
SIDA_API sida_status sida_gradcheck(uint64_t seed, char* buffer, size_t capacity,
                                    int32_t* failures);

#ifdef __cplusplus
}
#endif

#endif /* SIDA_H */
