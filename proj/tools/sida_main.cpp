// Command-line front end. Everything substantive happens behind the C API in
// libsida; this file only parses arguments, wires files together, and maps
// statuses to exit codes (0 success, 1 runtime/data error, 2 usage/config
// error).

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sida.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct CommonOpts {
  std::string config_path;
  std::vector<std::string> overrides;  // key=value
  std::string seed;                    // empty = config default
  std::string out_dir = "sida-out";
  bool timings = false;
};

void report_error(sida_status status) {
  std::fprintf(stderr, "sida: error: %s: %s\n", sida_status_name(status),
               sida_last_error());
}

int exit_code_for(sida_status status, bool during_setup) {
  if (status == SIDA_OK) return kExitOk;
  report_error(status);
  if (status == SIDA_ERR_SCHEMA) return kExitUsage;
  if (during_setup && status == SIDA_ERR_INVALID_ARGUMENT) return kExitUsage;
  return kExitRuntime;
}

using ConfigPtr = std::unique_ptr<sida_config, decltype(&sida_config_destroy)>;
using DatasetPtr = std::unique_ptr<sida_dataset, decltype(&sida_dataset_destroy)>;
using ModelPtr = std::unique_ptr<sida_model, decltype(&sida_model_destroy)>;
using MetricsPtr = std::unique_ptr<sida_metrics, decltype(&sida_metrics_destroy)>;

/// Builds the config from file + overrides. Returns exit code, 0 on success.
int build_config(const CommonOpts& opts, ConfigPtr& out) {
  sida_config* raw = nullptr;
  if (sida_status s = sida_config_create(&raw); s != SIDA_OK)
    return exit_code_for(s, true);
  out = ConfigPtr(raw, &sida_config_destroy);

  if (!opts.config_path.empty()) {
    if (sida_status s = sida_config_load_file(raw, opts.config_path.c_str());
        s != SIDA_OK)
      return exit_code_for(s, true);
  }
  for (const std::string& kv : opts.overrides) {
    const std::size_t eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "sida: error: schema: --set expects key=value, got '%s'\n",
                   kv.c_str());
      return kExitUsage;
    }
    if (sida_status s = sida_config_set(raw, kv.substr(0, eq).c_str(),
                                        kv.substr(eq + 1).c_str());
        s != SIDA_OK)
      return exit_code_for(s, true);
  }
  if (!opts.seed.empty()) {
    if (sida_status s = sida_config_set(raw, "run.seed", opts.seed.c_str());
        s != SIDA_OK)
      return exit_code_for(s, true);
  }
  return kExitOk;
}

int ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    std::fprintf(stderr, "sida: error: io: cannot create output directory '%s'\n",
                 dir.c_str());
    return kExitRuntime;
  }
  return kExitOk;
}

int open_dataset(const ConfigPtr& config, DatasetPtr& out) {
  sida_dataset* raw = nullptr;
  if (sida_status s = sida_dataset_open(config.get(), &raw); s != SIDA_OK)
    return exit_code_for(s, false);
  out = DatasetPtr(raw, &sida_dataset_destroy);
  return kExitOk;
}

int run_gen(const CommonOpts& opts) {
  ConfigPtr config(nullptr, &sida_config_destroy);
  if (int rc = build_config(opts, config); rc != kExitOk) return rc;
  if (int rc = ensure_out_dir(opts.out_dir); rc != kExitOk) return rc;
  DatasetPtr dataset(nullptr, &sida_dataset_destroy);
  if (int rc = open_dataset(config, dataset); rc != kExitOk) return rc;

  const std::string source = opts.out_dir + "/source.csv";
  const std::string target = opts.out_dir + "/target.csv";
  if (sida_status s =
          sida_dataset_write_csv(dataset.get(), source.c_str(), target.c_str());
      s != SIDA_OK)
    return exit_code_for(s, false);

  int32_t n_source = 0, n_target = 0, dim = 0, classes = 0;
  sida_dataset_shape(dataset.get(), &n_source, &n_target, &dim, &classes);
  std::printf("wrote %s (%d rows) and %s (%d rows), %d features, %d classes\n",
              source.c_str(), n_source, target.c_str(), n_target, dim, classes);
  return kExitOk;
}

int write_metrics_files(const MetricsPtr& metrics, const CommonOpts& opts) {
  const std::string jsonl = opts.out_dir + "/metrics.jsonl";
  const std::string summary = opts.out_dir + "/summary.csv";
  const std::string diagnostics = opts.out_dir + "/diagnostics.jsonl";
  if (sida_status s = sida_metrics_write_jsonl(metrics.get(), jsonl.c_str(),
                                               opts.timings ? 1 : 0);
      s != SIDA_OK)
    return exit_code_for(s, false);
  if (sida_status s = sida_metrics_write_summary_csv(metrics.get(), summary.c_str(),
                                                     opts.timings ? 1 : 0);
      s != SIDA_OK)
    return exit_code_for(s, false);
  if (sida_status s = sida_metrics_write_diagnostics(metrics.get(), diagnostics.c_str());
      s != SIDA_OK)
    return exit_code_for(s, false);
  return kExitOk;
}

int print_summary(const MetricsPtr& metrics) {
  int32_t rows = 0;
  sida_metrics_row_count(metrics.get(), &rows);
  for (int32_t r = 0; r < rows; ++r) {
    double mean = 0.0, stddev = 0.0;
    sida_metrics_summary(metrics.get(), r, &mean, &stddev);
    std::printf("row %d: target accuracy %.4f +/- %.4f\n", r, mean, stddev);
  }
  return kExitOk;
}

int run_train(const CommonOpts& opts) {
  ConfigPtr config(nullptr, &sida_config_destroy);
  if (int rc = build_config(opts, config); rc != kExitOk) return rc;
  if (int rc = ensure_out_dir(opts.out_dir); rc != kExitOk) return rc;
  DatasetPtr dataset(nullptr, &sida_dataset_destroy);
  if (int rc = open_dataset(config, dataset); rc != kExitOk) return rc;

  sida_model* raw_model = nullptr;
  sida_metrics* raw_metrics = nullptr;
  if (sida_status s =
          sida_train_run(config.get(), dataset.get(), &raw_model, &raw_metrics);
      s != SIDA_OK)
    return exit_code_for(s, false);
  ModelPtr model(raw_model, &sida_model_destroy);
  MetricsPtr metrics(raw_metrics, &sida_metrics_destroy);

  if (int rc = write_metrics_files(metrics, opts); rc != kExitOk) return rc;
  const std::string ckpt = opts.out_dir + "/model.ckpt";
  if (sida_status s = sida_model_save(model.get(), ckpt.c_str()); s != SIDA_OK)
    return exit_code_for(s, false);
  return print_summary(metrics);
}

int run_ablate(const CommonOpts& opts) {
  ConfigPtr config(nullptr, &sida_config_destroy);
  if (int rc = build_config(opts, config); rc != kExitOk) return rc;
  if (int rc = ensure_out_dir(opts.out_dir); rc != kExitOk) return rc;
  DatasetPtr dataset(nullptr, &sida_dataset_destroy);
  if (int rc = open_dataset(config, dataset); rc != kExitOk) return rc;

  sida_metrics* raw_metrics = nullptr;
  if (sida_status s = sida_ablate_run(config.get(), dataset.get(), &raw_metrics);
      s != SIDA_OK)
    return exit_code_for(s, false);
  MetricsPtr metrics(raw_metrics, &sida_metrics_destroy);
  if (int rc = write_metrics_files(metrics, opts); rc != kExitOk) return rc;
  return print_summary(metrics);
}

int run_eval(const std::string& model_path, const std::string& target_path) {
  sida_model* raw_model = nullptr;
  if (sida_status s = sida_model_load(&raw_model, model_path.c_str()); s != SIDA_OK)
    return exit_code_for(s, false);
  ModelPtr model(raw_model, &sida_model_destroy);

  sida_dataset* raw_dataset = nullptr;
  if (sida_status s = sida_dataset_open_target(target_path.c_str(), &raw_dataset);
      s != SIDA_OK)
    return exit_code_for(s, false);
  DatasetPtr dataset(raw_dataset, &sida_dataset_destroy);

  int32_t classes = 0;
  sida_dataset_shape(dataset.get(), nullptr, nullptr, nullptr, &classes);
  std::vector<double> per_class(std::max(classes, 1));
  double accuracy = 0.0, risk = 0.0;
  if (sida_status s = sida_model_evaluate(model.get(), dataset.get(), &accuracy, &risk,
                                          per_class.data(),
                                          static_cast<int32_t>(per_class.size()));
      s != SIDA_OK)
    return exit_code_for(s, false);

  std::printf("accuracy %.6f\nrisk %.6f\n", accuracy, risk);
  for (int32_t c = 0; c < classes; ++c)
    std::printf("class_%d_accuracy %.6f\n", c, per_class[c]);
  return kExitOk;
}

int run_check(bool gradients, const std::string& seed_str) {
  std::uint64_t seed = 7;
  if (!seed_str.empty()) seed = std::strtoull(seed_str.c_str(), nullptr, 10);
  std::vector<char> buffer(1 << 16);
  int32_t failures = 0;
  const sida_status s =
      gradients ? sida_gradcheck(seed, buffer.data(), buffer.size(), &failures)
                : sida_mi_bench(seed, buffer.data(), buffer.size(), &failures);
  if (s != SIDA_OK) return exit_code_for(s, false);
  std::fputs(buffer.data(), stdout);
  return failures == 0 ? kExitOk : kExitRuntime;
}

std::string help_footer() {
  std::vector<char> buffer(1 << 15);
  if (sida_config_describe(buffer.data(), buffer.size()) != SIDA_OK) return {};
  return std::string("Configuration keys (set via file or --set key=value):\n") +
         buffer.data();
}

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_out) {
  cmd->add_option("--config", opts.config_path, "configuration file ([section] key = value)");
  cmd->add_option("--set", opts.overrides, "override a config key, e.g. --set train.epochs=10")
      ->type_name("KEY=VALUE");
  cmd->add_option("--seed", opts.seed, "master seed (overrides run.seed)");
  if (with_out) {
    cmd->add_option("--out", opts.out_dir, "output directory (default sida-out)");
    cmd->add_flag("--timings", opts.timings,
                  "record wall-clock times in metrics files (breaks byte-for-byte "
                  "reproducibility)");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string("sida ") + sida_version() +
               " - surrogate-information domain adaptation"};
  app.require_subcommand(1);
  app.footer(help_footer());

  CommonOpts gen_opts, train_opts, ablate_opts;
  std::string eval_model, eval_target, bench_seed, grad_seed;

  CLI::App* gen = app.add_subcommand("gen", "generate a synthetic domain pair as CSVs");
  add_common(gen, gen_opts, true);

  CLI::App* train = app.add_subcommand("train", "train on the configured domain pair");
  add_common(train, train_opts, true);

  CLI::App* eval = app.add_subcommand("eval", "score a target CSV with a checkpoint");
  eval->add_option("--model", eval_model, "checkpoint path")->required();
  eval->add_option("--target", eval_target, "target feature CSV with a label column")
      ->required();

  CLI::App* ablate =
      app.add_subcommand("ablate", "run the {MI} x {SD} ablation grid with shared seeds");
  add_common(ablate, ablate_opts, true);

  CLI::App* bench =
      app.add_subcommand("mi-bench", "validate the MI estimator against exact oracles");
  bench->add_option("--seed", bench_seed, "suite seed (default 7)");

  CLI::App* gradcheck = app.add_subcommand(
      "gradcheck", "check every analytic gradient against finite differences");
  gradcheck->add_option("--seed", grad_seed, "suite seed (default 7)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::fprintf(stderr, "sida: error: usage: %s\n", e.what());
    return kExitUsage;
  }

  if (gen->parsed()) return run_gen(gen_opts);
  if (train->parsed()) return run_train(train_opts);
  if (eval->parsed()) return run_eval(eval_model, eval_target);
  if (ablate->parsed()) return run_ablate(ablate_opts);
  if (bench->parsed()) return run_check(false, bench_seed);
  if (gradcheck->parsed()) return run_check(true, grad_seed);
  return kExitUsage;
}
