#include "core/metrics_io.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "core/errors.hpp"

namespace sida {

namespace {

nlohmann::json number_or_null(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

double total_wall_ms(const RunMetrics& metrics) {
  double total = 0.0;
  for (const TrainResult& run : metrics.runs)
    for (const EpochReport& e : run.epochs) total += e.wall_ms;
  return total;
}

}  // namespace

std::string epoch_report_json(const EpochReport& report, std::uint64_t seed,
                              bool include_timings) {
  nlohmann::json j;
  j["seed"] = seed;
  j["epoch"] = report.epoch;
  j["loss_classify"] = report.loss_classify;
  j["loss_mi"] = report.loss_mi;
  j["loss_auxiliary"] = report.loss_auxiliary;
  j["loss_laplacian"] = report.loss_laplacian;
  j["loss_model"] = report.loss_model;
  j["mi_lower_bound"] = number_or_null(report.mi_lower_bound);
  j["target_accuracy"] = number_or_null(report.target_accuracy);
  j["wall_ms"] = include_timings ? report.wall_ms : 0.0;
  return j.dump();
}

void write_metrics_jsonl(const std::string& path, const RunMetrics& metrics,
                         bool include_timings) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write metrics file '" + path + "'");
  for (const TrainResult& run : metrics.runs)
    for (const EpochReport& e : run.epochs)
      out << epoch_report_json(e, run.seed, include_timings) << '\n';
  if (!out) throw IoError("write failed for '" + path + "'");
}

void write_summary_csv(const std::string& path,
                       const std::vector<const RunMetrics*>& rows,
                       std::uint64_t master_seed, const std::string& task,
                       int epochs, bool include_timings) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write summary file '" + path + "'");
  out << "seed,task,flags,acc_mean,acc_std,epochs,wall_ms\n";
  char buf[64];
  for (const RunMetrics* row : rows) {
    out << master_seed << ',' << task << ',' << row->flags_label << ',';
    std::snprintf(buf, sizeof(buf), "%.17g", row->accuracy_mean);
    out << buf << ',';
    std::snprintf(buf, sizeof(buf), "%.17g", row->accuracy_std);
    out << buf << ',' << epochs << ',';
    std::snprintf(buf, sizeof(buf), "%.17g", include_timings ? total_wall_ms(*row) : 0.0);
    out << buf << '\n';
  }
  if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace sida
