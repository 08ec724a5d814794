#pragma once

#include <string>
#include <vector>

#include "core/trainer.hpp"

namespace sida {

/// One JSON object per epoch per seed. Wall-clock values are written as 0
/// unless `include_timings` is set, which keeps repeated runs byte-identical.
void write_metrics_jsonl(const std::string& path, const RunMetrics& metrics,
                         bool include_timings);

/// Summary rows: `seed,task,flags,acc_mean,acc_std,epochs,wall_ms`.
void write_summary_csv(const std::string& path,
                       const std::vector<const RunMetrics*>& rows,
                       std::uint64_t master_seed, const std::string& task,
                       int epochs, bool include_timings);

std::string epoch_report_json(const EpochReport& report, std::uint64_t seed,
                              bool include_timings);

}  // namespace sida
