#pragma once

#include <map>
#include <string>

#include "core/dataset.hpp"
#include "core/trainer.hpp"

namespace sida {

/// Fully resolved run description: where data comes from plus every training
/// hyperparameter. All randomness descends from `seed`.
struct RunSetup {
  std::string family;  // two-moons | gaussian-blobs | csv
  SyntheticSpec spec;
  std::string source_csv;
  std::string target_csv;
  TrainConfig train;
  std::uint64_t seed = 1;
};

/// `[section] key = value` configuration with a fixed key registry.
/// Unknown sections or keys are rejected; missing keys fall back to the
/// registered defaults.
class Config {
 public:
  Config();

  void load_file(const std::string& path);
  void set(const std::string& dotted_key, const std::string& value);
  std::string get(const std::string& dotted_key) const;

  /// Parse and validate everything into a RunSetup.
  RunSetup resolve() const;

  /// One line per key: `section.key = default  -- help`.
  static std::string describe();

 private:
  std::map<std::string, std::string> values_;
};

DomainPair open_dataset(const RunSetup& setup);

/// Short deterministic label for summary rows, e.g. "two-moons-rot35".
std::string task_label(const RunSetup& setup);

}  // namespace sida
