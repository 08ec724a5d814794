#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "core/matrix.hpp"
#include "core/rng.hpp"

namespace sida {

struct LabeledSet {
  Matrix X;
  std::vector<int> y;

  std::size_t size() const { return X.rows(); }
  std::size_t dim() const { return X.cols(); }
};

/// Target-domain samples. Ground-truth labels, when known, ride along for
/// evaluation only; they are deliberately awkward to reach so the training
/// path cannot pick them up by accident.
class UnlabeledSet {
 public:
  Matrix X;

  std::size_t size() const { return X.rows(); }
  std::size_t dim() const { return X.cols(); }

  bool has_eval_labels() const { return hidden_y_.has_value(); }
  const std::vector<int>& eval_labels() const;
  void set_eval_labels(std::vector<int> labels);

 private:
  std::optional<std::vector<int>> hidden_y_;
};

struct DomainPair {
  LabeledSet source;
  UnlabeledSet target;
  int n_classes = 0;
};

enum class SyntheticFamily { two_moons, gaussian_blobs };

struct SyntheticSpec {
  SyntheticFamily family = SyntheticFamily::two_moons;
  int n_per_domain = 600;
  int n_classes = 2;              // fixed at 2 for two-moons
  double rotation_deg = 0.0;      // two-moons shift
  std::vector<double> shift;      // gaussian-blobs shift (per-class mean translation)
  double noise = 0.1;
  std::uint64_t seed = 1;
};

/// Centroid of the noiseless two-moons arcs; rotations pivot here.
inline constexpr double kTwoMoonsCentroidX = 0.5;
inline constexpr double kTwoMoonsCentroidY = 0.25;

DomainPair gen_two_moons_pair(const SyntheticSpec& spec);
DomainPair gen_gaussian_blobs_pair(const SyntheticSpec& spec);

enum class CsvRole { source, target };

struct FeatureFile {
  Matrix X;
  std::optional<std::vector<int>> labels;
};

/// Parses the feature interchange CSV: header `f0,...,f{d-1}[,label]`,
/// decimal floats, LF line endings. Source role requires the label column.
FeatureFile load_feature_csv(const std::string& path, CsvRole role);

void write_feature_csv(const std::string& path, const Matrix& X,
                       const std::vector<int>* labels);

/// Index batches with exactly batch/n_classes draws per class, uniform with
/// replacement within each class.
std::vector<std::vector<std::size_t>> class_balanced_batches(
    const LabeledSet& set, int n_classes, int batch, int n_batches, SeededRng& rng);

/// Indices of set members per class; throws if a class in [0, n_classes) is absent.
std::vector<std::vector<std::size_t>> indices_by_class(const std::vector<int>& labels,
                                                       int n_classes);

}  // namespace sida
