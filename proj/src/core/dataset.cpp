#include "core/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "core/errors.hpp"

namespace sida {

const std::vector<int>& UnlabeledSet::eval_labels() const {
  require(hidden_y_.has_value(), "eval_labels: target ground truth unavailable");
  return *hidden_y_;
}

void UnlabeledSet::set_eval_labels(std::vector<int> labels) {
  require(labels.size() == X.rows(), "set_eval_labels: length mismatch");
  hidden_y_ = std::move(labels);
}

namespace {

/// Noiseless two-moons point for class `label` at arc parameter t in [0, pi].
void moon_point(int label, double t, double& x, double& y) {
  if (label == 0) {
    x = std::cos(t);
    y = std::sin(t);
  } else {
    x = 1.0 - std::cos(t);
    y = 0.5 - std::sin(t);
  }
}

LabeledSet draw_two_moons(int n, double noise, SeededRng& rng) {
  LabeledSet set;
  set.X = Matrix(n, 2);
  set.y.resize(n);
  const int half = n / 2;
  for (int i = 0; i < n; ++i) {
    const int label = i < half ? 0 : 1;
    const double t = rng.uniform() * std::numbers::pi;
    double x, y;
    moon_point(label, t, x, y);
    set.X(i, 0) = x + noise * rng.gaussian();
    set.X(i, 1) = y + noise * rng.gaussian();
    set.y[i] = label;
  }
  return set;
}

void rotate_about(Matrix& points, double degrees, double cx, double cy) {
  const double rad = degrees * std::numbers::pi / 180.0;
  const double c = std::cos(rad), s = std::sin(rad);
  for (std::size_t i = 0; i < points.rows(); ++i) {
    const double x = points(i, 0) - cx;
    const double y = points(i, 1) - cy;
    points(i, 0) = cx + c * x - s * y;
    points(i, 1) = cy + s * x + c * y;
  }
}

}  // namespace

DomainPair gen_two_moons_pair(const SyntheticSpec& spec) {
  require(spec.n_per_domain >= 4, "two-moons: need at least 4 samples per domain");
  require(spec.n_per_domain % 2 == 0, "two-moons: n per domain must be even");
  require(spec.noise >= 0.0, "two-moons: negative noise");

  SeededRng master(spec.seed);
  SeededRng src_rng = master.derive("two-moons-source");
  SeededRng tgt_rng = master.derive("two-moons-target");

  DomainPair pair;
  pair.n_classes = 2;
  pair.source = draw_two_moons(spec.n_per_domain, spec.noise, src_rng);

  LabeledSet tgt = draw_two_moons(spec.n_per_domain, spec.noise, tgt_rng);
  rotate_about(tgt.X, spec.rotation_deg, kTwoMoonsCentroidX, kTwoMoonsCentroidY);
  pair.target.X = std::move(tgt.X);
  pair.target.set_eval_labels(std::move(tgt.y));
  return pair;
}

DomainPair gen_gaussian_blobs_pair(const SyntheticSpec& spec) {
  require(spec.n_classes >= 2, "gaussian-blobs: need at least 2 classes");
  require(spec.n_per_domain >= 2 * spec.n_classes, "gaussian-blobs: too few samples");
  require(spec.n_per_domain % spec.n_classes == 0,
          "gaussian-blobs: n per domain must be divisible by class count");
  require(spec.noise >= 0.0, "gaussian-blobs: negative noise");
  require(spec.shift.empty() || spec.shift.size() == 2,
          "gaussian-blobs: shift vector must be 2-D");

  const int per_class = spec.n_per_domain / spec.n_classes;
  const double sx = spec.shift.empty() ? 0.0 : spec.shift[0];
  const double sy = spec.shift.empty() ? 0.0 : spec.shift[1];

  SeededRng master(spec.seed);

  // Class means sit on the unit circle; the target's are translated by the
  // shift vector, so label marginals match while class conditionals differ.
  auto draw = [&](SeededRng& rng, bool shifted) {
    LabeledSet set;
    set.X = Matrix(spec.n_per_domain, 2);
    set.y.resize(spec.n_per_domain);
    int row = 0;
    for (int c = 0; c < spec.n_classes; ++c) {
      const double angle = 2.0 * std::numbers::pi * c / spec.n_classes;
      const double mx = std::cos(angle) + (shifted ? sx : 0.0);
      const double my = std::sin(angle) + (shifted ? sy : 0.0);
      for (int i = 0; i < per_class; ++i, ++row) {
        set.X(row, 0) = mx + spec.noise * rng.gaussian();
        set.X(row, 1) = my + spec.noise * rng.gaussian();
        set.y[row] = c;
      }
    }
    return set;
  };

  SeededRng src_rng = master.derive("blobs-source");
  SeededRng tgt_rng = master.derive("blobs-target");

  DomainPair pair;
  pair.n_classes = spec.n_classes;
  pair.source = draw(src_rng, false);
  LabeledSet tgt = draw(tgt_rng, true);
  pair.target.X = std::move(tgt.X);
  pair.target.set_eval_labels(std::move(tgt.y));
  return pair;
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

FeatureFile load_feature_csv(const std::string& path, CsvRole role) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open feature file '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const std::vector<std::string> header = split_fields(line);
  bool has_label = !header.empty() && header.back() == "label";
  const std::size_t d = header.size() - (has_label ? 1 : 0);
  if (d == 0) throw ParseError(path + ": header names no feature columns");
  for (std::size_t j = 0; j < d; ++j) {
    if (header[j] != "f" + std::to_string(j))
      throw ParseError(path + ": header column " + std::to_string(j) +
                       " must be 'f" + std::to_string(j) + "'");
  }
  if (role == CsvRole::source && !has_label)
    throw SchemaError(path + ": source file requires a 'label' column");

  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_fields(line);
    if (fields.size() != header.size())
      throw ParseError(path + ": line " + std::to_string(line_no) + ": expected " +
                       std::to_string(header.size()) + " fields, got " +
                       std::to_string(fields.size()));
    std::vector<double> row(d);
    for (std::size_t j = 0; j < d; ++j) {
      std::size_t consumed = 0;
      try {
        row[j] = std::stod(fields[j], &consumed);
      } catch (const std::exception&) {
        consumed = 0;
      }
      if (consumed != fields[j].size() || fields[j].empty() || !std::isfinite(row[j]))
        throw ParseError(path + ": line " + std::to_string(line_no) +
                         ": non-numeric cell '" + fields[j] + "'");
    }
    if (has_label) {
      const std::string& cell = fields[d];
      std::size_t consumed = 0;
      int value = 0;
      try {
        value = std::stoi(cell, &consumed, 10);
      } catch (const std::exception&) {
        consumed = 0;
      }
      if (consumed != cell.size() || cell.empty() || value < 0)
        throw ParseError(path + ": line " + std::to_string(line_no) +
                         ": bad label '" + cell + "'");
      labels.push_back(value);
    }
    rows.push_back(std::move(row));
  }

  FeatureFile file;
  file.X = Matrix::from_rows(rows);
  if (file.X.empty()) file.X = Matrix(0, d);
  if (has_label) file.labels = std::move(labels);
  return file;
}

void write_feature_csv(const std::string& path, const Matrix& X,
                       const std::vector<int>* labels) {
  if (labels != nullptr)
    require(labels->size() == X.rows(), "write_feature_csv: label length mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write feature file '" + path + "'");

  for (std::size_t j = 0; j < X.cols(); ++j) {
    if (j > 0) out << ',';
    out << 'f' << j;
  }
  if (labels != nullptr) out << ",label";
  out << '\n';

  char buf[64];
  for (std::size_t i = 0; i < X.rows(); ++i) {
    for (std::size_t j = 0; j < X.cols(); ++j) {
      if (j > 0) out << ',';
      std::snprintf(buf, sizeof(buf), "%.17g", X(i, j));
      out << buf;
    }
    if (labels != nullptr) out << ',' << (*labels)[i];
    out << '\n';
  }
  if (!out) throw IoError("write failed for '" + path + "'");
}

std::vector<std::vector<std::size_t>> indices_by_class(const std::vector<int>& labels,
                                                       int n_classes) {
  require(n_classes >= 1, "indices_by_class: need at least one class");
  std::vector<std::vector<std::size_t>> by_class(n_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    require(labels[i] >= 0 && labels[i] < n_classes,
            "indices_by_class: label out of range");
    by_class[labels[i]].push_back(i);
  }
  for (int c = 0; c < n_classes; ++c)
    require(!by_class[c].empty(),
            "indices_by_class: class " + std::to_string(c) + " has no samples");
  return by_class;
}

std::vector<std::vector<std::size_t>> class_balanced_batches(
    const LabeledSet& set, int n_classes, int batch, int n_batches, SeededRng& rng) {
  require(batch >= 1 && n_batches >= 0, "class_balanced_batches: bad sizes");
  require(batch % n_classes == 0,
          "class_balanced_batches: batch size not divisible by class count");
  const auto by_class = indices_by_class(set.y, n_classes);
  const int per_class = batch / n_classes;

  std::vector<std::vector<std::size_t>> batches;
  batches.reserve(n_batches);
  for (int b = 0; b < n_batches; ++b) {
    std::vector<std::size_t> indices;
    indices.reserve(batch);
    for (int c = 0; c < n_classes; ++c)
      for (int s = 0; s < per_class; ++s)
        indices.push_back(by_class[c][rng.uniform_index(by_class[c].size())]);
    batches.push_back(std::move(indices));
  }
  return batches;
}

}  // namespace sida
