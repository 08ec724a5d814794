#include "core/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "core/errors.hpp"

namespace sida {

namespace {

struct KeyDesc {
  const char* key;  // "section.name"
  const char* def;
  const char* help;
};

// Reference settings below are the published SIDA hyperparameters; the rest
// are desk-scale defaults chosen so a full run stays under a couple of
// minutes on one core.
const std::vector<KeyDesc>& registry() {
  static const std::vector<KeyDesc> keys = {
      {"data.family", "two-moons", "data source: two-moons, gaussian-blobs, or csv"},
      {"data.n", "600", "samples per domain for synthetic families (even, balanced classes)"},
      {"data.classes", "2", "class count for gaussian-blobs (two-moons is fixed at 2)"},
      {"data.rotation_deg", "35", "two-moons: target rotation about the arcs' centroid, degrees"},
      {"data.shift", "0,0", "gaussian-blobs: target per-class mean translation vector"},
      {"data.noise", "0.1", "synthetic generator noise scale (>= 0)"},
      {"paths.source_csv", "", "labeled source feature CSV (family = csv)"},
      {"paths.target_csv", "", "target feature CSV; a label column becomes evaluation-only truth"},
      {"model.hidden", "32,32", "encoder hidden layer widths"},
      {"model.feature_dim", "16", "encoder output dimensionality d_Z"},
      {"model.activation", "tanh", "encoder activation: tanh, relu, or identity"},
      {"train.alpha1", "0.3", "MI loss coefficient [SIDA reference setting]"},
      {"train.alpha2", "0.1", "auxiliary loss coefficient [SIDA reference setting]"},
      {"train.epochs", "60", "training epochs"},
      {"train.batch", "64", "class-balanced batch size (divisible by class count)"},
      {"train.lr_encoder", "0.02", "initial encoder learning rate (desk-scale default)"},
      {"train.lr_classifier", "0.2",
       "initial classifier learning rate; 10x the encoder rate [SIDA reference setting]"},
      {"train.lr_a", "10", "learning-rate schedule a in eta0/(1+a p)^b [SIDA reference setting]"},
      {"train.lr_b", "0.75", "learning-rate schedule b [SIDA reference setting]"},
      {"train.momentum", "0.9", "SGD momentum [SIDA reference setting]"},
      {"train.weight_decay", "5e-4", "SGD weight decay [SIDA reference setting]"},
      {"train.mi", "true", "enable the MI maximization term"},
      {"train.sd", "true", "enable surrogate-distribution optimization (off = hard pseudo-labels)"},
      {"train.seeds", "1", "independent runs aggregated into one summary row"},
      {"surrogate.knn_k", "3", "K of the K-nearest graph on target features [SIDA reference setting]"},
      {"surrogate.steps", "3", "projected update steps T per epoch [SIDA reference setting]"},
      {"surrogate.eta1", "0.5", "step size along the Laplacian direction [SIDA reference setting]"},
      {"surrogate.eta2", "0.05", "step size along the gated MI direction [SIDA reference setting]"},
      {"surrogate.theta_percentile", "80",
       "distance-filter percentile for K-means init (100 disables the filter)"},
      {"surrogate.adjacency", "binary", "k-NN edge weights: binary or gaussian"},
      {"score.m1", "0", "lower clamp of the critic distance"},
      {"score.m2_scale", "2",
       "upper clamp as a multiple of the median pairwise feature distance, refreshed each epoch"},
      {"score.sign", "-1", "critic orientation; -1 attracts same-class pairs"},
      {"score.eps_norm", "1e-8", "distance smoothing so coincident points stay differentiable"},
      {"run.seed", "1", "master seed; every stream derives from it"},
  };
  return keys;
}

const KeyDesc* find_key(const std::string& key) {
  for (const KeyDesc& k : registry())
    if (key == k.key) return &k;
  return nullptr;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  std::size_t consumed = 0;
  double out = 0.0;
  try {
    out = std::stod(value, &consumed);
  } catch (const std::exception&) {
    consumed = 0;
  }
  if (consumed != value.size() || value.empty() || !std::isfinite(out))
    throw SchemaError("config: " + key + ": expected a number, got '" + value + "'");
  return out;
}

long parse_long(const std::string& key, const std::string& value) {
  std::size_t consumed = 0;
  long out = 0;
  try {
    out = std::stol(value, &consumed, 10);
  } catch (const std::exception&) {
    consumed = 0;
  }
  if (consumed != value.size() || value.empty())
    throw SchemaError("config: " + key + ": expected an integer, got '" + value + "'");
  return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  std::size_t consumed = 0;
  unsigned long long out = 0;
  try {
    out = std::stoull(value, &consumed, 10);
  } catch (const std::exception&) {
    consumed = 0;
  }
  if (consumed != value.size() || value.empty())
    throw SchemaError("config: " + key + ": expected an unsigned integer, got '" + value + "'");
  return static_cast<std::uint64_t>(out);
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "on") return true;
  if (value == "false" || value == "0" || value == "off") return false;
  throw SchemaError("config: " + key + ": expected a boolean, got '" + value + "'");
}

std::vector<double> parse_double_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(key, trim(item)));
  return out;
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
  std::vector<int> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ','))
    out.push_back(static_cast<int>(parse_long(key, trim(item))));
  return out;
}

}  // namespace

Config::Config() {
  for (const KeyDesc& k : registry()) values_[k.key] = k.def;
}

void Config::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file '" + path + "'");

  std::string line;
  std::string section;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw SchemaError(path + ": line " + std::to_string(line_no) +
                          ": malformed section header");
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw SchemaError(path + ": line " + std::to_string(line_no) +
                        ": expected key = value");
    const std::string name = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (section.empty())
      throw SchemaError(path + ": line " + std::to_string(line_no) +
                        ": key outside any [section]");
    const std::string key = section + "." + name;
    if (find_key(key) == nullptr)
      throw SchemaError(path + ": line " + std::to_string(line_no) +
                        ": unknown key '" + key + "'");
    values_[key] = value;
  }
}

void Config::set(const std::string& dotted_key, const std::string& value) {
  if (find_key(dotted_key) == nullptr)
    throw SchemaError("config: unknown key '" + dotted_key + "'");
  values_[dotted_key] = value;
}

std::string Config::get(const std::string& dotted_key) const {
  const auto it = values_.find(dotted_key);
  if (it == values_.end())
    throw SchemaError("config: unknown key '" + dotted_key + "'");
  return it->second;
}

std::string Config::describe() {
  std::ostringstream out;
  for (const KeyDesc& k : registry()) {
    out << "  " << k.key << " = " << k.def;
    out << "\n      " << k.help << "\n";
  }
  return out.str();
}

RunSetup Config::resolve() const {
  RunSetup setup;
  setup.family = get("data.family");
  if (setup.family != "two-moons" && setup.family != "gaussian-blobs" &&
      setup.family != "csv")
    throw SchemaError("config: data.family must be two-moons, gaussian-blobs, or csv");

  setup.seed = parse_u64("run.seed", get("run.seed"));

  setup.spec.family = setup.family == "gaussian-blobs" ? SyntheticFamily::gaussian_blobs
                                                       : SyntheticFamily::two_moons;
  setup.spec.n_per_domain = static_cast<int>(parse_long("data.n", get("data.n")));
  setup.spec.n_classes = static_cast<int>(parse_long("data.classes", get("data.classes")));
  if (setup.family == "two-moons") setup.spec.n_classes = 2;
  setup.spec.rotation_deg = parse_double("data.rotation_deg", get("data.rotation_deg"));
  setup.spec.shift = parse_double_list("data.shift", get("data.shift"));
  setup.spec.noise = parse_double("data.noise", get("data.noise"));
  // the generator stream is split off the master seed
  setup.spec.seed = SeededRng(setup.seed).derive("data").seed();

  setup.source_csv = get("paths.source_csv");
  setup.target_csv = get("paths.target_csv");
  if (setup.family == "csv") {
    if (setup.source_csv.empty() || setup.target_csv.empty())
      throw SchemaError("config: family csv requires paths.source_csv and paths.target_csv");
  }

  TrainConfig& t = setup.train;
  t.alpha1 = parse_double("train.alpha1", get("train.alpha1"));
  t.alpha2 = parse_double("train.alpha2", get("train.alpha2"));
  t.epochs = static_cast<int>(parse_long("train.epochs", get("train.epochs")));
  t.batch = static_cast<int>(parse_long("train.batch", get("train.batch")));
  t.lr.encoder_eta0 = parse_double("train.lr_encoder", get("train.lr_encoder"));
  t.lr.classifier_eta0 = parse_double("train.lr_classifier", get("train.lr_classifier"));
  t.lr.a = parse_double("train.lr_a", get("train.lr_a"));
  t.lr.b = parse_double("train.lr_b", get("train.lr_b"));
  t.momentum = parse_double("train.momentum", get("train.momentum"));
  t.weight_decay = parse_double("train.weight_decay", get("train.weight_decay"));
  t.flags.mi_enabled = parse_bool("train.mi", get("train.mi"));
  t.flags.sd_enabled = parse_bool("train.sd", get("train.sd"));
  t.seed_count = static_cast<int>(parse_long("train.seeds", get("train.seeds")));
  t.seed = setup.seed;

  t.hidden = parse_int_list("model.hidden", get("model.hidden"));
  t.feature_dim = static_cast<int>(parse_long("model.feature_dim", get("model.feature_dim")));
  try {
    t.activation = activation_from_string(get("model.activation"));
  } catch (const InvalidArgumentError& e) {
    throw SchemaError(std::string("config: ") + e.what());
  }

  t.surrogate.knn_k = static_cast<int>(parse_long("surrogate.knn_k", get("surrogate.knn_k")));
  t.surrogate.update_steps =
      static_cast<int>(parse_long("surrogate.steps", get("surrogate.steps")));
  t.surrogate.eta1 = parse_double("surrogate.eta1", get("surrogate.eta1"));
  t.surrogate.eta2 = parse_double("surrogate.eta2", get("surrogate.eta2"));
  t.surrogate.theta_percentile =
      parse_double("surrogate.theta_percentile", get("surrogate.theta_percentile"));
  const std::string adjacency = get("surrogate.adjacency");
  if (adjacency == "binary") t.surrogate.gaussian_adjacency = false;
  else if (adjacency == "gaussian") t.surrogate.gaussian_adjacency = true;
  else throw SchemaError("config: surrogate.adjacency must be binary or gaussian");

  t.score.m1 = parse_double("score.m1", get("score.m1"));
  t.score.m2_scale = parse_double("score.m2_scale", get("score.m2_scale"));
  t.score.sign = parse_double("score.sign", get("score.sign"));
  t.score.eps_norm = parse_double("score.eps_norm", get("score.eps_norm"));

  return setup;
}

DomainPair open_dataset(const RunSetup& setup) {
  if (setup.family == "two-moons") return gen_two_moons_pair(setup.spec);
  if (setup.family == "gaussian-blobs") return gen_gaussian_blobs_pair(setup.spec);

  const FeatureFile source = load_feature_csv(setup.source_csv, CsvRole::source);
  const FeatureFile target = load_feature_csv(setup.target_csv, CsvRole::target);

  DomainPair pair;
  pair.source.X = source.X;
  pair.source.y = *source.labels;
  pair.target.X = target.X;

  int n_classes = 0;
  for (int y : pair.source.y) n_classes = std::max(n_classes, y + 1);
  if (target.labels.has_value()) {
    for (int y : *target.labels) n_classes = std::max(n_classes, y + 1);
    pair.target.set_eval_labels(*target.labels);
  }
  require(n_classes >= 2, "csv data: need at least 2 classes");
  pair.n_classes = n_classes;
  require(pair.source.dim() == pair.target.dim(),
          "csv data: source/target dimensionality differs");
  return pair;
}

std::string task_label(const RunSetup& setup) {
  auto fmt = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return std::string(buf);
  };
  if (setup.family == "two-moons") return "two-moons-rot" + fmt(setup.spec.rotation_deg);
  if (setup.family == "gaussian-blobs") {
    std::string s = "gaussian-blobs-shift";
    for (std::size_t i = 0; i < setup.spec.shift.size(); ++i)
      s += (i ? "_" : "") + fmt(setup.spec.shift[i]);
    return s;
  }
  std::string stem = setup.source_csv;
  const std::size_t slash = stem.find_last_of('/');
  if (slash != std::string::npos) stem = stem.substr(slash + 1);
  const std::size_t dot = stem.find_last_of('.');
  if (dot != std::string::npos) stem = stem.substr(0, dot);
  return "csv-" + stem;
}

}  // namespace sida
