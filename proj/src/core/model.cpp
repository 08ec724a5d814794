#include "core/model.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "core/errors.hpp"

namespace sida {

Activation activation_from_string(const std::string& name) {
  if (name == "tanh") return Activation::tanh_fn;
  if (name == "relu") return Activation::relu;
  if (name == "identity") return Activation::identity;
  throw InvalidArgumentError("unknown activation '" + name + "'");
}

std::string activation_name(Activation a) {
  switch (a) {
    case Activation::tanh_fn: return "tanh";
    case Activation::relu: return "relu";
    case Activation::identity: return "identity";
  }
  return "tanh";
}

namespace {

double apply_activation(Activation a, double x) {
  switch (a) {
    case Activation::tanh_fn: return std::tanh(x);
    case Activation::relu: return x > 0.0 ? x : 0.0;
    case Activation::identity: return x;
  }
  return x;
}

double activation_derivative(Activation a, double pre, double post) {
  switch (a) {
    case Activation::tanh_fn: return 1.0 - post * post;
    case Activation::relu: return pre > 0.0 ? 1.0 : 0.0;
    case Activation::identity: return 1.0;
  }
  (void)pre;
  return 1.0;
}

Matrix uniform_init(std::size_t rows, std::size_t cols, SeededRng& rng) {
  // +/- 1/sqrt(fan_in)
  const double bound = 1.0 / std::sqrt(static_cast<double>(rows));
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < m.size(); ++i)
    m.data()[i] = rng.uniform(-bound, bound);
  return m;
}

}  // namespace

EncoderParams make_encoder(std::size_t input_dim, const std::vector<int>& hidden,
                           std::size_t feature_dim, Activation activation,
                           SeededRng rng) {
  require(input_dim >= 1 && feature_dim >= 1, "make_encoder: bad dimensions");
  EncoderParams p;
  p.activation = activation;
  std::size_t in = input_dim;
  for (int h : hidden) {
    require(h >= 1, "make_encoder: non-positive hidden width");
    p.weights.push_back(uniform_init(in, static_cast<std::size_t>(h), rng));
    p.biases.emplace_back(1, static_cast<std::size_t>(h));
    in = static_cast<std::size_t>(h);
  }
  p.weights.push_back(uniform_init(in, feature_dim, rng));
  p.biases.emplace_back(1, feature_dim);
  return p;
}

ClassifierParams make_classifier(std::size_t feature_dim, int n_classes, SeededRng rng) {
  require(n_classes >= 2, "make_classifier: need at least 2 classes");
  ClassifierParams p;
  p.weight = uniform_init(feature_dim, static_cast<std::size_t>(n_classes), rng);
  p.bias = Matrix(1, static_cast<std::size_t>(n_classes));
  return p;
}

Matrix encode_forward(const EncoderParams& params, const Matrix& X, EncodeCache* cache) {
  require(!params.weights.empty(), "encode_forward: empty encoder");
  require(X.cols() == params.input_dim(), "encode_forward: input width mismatch");
  require(X.all_finite(), "encode_forward: non-finite input");

  if (cache != nullptr) {
    cache->inputs.clear();
    cache->pre_activations.clear();
  }

  Matrix current = X;
  const std::size_t n_layers = params.weights.size();
  for (std::size_t l = 0; l < n_layers; ++l) {
    if (cache != nullptr) cache->inputs.push_back(current);
    Matrix pre = matmul(current, params.weights[l]);
    for (std::size_t i = 0; i < pre.rows(); ++i)
      for (std::size_t j = 0; j < pre.cols(); ++j) pre(i, j) += params.biases[l](0, j);
    const bool is_last = (l + 1 == n_layers);
    if (cache != nullptr) cache->pre_activations.push_back(pre);
    if (!is_last) {
      for (std::size_t i = 0; i < pre.size(); ++i)
        pre.data()[i] = apply_activation(params.activation, pre.data()[i]);
    }
    current = std::move(pre);
  }
  return current;
}

EncoderGrads zero_encoder_grads(const EncoderParams& params) {
  EncoderGrads g;
  for (const Matrix& w : params.weights) g.weights.emplace_back(w.rows(), w.cols());
  for (const Matrix& b : params.biases) g.biases.emplace_back(b.rows(), b.cols());
  return g;
}

void encode_backward(const EncoderParams& params, const EncodeCache& cache,
                     const Matrix& dZ, EncoderGrads& grads, Matrix* dX) {
  const std::size_t n_layers = params.weights.size();
  require(cache.inputs.size() == n_layers, "encode_backward: cache mismatch");

  Matrix delta = dZ;  // gradient w.r.t. layer output (post-activation)
  for (std::size_t l = n_layers; l-- > 0;) {
    const bool is_last = (l + 1 == n_layers);
    if (!is_last) {
      // multiply by the activation derivative at the cached pre-activations
      const Matrix& pre = cache.pre_activations[l];
      for (std::size_t i = 0; i < delta.rows(); ++i) {
        for (std::size_t j = 0; j < delta.cols(); ++j) {
          const double p = pre(i, j);
          delta(i, j) *= activation_derivative(params.activation, p,
                                               apply_activation(params.activation, p));
        }
      }
    }
    axpy_inplace(grads.weights[l], 1.0, matmul_at_b(cache.inputs[l], delta));
    const std::vector<double> bias_grad = delta.col_sums();
    for (std::size_t j = 0; j < bias_grad.size(); ++j) grads.biases[l](0, j) += bias_grad[j];
    if (l > 0 || dX != nullptr) {
      Matrix prev = matmul_a_bt(delta, params.weights[l]);
      if (l == 0 && dX != nullptr) *dX = std::move(prev);
      else delta = std::move(prev);
    }
  }
}

ClassifierOut classifier_forward(const ClassifierParams& params, const Matrix& Z) {
  require(Z.cols() == params.weight.rows(), "classifier_forward: feature width mismatch");
  ClassifierOut out;
  out.logits = matmul(Z, params.weight);
  for (std::size_t i = 0; i < out.logits.rows(); ++i)
    for (std::size_t j = 0; j < out.logits.cols(); ++j)
      out.logits(i, j) += params.bias(0, j);

  out.probabilities = Matrix(out.logits.rows(), out.logits.cols());
  for (std::size_t i = 0; i < out.logits.rows(); ++i) {
    const double* lrow = out.logits.row(i);
    double* prow = out.probabilities.row(i);
    double maxv = lrow[0];
    for (std::size_t j = 1; j < out.logits.cols(); ++j) maxv = std::max(maxv, lrow[j]);
    double total = 0.0;
    for (std::size_t j = 0; j < out.logits.cols(); ++j) {
      prow[j] = std::exp(lrow[j] - maxv);
      total += prow[j];
    }
    for (std::size_t j = 0; j < out.logits.cols(); ++j) prow[j] /= total;
  }
  return out;
}

LossGrad classification_loss(const Matrix& probabilities, const std::vector<int>& labels) {
  require(probabilities.rows() == labels.size(), "classification_loss: batch mismatch");
  const std::size_t n = probabilities.rows();
  const std::size_t c = probabilities.cols();
  LossGrad out;
  out.grad_logits = Matrix(n, c);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const int y = labels[i];
    require(y >= 0 && static_cast<std::size_t>(y) < c, "classification_loss: label out of range");
    const double p = std::max(probabilities(i, y), 1e-300);
    total -= std::log(p);
    for (std::size_t j = 0; j < c; ++j)
      out.grad_logits(i, j) = (probabilities(i, j) - (static_cast<std::size_t>(y) == j ? 1.0 : 0.0)) /
                              static_cast<double>(n);
  }
  out.loss = total / static_cast<double>(n);
  return out;
}

LossGrad auxiliary_loss(const Matrix& probabilities, const Matrix& surrogate_weights) {
  require(probabilities.rows() == surrogate_weights.rows(),
          "auxiliary_loss: row count mismatch");
  require(probabilities.cols() == surrogate_weights.cols(),
          "auxiliary_loss: class count mismatch");
  const std::size_t n = probabilities.rows();
  const std::size_t c = probabilities.cols();
  const double inv_ny = 1.0 / static_cast<double>(c);

  LossGrad out;
  out.grad_logits = Matrix(n, c);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* p = probabilities.row(i);
    const double* w = surrogate_weights.row(i);
    double* g = out.grad_logits.row(i);
    // dL/dp_y = -(2 / n_Y) W[i][y] (1 - p_y)
    double dot = 0.0;  // sum_y dL/dp_y * p_y, for the softmax jacobian
    for (std::size_t y = 0; y < c; ++y) {
      const double miss = 1.0 - p[y];
      total += inv_ny * w[y] * miss * miss;
      const double dldp = -2.0 * inv_ny * w[y] * miss;
      g[y] = dldp;  // temporarily store dL/dp
      dot += dldp * p[y];
    }
    for (std::size_t y = 0; y < c; ++y) g[y] = p[y] * (g[y] - dot);
  }
  out.loss = total;
  return out;
}

OptimizerState make_optimizer_state(const std::vector<const Matrix*>& params,
                                    double momentum, double weight_decay) {
  OptimizerState s;
  s.momentum = momentum;
  s.weight_decay = weight_decay;
  for (const Matrix* p : params) s.velocity.emplace_back(p->rows(), p->cols());
  return s;
}

void sgd_step(const std::vector<Matrix*>& params, const std::vector<const Matrix*>& grads,
              OptimizerState& state, double lr) {
  require(params.size() == grads.size() && params.size() == state.velocity.size(),
          "sgd_step: parameter group size mismatch");
  for (std::size_t t = 0; t < params.size(); ++t) {
    Matrix& p = *params[t];
    const Matrix& g = *grads[t];
    Matrix& v = state.velocity[t];
    require(p.same_shape(g) && p.same_shape(v), "sgd_step: shape mismatch");
    for (std::size_t i = 0; i < p.size(); ++i) {
      v.data()[i] = state.momentum * v.data()[i] + g.data()[i] +
                    state.weight_decay * p.data()[i];
      p.data()[i] -= lr * v.data()[i];
    }
  }
}

double lr_at(double eta0, double a, double b, double progress) {
  require(eta0 > 0.0, "lr_at: eta0 must be positive");
  require(a >= 0.0 && b >= 0.0, "lr_at: a and b must be non-negative");
  require(progress >= 0.0 && progress <= 1.0, "lr_at: progress outside [0, 1]");
  return eta0 / std::pow(1.0 + a * progress, b);
}

std::vector<Matrix*> encoder_param_list(EncoderParams& p) {
  std::vector<Matrix*> out;
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    out.push_back(&p.weights[l]);
    out.push_back(&p.biases[l]);
  }
  return out;
}

std::vector<const Matrix*> encoder_param_list(const EncoderParams& p) {
  std::vector<const Matrix*> out;
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    out.push_back(&p.weights[l]);
    out.push_back(&p.biases[l]);
  }
  return out;
}

std::vector<Matrix*> classifier_param_list(ClassifierParams& p) {
  return {&p.weight, &p.bias};
}

std::vector<const Matrix*> classifier_param_list(const ClassifierParams& p) {
  return {&p.weight, &p.bias};
}

namespace {

void write_matrix(std::ofstream& out, const Matrix& m) {
  out << m.rows() << ' ' << m.cols() << '\n';
  char buf[64];
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ' ';
      std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
      out << buf;
    }
    out << '\n';
  }
}

Matrix read_matrix(std::istream& in, const std::string& path) {
  std::size_t rows = 0, cols = 0;
  if (!(in >> rows >> cols)) throw ParseError(path + ": truncated matrix header");
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (!(in >> m.data()[i])) throw ParseError(path + ": truncated matrix body");
  }
  return m;
}

}  // namespace

void save_checkpoint(const std::string& path, const EncoderParams& encoder,
                     const ClassifierParams& classifier, int n_classes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint '" + path + "'");
  out << "sida-checkpoint 1\n";
  out << "classes " << n_classes << '\n';
  out << "activation " << activation_name(encoder.activation) << '\n';
  out << "encoder-layers " << encoder.weights.size() << '\n';
  for (std::size_t l = 0; l < encoder.weights.size(); ++l) {
    write_matrix(out, encoder.weights[l]);
    write_matrix(out, encoder.biases[l]);
  }
  write_matrix(out, classifier.weight);
  write_matrix(out, classifier.bias);
  if (!out) throw IoError("write failed for checkpoint '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint '" + path + "'");
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != "sida-checkpoint" || version != 1)
    throw ParseError(path + ": not a sida checkpoint");

  Checkpoint ckpt;
  std::string key;
  in >> key >> ckpt.n_classes;
  if (key != "classes") throw ParseError(path + ": malformed checkpoint");
  std::string act;
  in >> key >> act;
  if (key != "activation") throw ParseError(path + ": malformed checkpoint");
  ckpt.encoder.activation = activation_from_string(act);
  std::size_t layers = 0;
  in >> key >> layers;
  if (key != "encoder-layers" || layers == 0) throw ParseError(path + ": malformed checkpoint");
  for (std::size_t l = 0; l < layers; ++l) {
    ckpt.encoder.weights.push_back(read_matrix(in, path));
    ckpt.encoder.biases.push_back(read_matrix(in, path));
  }
  ckpt.classifier.weight = read_matrix(in, path);
  ckpt.classifier.bias = read_matrix(in, path);
  return ckpt;
}

}  // namespace sida
