#pragma once

#include <string>
#include <vector>

#include "core/matrix.hpp"
#include "core/rng.hpp"

namespace sida {

enum class Activation { tanh_fn, relu, identity };

Activation activation_from_string(const std::string& name);
std::string activation_name(Activation a);

/// Affine layers with the configured activation between them; the final
/// layer is linear so features are unbounded.
struct EncoderParams {
  std::vector<Matrix> weights;  // layer l: in x out
  std::vector<Matrix> biases;   // 1 x out
  Activation activation = Activation::tanh_fn;

  std::size_t input_dim() const { return weights.front().rows(); }
  std::size_t output_dim() const { return weights.back().cols(); }
};

struct ClassifierParams {
  Matrix weight;  // d_z x n_classes
  Matrix bias;    // 1 x n_classes
};

EncoderParams make_encoder(std::size_t input_dim, const std::vector<int>& hidden,
                           std::size_t feature_dim, Activation activation,
                           SeededRng rng);
ClassifierParams make_classifier(std::size_t feature_dim, int n_classes, SeededRng rng);

struct EncodeCache {
  std::vector<Matrix> inputs;       // input to each layer
  std::vector<Matrix> pre_activations;
};

Matrix encode_forward(const EncoderParams& params, const Matrix& X,
                      EncodeCache* cache = nullptr);

struct EncoderGrads {
  std::vector<Matrix> weights;
  std::vector<Matrix> biases;
};

EncoderGrads zero_encoder_grads(const EncoderParams& params);

/// Backpropagates dL/dZ through the cached forward pass, accumulating into
/// `grads`; optionally returns dL/dX.
void encode_backward(const EncoderParams& params, const EncodeCache& cache,
                     const Matrix& dZ, EncoderGrads& grads, Matrix* dX = nullptr);

struct ClassifierOut {
  Matrix logits;
  Matrix probabilities;  // stable softmax rows
};

ClassifierOut classifier_forward(const ClassifierParams& params, const Matrix& Z);

struct LossGrad {
  double loss = 0.0;
  Matrix grad_logits;
};

/// Mean negative log-probability of the true class; gradient w.r.t. logits
/// is (p - onehot) / batch.
LossGrad classification_loss(const Matrix& probabilities, const std::vector<int>& labels);

/// (1/n_Y) sum_y sum_i W[i][y] (1 - p_i[y])^2 with the gradient taken
/// through the softmax.
LossGrad auxiliary_loss(const Matrix& probabilities, const Matrix& surrogate_weights);

struct OptimizerState {
  std::vector<Matrix> velocity;
  double momentum = 0.9;
  double weight_decay = 5e-4;
};

OptimizerState make_optimizer_state(const std::vector<const Matrix*>& params,
                                    double momentum, double weight_decay);

/// buffer <- momentum * buffer + grad + wd * param; param <- param - lr * buffer.
void sgd_step(const std::vector<Matrix*>& params, const std::vector<const Matrix*>& grads,
              OptimizerState& state, double lr);

struct LrSchedule {
  double encoder_eta0 = 0.02;
  double classifier_eta0 = 0.2;  // finetune protocol: 10x the encoder rate
  double a = 10.0;
  double b = 0.75;
};

/// eta0 / (1 + a p)^b for progress p in [0, 1].
double lr_at(double eta0, double a, double b, double progress);

inline double encoder_lr(const LrSchedule& s, double p) {
  return lr_at(s.encoder_eta0, s.a, s.b, p);
}
inline double classifier_lr(const LrSchedule& s, double p) {
  return lr_at(s.classifier_eta0, s.a, s.b, p);
}

std::vector<Matrix*> encoder_param_list(EncoderParams& p);
std::vector<const Matrix*> encoder_param_list(const EncoderParams& p);
std::vector<Matrix*> classifier_param_list(ClassifierParams& p);
std::vector<const Matrix*> classifier_param_list(const ClassifierParams& p);

void save_checkpoint(const std::string& path, const EncoderParams& encoder,
                     const ClassifierParams& classifier, int n_classes);

struct Checkpoint {
  EncoderParams encoder;
  ClassifierParams classifier;
  int n_classes = 0;
};

Checkpoint load_checkpoint(const std::string& path);

}  // namespace sida
