#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "redreg/matrix.hpp"

namespace redreg {

inline constexpr int kModalities = 2;

enum class Activation { identity, relu };
enum class Fusion { concat, sum };

struct Layer {
  Matrix weight;             // out x in
  std::vector<double> bias;  // out
};

// Per-modality MLP. Hidden layers are always ReLU; the representation layer
// activation is configurable.
struct EncoderParams {
  std::vector<Layer> layers;
  Activation output_activation = Activation::identity;

  std::size_t in_dim() const;
  std::size_t out_dim() const;
  std::size_t param_count() const;

  // Flattening order, fixed everywhere: layers in forward order; within a
  // layer the weight row-major, then the bias.
  std::vector<double> flatten() const;
  void unflatten(std::span<const double> flat);
};

struct HeadParams {
  Matrix weight;                            // classes x fused_dim
  std::vector<double> bias;                 // classes
  std::array<std::size_t, 2> block_dims{};  // concat: column split; sum: both equal
};

struct ModelState {
  std::array<EncoderParams, 2> encoders;  // [a, v]
  HeadParams head;
  Fusion fusion = Fusion::concat;

  // Optimizer state lives with the parameters so a checkpoint restores the
  // whole trajectory. Encoder buffers use the flattened layout above.
  std::array<std::vector<double>, 2> encoder_velocity;
  Matrix head_weight_velocity;
  std::vector<double> head_bias_velocity;
  std::array<std::vector<double>, 2> anchors;  // flattened encoder snapshots
};

struct ModelArch {
  std::size_t input_a = 16;
  std::size_t input_v = 16;
  std::size_t hidden = 32;
  std::size_t repr_a = 16;
  std::size_t repr_v = 16;
  int classes = 4;
  Fusion fusion = Fusion::concat;
  Activation output_activation = Activation::identity;
};

// Two-layer MLP per modality plus a linear head. Weights are uniform(-a, a)
// with a = sqrt(6 / (fan_in + fan_out)); biases start at zero; velocity at
// zero; anchors at the initial encoder parameters.
ModelState build_model(const ModelArch& arch, std::uint64_t seed);

Matrix encode(const EncoderParams& enc, const Matrix& x);

// concat: [za zv]; sum: za + zv (dims must match).
Matrix fuse(const Matrix& za, const Matrix& zv, Fusion kind);

// Mean negative log-likelihood of the true classes under row-wise softmax.
// Shift-invariant per row by construction (log-sum-exp form).
double cross_entropy(const Matrix& logits, const std::vector<int>& labels);

struct ForwardResult {
  Matrix za, zv, fused, logits, probs;
  double loss = 0.0;  // joint cross-entropy
};

ForwardResult forward(const ModelState& model, const Matrix& xa, const Matrix& xv,
                      const std::vector<int>& labels);

// Per-branch logits from that branch's slice of the head (shared weight under
// sum fusion) with an even bias split across the two modalities.
Matrix branch_logits(const ModelState& model, const Matrix& zm, int modality);

struct GradientBundle {
  std::array<std::vector<double>, 2> encoder;  // flattened, mean-reduced
  Matrix head_weight;
  std::vector<double> head_bias;
  double loss = 0.0;  // total batch loss (joint + lambda_uni * branch terms)
  std::array<double, 2> encoder_norm{};
};

// Joint cross-entropy plus lambda_uni-weighted branch cross-entropies, the
// quantity backward() and fd_gradient() both differentiate.
double total_loss(const ModelState& model, const Matrix& xa, const Matrix& xv,
                  const std::vector<int>& labels, double lambda_uni = 0.0);

GradientBundle backward(const ModelState& model, const Matrix& xa, const Matrix& xv,
                        const std::vector<int>& labels, double lambda_uni = 0.0);

// Central differences over every parameter; the independent check for
// backward(). O(param_count) forward passes, test-scale models only.
GradientBundle fd_gradient(const ModelState& model, const Matrix& xa, const Matrix& xv,
                           const std::vector<int>& labels, double h,
                           double lambda_uni = 0.0);

// Versioned JSON dump of parameters, optimizer state and anchors; loading
// restores every array bit-exactly.
void save_checkpoint(const ModelState& model, const std::string& path);
ModelState load_checkpoint(const std::string& path);

}  // namespace redreg
