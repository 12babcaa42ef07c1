#pragma once

// Feed-forward ReLU classifier f_x = softmax(phi(x; w)) with exact reverse-mode
// gradients. Inputs are processed column-wise: a batch is a (D x B) matrix.

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <vector>

namespace fvi::net {

/// Layer widths (input, hidden..., K). Biases are always present in the layout
/// when `bias` is set; ReLU on every hidden layer.
struct MlpSpec {
  std::vector<int> widths;
  bool bias = true;

  /// Throws std::invalid_argument unless there is >= 1 hidden layer, every width
  /// is positive and the output width K >= 2.
  void validate() const;

  int input_dim() const { return widths.front(); }
  int num_classes() const { return widths.back(); }
  int num_layers() const { return static_cast<int>(widths.size()) - 1; }
  int num_hidden() const { return num_layers() - 1; }
  Eigen::Index num_params() const;

  friend bool operator==(const MlpSpec&, const MlpSpec&) = default;
};

/// Flat parameter vector. Layer l occupies a column-major (out x in) weight
/// block followed by its bias vector (out).
using WeightVector = Eigen::VectorXd;
/// Gradient with the same layout as WeightVector.
using GradVector = Eigen::VectorXd;

struct LayerOffsets {
  Eigen::Index weights = 0;
  Eigen::Index bias = 0;
  int rows = 0;  // out
  int cols = 0;  // in
};

std::vector<LayerOffsets> layout(const MlpSpec& spec);

/// Uniform(+-1/sqrt(fan_in)) weights, zero biases.
WeightVector init_weights(const MlpSpec& spec, std::uint64_t seed);

/// Per-hidden-layer multiplicative masks (width_l x B), already scaled by 1/(1-p).
using DropoutMasks = std::vector<Eigen::MatrixXd>;

struct ForwardCache {
  std::vector<int> widths;                 // spec the cache was produced with
  std::vector<Eigen::MatrixXd> inputs;     // input to each layer (inputs[0] = x)
  std::vector<Eigen::MatrixXd> preacts;    // hidden pre-activations
  std::optional<DropoutMasks> masks;
  Eigen::MatrixXd logits;
  Eigen::MatrixXd probs;
};

/// Column-wise max-subtracted softmax.
Eigen::MatrixXd softmax(const Eigen::MatrixXd& logits);
Eigen::VectorXd softmax(const Eigen::VectorXd& logits);

ForwardCache forward(const MlpSpec& spec, const WeightVector& w, const Eigen::MatrixXd& x,
                     const DropoutMasks* masks = nullptr);

struct Gradients {
  GradVector params;
  Eigen::MatrixXd input;  // (D x B)
};

/// Back-propagates an upstream gradient on the softmax outputs (K x B), summing
/// parameter gradients over the batch. `Gradients::input` stays empty when
/// `with_input_grad` is false.
Gradients backward(const MlpSpec& spec, const WeightVector& w, const ForwardCache& cache,
                   const Eigen::MatrixXd& upstream_on_probs, bool with_input_grad = true);

}  // namespace fvi::net
