#pragma once

// Weight-distribution parameterizations q_theta(w) viewed as implicit
// stochastic processes: each yields M simplex predictions per input.
//
//   MAP       delta(w - w_theta)                 one deterministic forward
//   Dropout   w_theta * Bernoulli masks          M mask draws
//   Ensemble  (1/M) sum_m delta(w - w_theta^m)   one forward per member
//
// Dropout masks come from counter-based streams keyed by
// (seed, draw nonce, input id, sample index, layer), so the masks an input
// sees never depend on which other inputs share its batch.

#include "fvi/net.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fvi::models {

enum class ModelKind { kMap, kDropout, kEnsemble };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& name);

inline constexpr int kDefaultDropoutEvalSamples = 10;

class StochasticClassifier {
 public:
  static StochasticClassifier map(net::MlpSpec spec, std::uint64_t seed);
  static StochasticClassifier dropout(net::MlpSpec spec, double rate, std::uint64_t seed);
  /// Member j is initialized from seed + j.
  static StochasticClassifier ensemble(net::MlpSpec spec, int members, std::uint64_t seed);

  /// Rebuilds a classifier from stored parameters (checkpoint loading).
  StochasticClassifier(ModelKind kind, net::MlpSpec spec, double dropout_rate, std::uint64_t seed,
                       std::vector<net::WeightVector> params);

  ModelKind kind() const { return kind_; }
  const net::MlpSpec& spec() const { return spec_; }
  double dropout_rate() const { return dropout_rate_; }
  std::uint64_t seed() const { return seed_; }
  int members() const { return static_cast<int>(params_.size()); }

  const std::vector<net::WeightVector>& params() const { return params_; }
  std::vector<net::WeightVector>& params() { return params_; }

  /// Number of samples actually drawn for a request of `requested` (0 = default):
  /// MAP -> 1; Ensemble -> members (any other nonzero request throws);
  /// Dropout -> requested, or 10 when 0.
  int resolve_samples(int requested) const;

  /// Masks for sample `m` of a batch whose columns carry the given input ids.
  net::DropoutMasks dropout_masks(std::span<const std::uint64_t> ids, int m,
                                  std::uint64_t nonce) const;

 private:
  StochasticClassifier() = default;

  ModelKind kind_ = ModelKind::kMap;
  net::MlpSpec spec_;
  double dropout_rate_ = 0.0;
  std::uint64_t seed_ = 0;
  std::vector<net::WeightVector> params_;
};

struct Sample {
  int member = 0;  ///< parameter vector that produced this sample
  net::ForwardCache cache;
  const Eigen::MatrixXd& probs() const { return cache.probs; }
};

/// M samples over a batch of B inputs; sample m holds a (K x B) probability matrix.
struct SampleBatch {
  std::vector<Sample> samples;
  Eigen::Index batch_size() const { return samples.empty() ? 0 : samples.front().probs().cols(); }
  int num_samples() const { return static_cast<int>(samples.size()); }
};

/// Draws M predictions per input column of `inputs` (D x B). `ids` gives each
/// column a stable identity for the dropout streams; `nonce` selects the draw
/// (trainers pass the step counter). Evaluation draws are domain-separated
/// from training draws through `train_mode`.
SampleBatch sample_predictions(const StochasticClassifier& model, const Eigen::MatrixXd& inputs,
                               std::span<const std::uint64_t> ids, int M, bool train_mode,
                               std::uint64_t nonce = 0);

/// Per-parameter-vector gradients from per-sample upstream gradients on the
/// probabilities (one K x B matrix per sample). MAP and Dropout return one
/// vector summed over samples; Ensemble returns one vector per member.
std::vector<net::GradVector> accumulate_param_grads(const StochasticClassifier& model,
                                                    const SampleBatch& batch,
                                                    std::span<const Eigen::MatrixXd> prob_grads);

/// Sum over samples of the gradient with respect to the inputs (D x B).
Eigen::MatrixXd accumulate_input_grads(const StochasticClassifier& model, const SampleBatch& batch,
                                       std::span<const Eigen::MatrixXd> prob_grads);

}  // namespace fvi::models
