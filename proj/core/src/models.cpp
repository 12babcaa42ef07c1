#include "fvi/models.hpp"

#include "fvi/rng.hpp"

#include <stdexcept>

namespace fvi::models {
namespace {

constexpr std::uint64_t kTrainDomain = 0x7472;  // "tr"
constexpr std::uint64_t kEvalDomain = 0x6576;   // "ev"

void check_prob_grads(const SampleBatch& batch, std::span<const Eigen::MatrixXd> prob_grads) {
  if (static_cast<int>(prob_grads.size()) != batch.num_samples()) {
    throw std::invalid_argument("accumulate: expected one upstream gradient per sample");
  }
  for (std::size_t m = 0; m < prob_grads.size(); ++m) {
    const Eigen::MatrixXd& p = batch.samples[m].probs();
    if (prob_grads[m].rows() != p.rows() || prob_grads[m].cols() != p.cols()) {
      throw std::invalid_argument("accumulate: upstream gradient shape mismatch at sample " +
                                  std::to_string(m));
    }
  }
}

}  // namespace

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kMap:
      return "map";
    case ModelKind::kDropout:
      return "dropout";
    case ModelKind::kEnsemble:
      return "ensemble";
  }
  return "unknown";
}

ModelKind parse_model_kind(const std::string& name) {
  if (name == "map") return ModelKind::kMap;
  if (name == "dropout") return ModelKind::kDropout;
  if (name == "ensemble") return ModelKind::kEnsemble;
  throw std::invalid_argument("unknown model kind '" + name + "' (expected map, dropout, ensemble)");
}

StochasticClassifier::StochasticClassifier(ModelKind kind, net::MlpSpec spec, double dropout_rate,
                                           std::uint64_t seed,
                                           std::vector<net::WeightVector> params)
    : kind_(kind), spec_(std::move(spec)), dropout_rate_(dropout_rate), seed_(seed),
      params_(std::move(params)) {
  spec_.validate();
  if (params_.empty()) throw std::invalid_argument("StochasticClassifier: no parameters");
  for (const auto& p : params_) {
    if (p.size() != spec_.num_params()) {
      throw std::invalid_argument("StochasticClassifier: parameter vector does not match spec");
    }
  }
  switch (kind_) {
    case ModelKind::kMap:
      if (params_.size() != 1) throw std::invalid_argument("MAP model takes one weight vector");
      break;
    case ModelKind::kDropout:
      if (params_.size() != 1) throw std::invalid_argument("dropout model takes one weight vector");
      if (!(dropout_rate_ > 0.0 && dropout_rate_ < 1.0)) {
        throw std::invalid_argument("dropout rate must lie in (0, 1)");
      }
      break;
    case ModelKind::kEnsemble:
      if (params_.size() < 2) throw std::invalid_argument("ensemble needs at least 2 members");
      break;
  }
}

StochasticClassifier StochasticClassifier::map(net::MlpSpec spec, std::uint64_t seed) {
  auto w = net::init_weights(spec, seed);
  return StochasticClassifier(ModelKind::kMap, std::move(spec), 0.0, seed, {std::move(w)});
}

StochasticClassifier StochasticClassifier::dropout(net::MlpSpec spec, double rate,
                                                   std::uint64_t seed) {
  auto w = net::init_weights(spec, seed);
  return StochasticClassifier(ModelKind::kDropout, std::move(spec), rate, seed, {std::move(w)});
}

StochasticClassifier StochasticClassifier::ensemble(net::MlpSpec spec, int members,
                                                    std::uint64_t seed) {
  if (members < 2) throw std::invalid_argument("ensemble needs at least 2 members");
  std::vector<net::WeightVector> params;
  for (int j = 0; j < members; ++j) params.push_back(net::init_weights(spec, seed + j));
  return StochasticClassifier(ModelKind::kEnsemble, std::move(spec), 0.0, seed, std::move(params));
}

int StochasticClassifier::resolve_samples(int requested) const {
  if (requested < 0) throw std::invalid_argument("sample count must be non-negative");
  switch (kind_) {
    case ModelKind::kMap:
      return 1;
    case ModelKind::kEnsemble:
      if (requested != 0 && requested != members()) {
        throw std::invalid_argument("ensemble of " + std::to_string(members()) +
                                    " members cannot produce " + std::to_string(requested) +
                                    " samples");
      }
      return members();
    case ModelKind::kDropout:
      return requested == 0 ? kDefaultDropoutEvalSamples : requested;
  }
  return 1;
}

net::DropoutMasks StochasticClassifier::dropout_masks(std::span<const std::uint64_t> ids, int m,
                                                      std::uint64_t nonce) const {
  const double keep = 1.0 - dropout_rate_;
  const double scale = 1.0 / keep;
  net::DropoutMasks masks;
  for (int l = 0; l < spec_.num_hidden(); ++l) {
    const int width = spec_.widths[l + 1];
    Eigen::MatrixXd mask(width, static_cast<Eigen::Index>(ids.size()));
    for (std::size_t b = 0; b < ids.size(); ++b) {
      rng::CounterStream stream(seed_, {nonce, ids[b], static_cast<std::uint64_t>(m),
                                        static_cast<std::uint64_t>(l)});
      for (int j = 0; j < width; ++j) {
        mask(j, static_cast<Eigen::Index>(b)) = stream.uniform() < keep ? scale : 0.0;
      }
    }
    masks.push_back(std::move(mask));
  }
  return masks;
}

SampleBatch sample_predictions(const StochasticClassifier& model, const Eigen::MatrixXd& inputs,
                               std::span<const std::uint64_t> ids, int M, bool train_mode,
                               std::uint64_t nonce) {
  if (static_cast<Eigen::Index>(ids.size()) != inputs.cols()) {
    throw std::invalid_argument("sample_predictions: need one id per input column");
  }
  const int samples = model.resolve_samples(M);
  SampleBatch batch;
  batch.samples.reserve(samples);
  switch (model.kind()) {
    case ModelKind::kMap:
      batch.samples.push_back({0, net::forward(model.spec(), model.params()[0], inputs)});
      break;
    case ModelKind::kEnsemble:
      for (int j = 0; j < samples; ++j) {
        batch.samples.push_back({j, net::forward(model.spec(), model.params()[j], inputs)});
      }
      break;
    case ModelKind::kDropout: {
      const std::uint64_t draw = rng::derive(train_mode ? kTrainDomain : kEvalDomain, {nonce});
      for (int m = 0; m < samples; ++m) {
        const net::DropoutMasks masks = model.dropout_masks(ids, m, draw);
        batch.samples.push_back({0, net::forward(model.spec(), model.params()[0], inputs, &masks)});
      }
      break;
    }
  }
  return batch;
}

std::vector<net::GradVector> accumulate_param_grads(const StochasticClassifier& model,
                                                    const SampleBatch& batch,
                                                    std::span<const Eigen::MatrixXd> prob_grads) {
  check_prob_grads(batch, prob_grads);
  std::vector<net::GradVector> grads(model.params().size(),
                                     net::GradVector::Zero(model.spec().num_params()));
  for (int m = 0; m < batch.num_samples(); ++m) {
    const Sample& s = batch.samples[m];
    grads[s.member] +=
        net::backward(model.spec(), model.params()[s.member], s.cache, prob_grads[m], false).params;
  }
  return grads;
}

Eigen::MatrixXd accumulate_input_grads(const StochasticClassifier& model, const SampleBatch& batch,
                                       std::span<const Eigen::MatrixXd> prob_grads) {
  check_prob_grads(batch, prob_grads);
  Eigen::MatrixXd total;
  for (int m = 0; m < batch.num_samples(); ++m) {
    const Sample& s = batch.samples[m];
    Eigen::MatrixXd g =
        net::backward(model.spec(), model.params()[s.member], s.cache, prob_grads[m], true).input;
    if (m == 0) {
      total = std::move(g);
    } else {
      total += g;
    }
  }
  return total;
}

}  // namespace fvi::models
