#include "fvi/net.hpp"

#include "fvi/rng.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fvi::net {

void MlpSpec::validate() const {
  if (widths.size() < 3) {
    throw std::invalid_argument("MlpSpec: need input, at least one hidden layer, and output widths");
  }
  for (int w : widths) {
    if (w < 1) throw std::invalid_argument("MlpSpec: widths must be positive");
  }
  if (widths.back() < 2) throw std::invalid_argument("MlpSpec: need K >= 2 output classes");
}

Eigen::Index MlpSpec::num_params() const {
  Eigen::Index n = 0;
  for (int l = 0; l < num_layers(); ++l) {
    n += static_cast<Eigen::Index>(widths[l + 1]) * (widths[l] + (bias ? 1 : 0));
  }
  return n;
}

std::vector<LayerOffsets> layout(const MlpSpec& spec) {
  std::vector<LayerOffsets> out;
  Eigen::Index offset = 0;
  for (int l = 0; l < spec.num_layers(); ++l) {
    LayerOffsets lo;
    lo.rows = spec.widths[l + 1];
    lo.cols = spec.widths[l];
    lo.weights = offset;
    offset += static_cast<Eigen::Index>(lo.rows) * lo.cols;
    lo.bias = offset;
    if (spec.bias) offset += lo.rows;
    out.push_back(lo);
  }
  return out;
}

WeightVector init_weights(const MlpSpec& spec, std::uint64_t seed) {
  spec.validate();
  WeightVector w = WeightVector::Zero(spec.num_params());
  rng::Engine engine(seed);
  for (const LayerOffsets& lo : layout(spec)) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(lo.cols));
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(lo.rows) * lo.cols; ++i) {
      w[lo.weights + i] = rng::uniform(engine, -bound, bound);
    }
  }
  return w;
}

Eigen::MatrixXd softmax(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd out = logits.rowwise() - logits.colwise().maxCoeff();
  out = out.array().exp();
  out.array().rowwise() /= out.colwise().sum().array();
  return out;
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  Eigen::VectorXd out = (logits.array() - logits.maxCoeff()).exp();
  return out / out.sum();
}

ForwardCache forward(const MlpSpec& spec, const WeightVector& w, const Eigen::MatrixXd& x,
                     const DropoutMasks* masks) {
  if (w.size() != spec.num_params()) {
    throw std::invalid_argument("forward: weight vector has " + std::to_string(w.size()) +
                                " entries, spec needs " + std::to_string(spec.num_params()));
  }
  if (x.rows() != spec.input_dim()) {
    throw std::invalid_argument("forward: input width " + std::to_string(x.rows()) +
                                " does not match spec input width " +
                                std::to_string(spec.input_dim()));
  }
  if (masks) {
    if (static_cast<int>(masks->size()) != spec.num_hidden()) {
      throw std::invalid_argument("forward: need one dropout mask per hidden layer");
    }
    for (int l = 0; l < spec.num_hidden(); ++l) {
      const Eigen::MatrixXd& m = (*masks)[l];
      if (m.rows() != spec.widths[l + 1] || m.cols() != x.cols()) {
        throw std::invalid_argument("forward: dropout mask shape mismatch at hidden layer " +
                                    std::to_string(l));
      }
    }
  }

  ForwardCache cache;
  cache.widths = spec.widths;
  if (masks) cache.masks = *masks;
  const auto offsets = layout(spec);
  Eigen::MatrixXd activation = x;
  for (int l = 0; l < spec.num_layers(); ++l) {
    const LayerOffsets& lo = offsets[l];
    Eigen::Map<const Eigen::MatrixXd> weights(w.data() + lo.weights, lo.rows, lo.cols);
    Eigen::MatrixXd z = weights * activation;
    if (spec.bias) {
      Eigen::Map<const Eigen::VectorXd> b(w.data() + lo.bias, lo.rows);
      z.colwise() += b;
    }
    cache.inputs.push_back(std::move(activation));
    if (l + 1 == spec.num_layers()) {
      cache.logits = std::move(z);
      break;
    }
    activation = z.cwiseMax(0.0);
    if (masks) activation.array() *= (*masks)[l].array();
    cache.preacts.push_back(std::move(z));
  }
  cache.probs = softmax(cache.logits);
  return cache;
}

Gradients backward(const MlpSpec& spec, const WeightVector& w, const ForwardCache& cache,
                   const Eigen::MatrixXd& upstream_on_probs, bool with_input_grad) {
  if (cache.widths != spec.widths || static_cast<int>(cache.inputs.size()) != spec.num_layers()) {
    throw std::invalid_argument("backward: cache was produced by a different network spec");
  }
  if (w.size() != spec.num_params()) {
    throw std::invalid_argument("backward: weight vector does not match spec");
  }
  if (upstream_on_probs.rows() != cache.probs.rows() ||
      upstream_on_probs.cols() != cache.probs.cols()) {
    throw std::invalid_argument("backward: upstream gradient shape does not match cached outputs");
  }

  const Eigen::MatrixXd& p = cache.probs;
  // Softmax Jacobian-vector product: p * (g - <p, g>).
  const Eigen::RowVectorXd inner = (p.array() * upstream_on_probs.array()).colwise().sum();
  Eigen::MatrixXd delta = p.array() * (upstream_on_probs.rowwise() - inner).array();

  Gradients grads;
  grads.params = GradVector::Zero(spec.num_params());
  const auto offsets = layout(spec);
  for (int l = spec.num_layers() - 1; l >= 0; --l) {
    const LayerOffsets& lo = offsets[l];
    Eigen::Map<Eigen::MatrixXd> gw(grads.params.data() + lo.weights, lo.rows, lo.cols);
    gw.noalias() = delta * cache.inputs[l].transpose();
    if (spec.bias) {
      Eigen::Map<Eigen::VectorXd> gb(grads.params.data() + lo.bias, lo.rows);
      gb = delta.rowwise().sum();
    }
    Eigen::Map<const Eigen::MatrixXd> weights(w.data() + lo.weights, lo.rows, lo.cols);
    if (l == 0) {
      if (with_input_grad) grads.input = weights.transpose() * delta;
      break;
    }
    Eigen::MatrixXd upstream = weights.transpose() * delta;
    const Eigen::MatrixXd& z = cache.preacts[l - 1];
    upstream.array() *= (z.array() > 0.0).cast<double>();
    if (cache.masks) upstream.array() *= (*cache.masks)[l - 1].array();
    delta = std::move(upstream);
  }
  return grads;
}

}  // namespace fvi::net
