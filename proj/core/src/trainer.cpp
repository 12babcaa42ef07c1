#include "fvi/trainer.hpp"

#include "fvi/csv.hpp"
#include "fvi/rng.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace fvi::trainer {
namespace {

constexpr std::uint64_t kShuffleDomain = 0x5348554646;  // "SHUFF"
constexpr std::uint64_t kMeasureDomain = 0x4d45415355;  // "MEASU"

int argmax(const Eigen::VectorXd& p) {
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < p.size(); ++k) {
    if (p[k] > p[best]) best = k;
  }
  return static_cast<int>(best);
}

objective::MeasurementBatch draw_measurement(const MeasurementSet& set, Eigen::Index count,
                                             std::uint64_t seed, std::uint64_t step) {
  const Eigen::Index L = set.size();
  const Eigen::Index take = (count <= 0 || count >= L) ? L : count;
  std::vector<Eigen::Index> order(static_cast<std::size_t>(L));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  if (take < L) {
    rng::Engine engine(rng::derive(seed, {kMeasureDomain, step}));
    for (Eigen::Index i = 0; i < take; ++i) {
      const auto j = i + static_cast<Eigen::Index>(rng::below(engine, static_cast<std::uint64_t>(L - i)));
      std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }
  }
  objective::MeasurementBatch batch;
  batch.points.resize(set.dim(), take);
  for (Eigen::Index i = 0; i < take; ++i) {
    const Eigen::Index idx = order[static_cast<std::size_t>(i)];
    batch.points.col(i) = set.points.col(idx);
    batch.ids.push_back(kMeasurementIdOffset + static_cast<std::uint64_t>(idx));
    batch.keys.push_back(set.key(idx));
  }
  return batch;
}

}  // namespace

std::string to_string(OptimizerKind kind) { return kind == OptimizerKind::kSgd ? "sgd" : "adam"; }

std::string to_string(ObjectiveKind kind) {
  return kind == ObjectiveKind::kWeightSpaceMl ? "ml" : "felbo";
}

OptimizerKind parse_optimizer(const std::string& name) {
  if (name == "sgd") return OptimizerKind::kSgd;
  if (name == "adam") return OptimizerKind::kAdam;
  throw std::invalid_argument("unknown optimizer '" + name + "' (expected sgd, adam)");
}

ObjectiveKind parse_objective(const std::string& name) {
  if (name == "ml") return ObjectiveKind::kWeightSpaceMl;
  if (name == "felbo") return ObjectiveKind::kFelbo;
  throw std::invalid_argument("unknown objective '" + name + "' (expected ml, felbo)");
}

void adam_step(net::WeightVector& params, const net::GradVector& grads, AdamState& state,
               double lr, const OptimizerConfig& hyper) {
  if (grads.size() != params.size()) throw std::invalid_argument("adam_step: shape mismatch");
  if (state.m.size() == 0) {
    state.m = Eigen::VectorXd::Zero(params.size());
    state.v = Eigen::VectorXd::Zero(params.size());
  }
  ++state.step;
  state.m = hyper.beta1 * state.m + (1.0 - hyper.beta1) * grads;
  state.v = hyper.beta2 * state.v + (1.0 - hyper.beta2) * grads.cwiseProduct(grads);
  const double c1 = 1.0 - std::pow(hyper.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(hyper.beta2, static_cast<double>(state.step));
  params.array() -= lr * (state.m.array() / c1) / ((state.v.array() / c2).sqrt() + hyper.eps);
}

void sgd_momentum_step(net::WeightVector& params, const net::GradVector& grads, SgdState& state,
                       double lr, double momentum) {
  if (grads.size() != params.size()) throw std::invalid_argument("sgd_momentum_step: shape mismatch");
  if (state.velocity.size() == 0) {
    state.velocity = grads;
  } else {
    state.velocity = momentum * state.velocity + grads;
  }
  params -= lr * state.velocity;
}

void TrainConfig::validate() const {
  if (!(lr > 0.0) || !std::isfinite(lr)) throw std::invalid_argument("TrainConfig: lr must be > 0");
  if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
  if (weight_decay < 0.0) throw std::invalid_argument("TrainConfig: weight_decay must be >= 0");
  for (const ScheduleEntry& e : lr_schedule) {
    if (e.epoch < 1 || !(e.multiplier > 0.0)) {
      throw std::invalid_argument("TrainConfig: schedule entries need epoch >= 1, multiplier > 0");
    }
  }
  felbo.validate();
}

double TrainConfig::lr_at(int epoch) const {
  double multiplier = 1.0;
  int latest = 0;
  for (const ScheduleEntry& e : lr_schedule) {
    if (e.epoch <= epoch && e.epoch >= latest) {
      latest = e.epoch;
      multiplier = e.multiplier;
    }
  }
  return lr * multiplier;
}

void RunRecord::write_csv(std::ostream& out) const {
  csv::Writer writer(out);
  writer.header({"epoch", "objective", "fkl", "train_acc"});
  for (const EpochRecord& r : epochs) {
    writer.field(r.epoch).field(r.objective).field(r.fkl).field(r.train_acc);
    writer.end_row();
  }
}

void RunRecord::save_csv(const std::string& path) const {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot write " + path);
  write_csv(file);
}

std::vector<Eigen::Index> epoch_permutation(Eigen::Index n, std::uint64_t seed, int epoch) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  rng::Engine engine(rng::derive(seed, {kShuffleDomain, static_cast<std::uint64_t>(epoch)}));
  for (Eigen::Index i = n - 1; i > 0; --i) {
    const auto j = static_cast<Eigen::Index>(rng::below(engine, static_cast<std::uint64_t>(i + 1)));
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
  }
  return order;
}

RunRecord train(models::StochasticClassifier& model, const data::Dataset& dataset,
                const TrainConfig& config, const FelboInputs& felbo, const EpochCallback& on_epoch) {
  config.validate();
  dataset.validate();
  if (dataset.size() == 0) throw std::invalid_argument("train: empty dataset");
  if (dataset.dim() != model.spec().input_dim() || dataset.num_classes != model.spec().num_classes()) {
    throw std::invalid_argument("train: dataset shape does not match the network");
  }
  const bool use_felbo = config.objective == ObjectiveKind::kFelbo;
  const objective::MeasurementPolicy policy = config.felbo.policy;
  if (use_felbo) {
    if (felbo.prior == nullptr) throw std::invalid_argument("train: fELBO objective needs a prior");
    if (felbo.prior->dim() != dataset.num_classes) {
      throw std::invalid_argument("train: prior dimension does not match K");
    }
    if (policy != objective::MeasurementPolicy::kTrainingBatch) {
      if (felbo.measurement == nullptr) {
        throw std::invalid_argument("train: measurement policy '" + objective::to_string(policy) +
                                    "' needs a measurement set");
      }
      felbo.measurement->validate();
      if (felbo.measurement->dim() != dataset.dim()) {
        throw std::invalid_argument("train: measurement set dimension does not match inputs");
      }
    }
  }

  const Eigen::Index N = dataset.size();
  const Eigen::Index B = std::min<Eigen::Index>(config.batch_size, N);
  const int members = model.members();
  std::vector<AdamState> adam(static_cast<std::size_t>(members));
  std::vector<SgdState> sgd(static_cast<std::size_t>(members));

  RunRecord record;
  std::uint64_t step_counter = 0;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const double lr = config.lr_at(epoch);
    const std::vector<Eigen::Index> order = epoch_permutation(N, config.seed, epoch);
    double objective_sum = 0.0;
    double fkl_sum = 0.0;
    Eigen::Index correct = 0;

    int batch_index = 0;
    for (Eigen::Index start = 0; start < N; start += B, ++batch_index) {
      const Eigen::Index len = std::min(B, N - start);
      const std::span<const Eigen::Index> cols(order.data() + start, static_cast<std::size_t>(len));
      const Eigen::MatrixXd inputs = dataset.gather(cols);
      const Eigen::MatrixXd labels = dataset.one_hot(cols);
      std::vector<std::uint64_t> ids(cols.begin(), cols.end());
      const objective::TrainBatch batch{inputs, labels, ids};
      const std::uint64_t nonce = step_counter++;

      objective::StepResult step;
      if (use_felbo) {
        objective::MeasurementBatch draw;
        const objective::MeasurementBatch* measurement = nullptr;
        if (policy == objective::MeasurementPolicy::kFileSet) {
          draw = draw_measurement(*felbo.measurement, config.felbo.measurement_draw, config.seed, nonce);
          measurement = &draw;
        } else if (policy == objective::MeasurementPolicy::kMixture) {
          draw = draw_measurement(*felbo.measurement, len, config.seed, nonce);
          measurement = &draw;
        }
        step = objective::felbo_step(model, batch, measurement, *felbo.prior, config.felbo, N, nonce);
      } else {
        step = objective::likelihood_step(model, batch, config.felbo, nonce);
      }

      if (!std::isfinite(step.objective)) {
        throw std::runtime_error("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                                 std::to_string(batch_index + 1));
      }
      objective_sum += step.objective * static_cast<double>(len);
      fkl_sum += step.fkl_unscaled * static_cast<double>(len);
      for (Eigen::Index n = 0; n < len; ++n) {
        if (argmax(step.mean_probs.col(n)) == dataset.labels[static_cast<std::size_t>(cols[n])]) ++correct;
      }

      for (int j = 0; j < members; ++j) {
        net::WeightVector& w = model.params()[static_cast<std::size_t>(j)];
        // Objectives are maximized; the optimizers descend on the negation.
        net::GradVector g = -step.grads[static_cast<std::size_t>(j)];
        if (!use_felbo && config.weight_decay > 0.0) g += config.weight_decay * w;
        if (!g.allFinite()) {
          throw std::runtime_error("non-finite gradient at epoch " + std::to_string(epoch) +
                                   ", batch " + std::to_string(batch_index + 1));
        }
        if (config.optimizer.kind == OptimizerKind::kAdam) {
          adam_step(w, g, adam[static_cast<std::size_t>(j)], lr, config.optimizer);
        } else {
          sgd_momentum_step(w, g, sgd[static_cast<std::size_t>(j)], lr, config.optimizer.momentum);
        }
      }
    }

    EpochRecord r;
    r.epoch = epoch;
    r.objective = objective_sum / static_cast<double>(N);
    r.fkl = fkl_sum / static_cast<double>(N);
    r.train_acc = static_cast<double>(correct) / static_cast<double>(N);
    record.epochs.push_back(r);
    if (on_epoch) on_epoch(r);
  }
  return record;
}

}  // namespace fvi::trainer
