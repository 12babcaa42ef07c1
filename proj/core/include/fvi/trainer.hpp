#pragma once

// Mini-batch training loop for weight-space maximum likelihood and the fELBO.

#include "fvi/data.hpp"
#include "fvi/measurement.hpp"
#include "fvi/models.hpp"
#include "fvi/objective.hpp"
#include "fvi/priors.hpp"

#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

namespace fvi::trainer {

enum class OptimizerKind { kSgd, kAdam };
enum class ObjectiveKind { kWeightSpaceMl, kFelbo };

std::string to_string(OptimizerKind kind);
std::string to_string(ObjectiveKind kind);
OptimizerKind parse_optimizer(const std::string& name);
ObjectiveKind parse_objective(const std::string& name);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kAdam;
  double momentum = 0.9;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  long long step = 0;
};

struct SgdState {
  Eigen::VectorXd velocity;
};

/// Bias-corrected Adam on a loss gradient (descent).
void adam_step(net::WeightVector& params, const net::GradVector& grads, AdamState& state,
               double lr, const OptimizerConfig& hyper);

/// v <- momentum * v + g; w <- w - lr * v. The first step initializes v = g.
void sgd_momentum_step(net::WeightVector& params, const net::GradVector& grads, SgdState& state,
                       double lr, double momentum);

/// From `epoch` (1-based) onwards the learning rate is base * multiplier.
struct ScheduleEntry {
  int epoch = 1;
  double multiplier = 1.0;
};

struct TrainConfig {
  OptimizerConfig optimizer;
  double lr = 1e-3;
  std::vector<ScheduleEntry> lr_schedule;
  int epochs = 1;
  int batch_size = 1;
  std::uint64_t seed = 0;
  double weight_decay = 0.0;  ///< coupled L2, weight-space objective only
  ObjectiveKind objective = ObjectiveKind::kFelbo;
  objective::FelboConfig felbo;

  /// Throws std::invalid_argument unless lr > 0, epochs >= 1, batch_size >= 1.
  void validate() const;
  double lr_at(int epoch) const;
};

struct EpochRecord {
  int epoch = 0;
  double objective = 0.0;  ///< felbo or expected log-likelihood, batch-size weighted mean
  double fkl = 0.0;        ///< fKL without lambda, batch-size weighted mean
  double train_acc = 0.0;  ///< accuracy of the training-mode predictive seen during the epoch
};

struct RunRecord {
  std::vector<EpochRecord> epochs;
  std::string checkpoint;

  void write_csv(std::ostream& out) const;
  void save_csv(const std::string& path) const;
};

/// Optional data the fELBO needs beyond the training set.
struct FelboInputs {
  const priors::PriorSpec* prior = nullptr;
  const MeasurementSet* measurement = nullptr;  ///< kFileSet / kMixture
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Trains `model` in place. Throws std::runtime_error naming the epoch and
/// batch when the loss becomes non-finite.
RunRecord train(models::StochasticClassifier& model, const data::Dataset& dataset,
                const TrainConfig& config, const FelboInputs& felbo = {},
                const EpochCallback& on_epoch = {});

/// Fisher-Yates permutation of [0, n) for the given epoch.
std::vector<Eigen::Index> epoch_permutation(Eigen::Index n, std::uint64_t seed, int epoch);

/// Ids given to external measurement points so their dropout streams differ
/// from those of training points with the same index.
inline constexpr std::uint64_t kMeasurementIdOffset = std::uint64_t{1} << 40;

}  // namespace fvi::trainer
