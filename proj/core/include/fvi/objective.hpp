#pragma once

// The function-space ELBO
//
//   felbo = E_q[log p(y | f)] - lambda * KL[q(f) || p(f)]
//
// with a Monte-Carlo categorical likelihood over M predictions per input and a
// sample-based KL on a measurement set: at every measurement point a Dirichlet
// q is fitted to the M predictions, and the KL is estimated as
// (1/(SM)) sum_{s,m} [log q(f_s^m) - log p(f_s^m)] over the S points of the
// step. The fitted concentrations are treated as constants when
// differentiating. The likelihood term is a mean over the training batch;
// with batch scaling on, the fKL is further divided by the batch size B.
//
// All gradients returned here are gradients of the felbo (ascent direction).

#include "fvi/dirichlet.hpp"
#include "fvi/measurement.hpp"
#include "fvi/models.hpp"
#include "fvi/priors.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fvi::objective {

enum class MeasurementPolicy {
  kTrainingBatch,  ///< fKL evaluated on the training mini-batch (shared forward pass)
  kFileSet,        ///< fKL evaluated on points drawn from an external set
  kMixture,        ///< training mini-batch plus an equally sized draw from the external set
};

std::string to_string(MeasurementPolicy policy);
MeasurementPolicy parse_measurement_policy(const std::string& name);

struct FelboConfig {
  int samples = 1;                  ///< M per input during training (0 = model default)
  double gamma = 1e-4;              ///< label smoothing applied before every log
  double z_min = 0.0;               ///< 0 selects K
  double z_max = 0.0;               ///< 0 selects N, the training-set size
  double lambda = 1.0;              ///< fKL scale
  MeasurementPolicy policy = MeasurementPolicy::kTrainingBatch;
  int measurement_draw = 0;         ///< kFileSet: points per step (0 = whole set)
  bool batch_scale = true;          ///< divide the fKL by the training batch size
  double tol = 1e-5;
  int max_iter = 1000;

  /// Throws std::invalid_argument on M < 0, gamma outside [0, 1), lambda < 0,
  /// or explicit clamps with z_min > z_max.
  void validate() const;
  dirichlet::FitOptions fit_options(int num_classes, Eigen::Index num_train) const;
};

/// Measurement points drawn for one step, with stable ids (dropout streams)
/// and keys (table priors).
struct MeasurementBatch {
  Eigen::MatrixXd points;
  std::vector<std::uint64_t> ids;
  std::vector<std::string> keys;

  Eigen::Index size() const { return points.cols(); }
};

struct TermResult {
  double value = 0.0;
  /// For the fKL: value without the lambda factor (batch scaling still applied).
  double unscaled = 0.0;
  std::vector<Eigen::MatrixXd> prob_grads;
  std::vector<dirichlet::DirichletParams> alphas;
};

/// (1/(BM)) sum_{n,m} ln f~_{n,y_n}^(m).
/// `labels` is a one-hot (K x B) matrix; anything else throws.
TermResult expected_log_likelihood(const Eigen::MatrixXd& labels,
                                   const models::SampleBatch& samples, double gamma);

/// Sample-based fKL over the columns of `samples`. `keys[l]` names the prior
/// entry of column l. The sum is divided by M and by `measurement_points`
/// (0 = the column count; larger when this call covers part of a step's
/// measurement set), and by `train_batch_size` when batch scaling.
/// When `frozen_alphas` is given those concentrations are used instead of
/// refitting (finite-difference checks).
TermResult fkl_estimate(const models::SampleBatch& samples, std::span<const std::string> keys,
                        const priors::PriorSpec& prior, const FelboConfig& config,
                        Eigen::Index num_train, Eigen::Index train_batch_size,
                        const std::vector<dirichlet::DirichletParams>* frozen_alphas = nullptr,
                        Eigen::Index measurement_points = 0);

struct StepResult {
  double objective = 0.0;        ///< felbo (or expected log-likelihood for ML steps)
  double expected_ll = 0.0;
  double fkl = 0.0;              ///< lambda-scaled
  double fkl_unscaled = 0.0;     ///< without lambda
  std::vector<net::GradVector> grads;
  /// Fitted concentrations per measurement point: training batch first (when
  /// used), then the external draw.
  std::vector<dirichlet::DirichletParams> alphas;
  Eigen::MatrixXd mean_probs;    ///< predictive mean on the training batch (K x B)
};

struct TrainBatch {
  const Eigen::MatrixXd& inputs;      ///< D x B
  const Eigen::MatrixXd& labels;      ///< one-hot K x B
  std::span<const std::uint64_t> ids;
};

/// Pure weight-space likelihood step: expected log-likelihood and its gradient.
StepResult likelihood_step(const models::StochasticClassifier& model, const TrainBatch& batch,
                           const FelboConfig& config, std::uint64_t nonce);

/// One fELBO evaluation with parameter gradients. `measurement` is required for
/// kFileSet and kMixture and ignored for kTrainingBatch.
StepResult felbo_step(const models::StochasticClassifier& model, const TrainBatch& batch,
                      const MeasurementBatch* measurement, const priors::PriorSpec& prior,
                      const FelboConfig& config, Eigen::Index num_train, std::uint64_t nonce,
                      const std::vector<dirichlet::DirichletParams>* frozen_alphas = nullptr);

/// Keys for training points under a table prior: the decimal dataset index.
std::vector<std::string> keys_from_ids(std::span<const std::uint64_t> ids);

}  // namespace fvi::objective
