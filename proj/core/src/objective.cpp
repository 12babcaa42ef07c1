#include "fvi/objective.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

namespace fvi {

void MeasurementSet::validate() const {
  if (points.cols() < 1) throw std::invalid_argument("measurement set is empty");
  if (!points.allFinite()) throw std::invalid_argument("measurement set has non-finite coordinates");
  if (!keys.empty() && static_cast<Eigen::Index>(keys.size()) != points.cols()) {
    throw std::invalid_argument("measurement set keys do not match the number of points");
  }
}

}  // namespace fvi

namespace fvi::objective {
namespace {

// log_pdf with a precomputed normalizer; same boundary convention.
double log_density(const Eigen::VectorXd& alpha, double normalizer, const Eigen::VectorXd& f) {
  double value = normalizer;
  for (Eigen::Index k = 0; k < f.size(); ++k) {
    if (alpha[k] == 1.0) continue;
    if (!(f[k] > 0.0)) return dirichlet::kBoundaryLogPdf;
    value += (alpha[k] - 1.0) * std::log(f[k]);
  }
  return value;
}

void check_one_hot(const Eigen::MatrixXd& labels) {
  for (Eigen::Index n = 0; n < labels.cols(); ++n) {
    int ones = 0;
    for (Eigen::Index k = 0; k < labels.rows(); ++k) {
      const double v = labels(k, n);
      if (v == 1.0) {
        ++ones;
      } else if (v != 0.0) {
        ones = -1;
        break;
      }
    }
    if (ones != 1) {
      throw std::invalid_argument("label column " + std::to_string(n) + " is not one-hot");
    }
  }
}

void add_into(std::vector<net::GradVector>& total, const std::vector<net::GradVector>& part) {
  for (std::size_t i = 0; i < total.size(); ++i) total[i] += part[i];
}

}  // namespace

std::string to_string(MeasurementPolicy policy) {
  switch (policy) {
    case MeasurementPolicy::kTrainingBatch:
      return "train_batch";
    case MeasurementPolicy::kFileSet:
      return "file";
    case MeasurementPolicy::kMixture:
      return "mixture";
  }
  return "unknown";
}

MeasurementPolicy parse_measurement_policy(const std::string& name) {
  if (name == "train_batch") return MeasurementPolicy::kTrainingBatch;
  if (name == "file") return MeasurementPolicy::kFileSet;
  if (name == "mixture") return MeasurementPolicy::kMixture;
  throw std::invalid_argument("unknown measurement policy '" + name +
                              "' (expected train_batch, file, mixture)");
}

void FelboConfig::validate() const {
  if (samples < 0) throw std::invalid_argument("FelboConfig: samples must be >= 0");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("FelboConfig: gamma must lie in [0, 1)");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("FelboConfig: lambda must be finite and non-negative");
  }
  if (z_min < 0.0 || z_max < 0.0) throw std::invalid_argument("FelboConfig: negative precision clamp");
  if (z_min > 0.0 && z_max > 0.0 && z_min > z_max) {
    throw std::invalid_argument("FelboConfig: z_min exceeds z_max");
  }
  if (measurement_draw < 0) throw std::invalid_argument("FelboConfig: measurement_draw must be >= 0");
}

dirichlet::FitOptions FelboConfig::fit_options(int num_classes, Eigen::Index num_train) const {
  dirichlet::FitOptions options;
  options.gamma = gamma;
  options.z_min = z_min > 0.0 ? z_min : static_cast<double>(num_classes);
  options.z_max = z_max > 0.0 ? z_max : static_cast<double>(num_train);
  options.z_max = std::max(options.z_max, options.z_min);
  options.tol = tol;
  options.max_iter = max_iter;
  return options;
}

TermResult expected_log_likelihood(const Eigen::MatrixXd& labels,
                                   const models::SampleBatch& samples, double gamma) {
  if (samples.num_samples() < 1) throw std::invalid_argument("expected_log_likelihood: no samples");
  const Eigen::MatrixXd& first = samples.samples.front().probs();
  if (labels.rows() != first.rows() || labels.cols() != first.cols()) {
    throw std::invalid_argument("expected_log_likelihood: labels do not match prediction shape");
  }
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("expected_log_likelihood: bad gamma");
  check_one_hot(labels);

  const Eigen::Index K = labels.rows();
  const Eigen::Index B = labels.cols();
  const int M = samples.num_samples();
  const double coeff = 1.0 / (static_cast<double>(B) * M);
  const double uniform = gamma / static_cast<double>(K);

  std::vector<Eigen::Index> label_index(static_cast<std::size_t>(B));
  for (Eigen::Index n = 0; n < B; ++n) labels.col(n).maxCoeff(&label_index[static_cast<std::size_t>(n)]);

  TermResult result;
  double total = 0.0;
  for (int m = 0; m < M; ++m) {
    const Eigen::MatrixXd& probs = samples.samples[m].probs();
    Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(K, B);
    for (Eigen::Index n = 0; n < B; ++n) {
      const Eigen::Index y = label_index[static_cast<std::size_t>(n)];
      const double smoothed = (1.0 - gamma) * probs(y, n) + uniform;
      total += std::log(smoothed);
      grad(y, n) = coeff * (1.0 - gamma) / smoothed;
    }
    result.prob_grads.push_back(std::move(grad));
  }
  result.value = total * coeff;
  result.unscaled = result.value;
  return result;
}

TermResult fkl_estimate(const models::SampleBatch& samples, std::span<const std::string> keys,
                        const priors::PriorSpec& prior, const FelboConfig& config,
                        Eigen::Index num_train, Eigen::Index train_batch_size,
                        const std::vector<dirichlet::DirichletParams>* frozen_alphas,
                        Eigen::Index measurement_points) {
  const int M = samples.num_samples();
  if (M < 1) throw std::invalid_argument("fkl_estimate: no samples");
  const Eigen::Index K = samples.samples.front().probs().rows();
  const Eigen::Index L = samples.batch_size();
  if (K != prior.dim()) throw std::invalid_argument("fkl_estimate: prior dimension does not match K");
  if (static_cast<Eigen::Index>(keys.size()) != L) {
    throw std::invalid_argument("fkl_estimate: need one key per measurement point");
  }
  if (frozen_alphas && static_cast<Eigen::Index>(frozen_alphas->size()) != L) {
    throw std::invalid_argument("fkl_estimate: frozen concentrations do not match the point count");
  }
  if (train_batch_size < 1) throw std::invalid_argument("fkl_estimate: empty training batch");
  if (measurement_points == 0) measurement_points = L;
  if (measurement_points < L) throw std::invalid_argument("fkl_estimate: measurement_points below the point count");

  const dirichlet::FitOptions options = config.fit_options(static_cast<int>(K), num_train);
  const double gamma = config.gamma;
  const double uniform = gamma / static_cast<double>(K);
  const double scale = config.batch_scale ? 1.0 / static_cast<double>(train_batch_size) : 1.0;
  const double coeff = scale / (static_cast<double>(measurement_points) * M);

  std::optional<dirichlet::DirichletParams> constant_prior;
  double constant_prior_norm = 0.0;
  if (prior.is_constant()) {
    constant_prior = prior.params_at("");
    constant_prior_norm = dirichlet::log_normalizer(*constant_prior);
  }

  TermResult result;
  result.prob_grads.assign(static_cast<std::size_t>(M), Eigen::MatrixXd::Zero(K, L));
  result.alphas.reserve(static_cast<std::size_t>(L));

  Eigen::MatrixXd point_samples(K, M);
  Eigen::VectorXd smoothed(K);
  double total = 0.0;
  for (Eigen::Index l = 0; l < L; ++l) {
    for (int m = 0; m < M; ++m) point_samples.col(m) = samples.samples[m].probs().col(l);
    dirichlet::DirichletParams q =
        frozen_alphas ? (*frozen_alphas)[static_cast<std::size_t>(l)]
                      : dirichlet::fit(dirichlet::PredictionSet(point_samples), options);
    const dirichlet::DirichletParams p =
        constant_prior ? *constant_prior : prior.params_at(keys[static_cast<std::size_t>(l)]);
    const double q_norm = dirichlet::log_normalizer(q);
    const double p_norm = constant_prior ? constant_prior_norm : dirichlet::log_normalizer(p);
    const Eigen::VectorXd diff = q.alpha() - p.alpha();

    for (int m = 0; m < M; ++m) {
      smoothed = ((1.0 - gamma) * point_samples.col(m).array() + uniform).matrix();
      total += log_density(q.alpha(), q_norm, smoothed) - log_density(p.alpha(), p_norm, smoothed);
      result.prob_grads[static_cast<std::size_t>(m)].col(l) =
          (1.0 - gamma) * (diff.array() / smoothed.array());
    }
    result.alphas.push_back(std::move(q));
  }

  result.unscaled = total * coeff;
  result.value = config.lambda * result.unscaled;
  const double grad_scale = config.lambda * coeff;
  for (auto& g : result.prob_grads) g *= grad_scale;
  return result;
}

std::vector<std::string> keys_from_ids(std::span<const std::uint64_t> ids) {
  std::vector<std::string> keys;
  keys.reserve(ids.size());
  for (std::uint64_t id : ids) keys.push_back(std::to_string(id));
  return keys;
}

StepResult likelihood_step(const models::StochasticClassifier& model, const TrainBatch& batch,
                           const FelboConfig& config, std::uint64_t nonce) {
  config.validate();
  const models::SampleBatch samples =
      models::sample_predictions(model, batch.inputs, batch.ids, config.samples, true, nonce);
  TermResult ell = expected_log_likelihood(batch.labels, samples, config.gamma);

  StepResult step;
  step.expected_ll = ell.value;
  step.objective = ell.value;
  step.grads = models::accumulate_param_grads(model, samples, ell.prob_grads);
  step.mean_probs = Eigen::MatrixXd::Zero(batch.labels.rows(), batch.labels.cols());
  for (const auto& s : samples.samples) step.mean_probs += s.probs();
  step.mean_probs /= samples.num_samples();
  return step;
}

StepResult felbo_step(const models::StochasticClassifier& model, const TrainBatch& batch,
                      const MeasurementBatch* measurement, const priors::PriorSpec& prior,
                      const FelboConfig& config, Eigen::Index num_train, std::uint64_t nonce,
                      const std::vector<dirichlet::DirichletParams>* frozen_alphas) {
  config.validate();
  const bool uses_train = config.policy != MeasurementPolicy::kFileSet;
  const bool uses_external = config.policy != MeasurementPolicy::kTrainingBatch;
  if (uses_external && (measurement == nullptr || measurement->size() == 0)) {
    throw std::invalid_argument("felbo_step: policy '" + to_string(config.policy) +
                                "' needs a non-empty measurement batch");
  }
  const Eigen::Index B = batch.inputs.cols();
  const Eigen::Index S = (uses_train ? B : 0) + (uses_external ? measurement->size() : 0);

  const models::SampleBatch train =
      models::sample_predictions(model, batch.inputs, batch.ids, config.samples, true, nonce);
  TermResult ell = expected_log_likelihood(batch.labels, train, config.gamma);

  StepResult step;
  step.expected_ll = ell.value;
  std::vector<Eigen::MatrixXd> train_grads = std::move(ell.prob_grads);

  std::vector<dirichlet::DirichletParams> frozen_train;
  std::vector<dirichlet::DirichletParams> frozen_external;
  if (frozen_alphas) {
    const std::size_t n_train = uses_train ? static_cast<std::size_t>(B) : 0;
    const std::size_t n_ext = uses_external ? static_cast<std::size_t>(measurement->size()) : 0;
    if (frozen_alphas->size() != n_train + n_ext) {
      throw std::invalid_argument("felbo_step: frozen concentrations do not match measurement points");
    }
    frozen_train.assign(frozen_alphas->begin(), frozen_alphas->begin() + static_cast<long>(n_train));
    frozen_external.assign(frozen_alphas->begin() + static_cast<long>(n_train), frozen_alphas->end());
  }

  if (uses_train) {
    const std::vector<std::string> keys = keys_from_ids(batch.ids);
    TermResult kl = fkl_estimate(train, keys, prior, config, num_train, B,
                                 frozen_alphas ? &frozen_train : nullptr, S);
    step.fkl += kl.value;
    step.fkl_unscaled += kl.unscaled;
    for (std::size_t m = 0; m < train_grads.size(); ++m) train_grads[m] -= kl.prob_grads[m];
    step.alphas = std::move(kl.alphas);
  }
  step.grads = models::accumulate_param_grads(model, train, train_grads);

  if (uses_external) {
    const models::SampleBatch external = models::sample_predictions(
        model, measurement->points, measurement->ids, config.samples, true, nonce);
    TermResult kl = fkl_estimate(external, measurement->keys, prior, config, num_train, B,
                                 frozen_alphas ? &frozen_external : nullptr, S);
    step.fkl += kl.value;
    step.fkl_unscaled += kl.unscaled;
    for (auto& g : kl.prob_grads) g = -g;
    add_into(step.grads, models::accumulate_param_grads(model, external, kl.prob_grads));
    for (auto& a : kl.alphas) step.alphas.push_back(std::move(a));
  }

  step.objective = step.expected_ll - step.fkl;
  step.mean_probs = Eigen::MatrixXd::Zero(batch.labels.rows(), B);
  for (const auto& s : train.samples) step.mean_probs += s.probs();
  step.mean_probs /= train.num_samples();
  return step;
}

}  // namespace fvi::objective
