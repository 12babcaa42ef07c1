#pragma once

#include "fvi/data.hpp"
#include "fvi/models.hpp"

#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace fvi::metrics {

inline constexpr int kDefaultEceBins = 10;

struct EvalReport {
  double accuracy = 0.0;
  double avg_llh = 0.0;       ///< nats per example
  double ece = 0.0;
  double mean_entropy = 0.0;  ///< nats, of the mean predictive
  Eigen::Index n = 0;
};

/// Mean of M smoothed samples per input (K x N), evaluation-mode draws.
Eigen::MatrixXd predictive(const models::StochasticClassifier& model, const Eigen::MatrixXd& inputs,
                           int samples, double gamma = 1e-4, std::size_t chunk = 4096);

/// Argmax with ties resolved to the lowest index.
int argmax(const Eigen::VectorXd& p);

double entropy(const Eigen::VectorXd& p);

/// Report for a precomputed predictive (K x N) against integer labels.
EvalReport evaluate_predictive(const Eigen::MatrixXd& probs, std::span<const int> labels,
                               int bins = kDefaultEceBins);

/// Throws std::invalid_argument on an empty dataset.
EvalReport evaluate(const models::StochasticClassifier& model, const data::Dataset& dataset,
                    int samples, double gamma = 1e-4, int bins = kDefaultEceBins);

/// Equal-width bins on [0, 1]: bin 0 is [0, 1/B], bin b > 0 is (b/B, (b+1)/B].
double ece(std::span<const double> confidences, std::span<const bool> correct,
           int bins = kDefaultEceBins);

/// x + epsilon * sign(d CE / d x) for the cross-entropy of the mean predictive
/// (evaluation-mode samples), clipped to [lo, hi].
Eigen::MatrixXd fgsm_perturb(const models::StochasticClassifier& model, const Eigen::MatrixXd& x,
                             std::span<const int> labels, double epsilon, int samples,
                             double lo = -1.0, double hi = 1.0, double gamma = 1e-4);

/// One CSV row per report, keyed by (dataset, model, condition).
class ReportWriter {
 public:
  explicit ReportWriter(std::ostream& out);
  void row(const std::string& dataset, const std::string& model, const std::string& condition,
           const EvalReport& report);

 private:
  std::ostream& out_;
};

}  // namespace fvi::metrics
