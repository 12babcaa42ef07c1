#pragma once

// Dirichlet densities over the probability simplex, the closed-form KL between
// two Dirichlets, and the two-stage (mean, then precision) maximum-likelihood
// fit used to turn M stochastic predictions at one input into a Dirichlet.

#include <Eigen/Dense>

#include <limits>
#include <random>

namespace fvi::dirichlet {

/// A probability vector on the (K-1)-simplex, one entry per class.
using SimplexPoint = Eigen::VectorXd;

/// Returned by log_pdf when the point sits on the simplex boundary in a
/// coordinate whose concentration differs from 1. Finite, so that Monte-Carlo
/// sums degrade instead of aborting.
inline constexpr double kBoundaryLogPdf = -std::numeric_limits<double>::max();

/// True if all entries are in [0, 1] and sum to 1 within `tol`.
bool on_simplex(const SimplexPoint& f, double tol = 1e-9);

/// Concentration vector alpha; mean() = alpha / z and precision() = z = sum(alpha).
class DirichletParams {
 public:
  /// Throws std::invalid_argument unless K >= 2 and every alpha_k is finite and > 0.
  explicit DirichletParams(Eigen::VectorXd alpha);
  static DirichletParams from_mean_precision(const SimplexPoint& mean, double precision);

  const Eigen::VectorXd& alpha() const { return alpha_; }
  Eigen::Index dim() const { return alpha_.size(); }
  double precision() const { return alpha_.sum(); }
  Eigen::VectorXd mean() const { return alpha_ / precision(); }

  friend bool operator==(const DirichletParams&, const DirichletParams&) = default;

 private:
  Eigen::VectorXd alpha_;
};

/// M simplex samples of dimension K from one stochastic model at one input,
/// stored column-wise (K x M).
class PredictionSet {
 public:
  explicit PredictionSet(Eigen::MatrixXd samples);

  const Eigen::MatrixXd& samples() const { return samples_; }
  Eigen::Index dim() const { return samples_.rows(); }
  Eigen::Index size() const { return samples_.cols(); }

 private:
  Eigen::MatrixXd samples_;
};

/// Options for the precision estimator and fit.
struct FitOptions {
  double gamma = 1e-4;  ///< label smoothing applied to every sample before fitting
  double z_min = 2.0;
  double z_max = 1e4;
  double tol = 1e-5;  ///< stop once |z_{t+1} - z_t| < tol
  int max_iter = 1000;
};

struct PrecisionEstimate {
  double z = 0.0;
  int iterations = 0;
  bool converged = false;
  bool used_fallback = false;  ///< golden-section recovery after a non-finite update
};

/// ln Gamma(z) - sum_k ln Gamma(alpha_k).
double log_normalizer(const DirichletParams& params);

double log_pdf(const DirichletParams& params, const SimplexPoint& f);

/// sum_m log_pdf(params, f^(m)).
double log_likelihood(const DirichletParams& params, const PredictionSet& preds);

/// (1 - gamma) f + gamma / K. Throws for gamma outside [0, 1).
SimplexPoint smooth(const SimplexPoint& f, double gamma);
PredictionSet smooth(const PredictionSet& preds, double gamma);

double kl_closed_form(const DirichletParams& p1, const DirichletParams& p2);

SimplexPoint estimate_mean(const PredictionSet& preds);

/// Maximizes sum_m log Dir(f^(m) | z * mean) over z with the mean held fixed.
/// Samples must already be strictly interior (smoothed). Requires M >= 2.
PrecisionEstimate estimate_precision(const PredictionSet& preds, const SimplexPoint& mean,
                                     const FitOptions& options);

/// Smooths, fits the mean, then the precision; M = 1 falls back to z = z_max.
DirichletParams fit(const PredictionSet& preds, const FitOptions& options,
                    PrecisionEstimate* diagnostics = nullptr);

/// One draw from Dir(alpha) by normalized gamma variates.
SimplexPoint sample(const DirichletParams& params, std::mt19937_64& engine);

}  // namespace fvi::dirichlet
