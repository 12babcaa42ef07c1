#include "fvi/dirichlet.hpp"

#include "fvi/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace fvi::dirichlet {

using specfun::digamma;
using specfun::ln_gamma;
using specfun::trigamma;

namespace {

void require_same_dim(Eigen::Index a, Eigen::Index b, const char* where) {
  if (a != b) {
    throw std::invalid_argument(std::string(where) + ": dimension mismatch (" + std::to_string(a) +
                                " vs " + std::to_string(b) + ")");
  }
}

// Sufficient statistics of the precision likelihood with the mean held fixed.
struct PrecisionProblem {
  Eigen::VectorXd mean;
  Eigen::VectorXd mean_log;  // (1/M) sum_m ln f_k^(m)
  double m = 0.0;

  double log_likelihood(double z) const {
    double ll = ln_gamma(z);
    for (Eigen::Index k = 0; k < mean.size(); ++k) {
      const double a = z * mean[k];
      ll += -ln_gamma(a) + (a - 1.0) * mean_log[k];
    }
    return m * ll;
  }

  double first_derivative(double z) const {
    double d = digamma(z);
    for (Eigen::Index k = 0; k < mean.size(); ++k) {
      d += mean[k] * (mean_log[k] - digamma(z * mean[k]));
    }
    return m * d;
  }

  double second_derivative(double z) const {
    double d = trigamma(z);
    for (Eigen::Index k = 0; k < mean.size(); ++k) {
      d -= mean[k] * mean[k] * trigamma(z * mean[k]);
    }
    return m * d;
  }
};

// Maximizes the concave precision likelihood over ln z in [ln lo, ln hi].
double golden_section_log_z(const PrecisionProblem& problem, double lo, double hi) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = std::log(lo);
  double b = std::log(hi);
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = problem.log_likelihood(std::exp(c));
  double fd = problem.log_likelihood(std::exp(d));
  while (b - a > 1e-12 * std::max(1.0, std::abs(a))) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = problem.log_likelihood(std::exp(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = problem.log_likelihood(std::exp(d));
    }
  }
  return std::exp(0.5 * (a + b));
}

}  // namespace

bool on_simplex(const SimplexPoint& f, double tol) {
  if (f.size() < 1) return false;
  for (double v : f) {
    if (!(v >= 0.0 && v <= 1.0)) return false;
  }
  return std::abs(f.sum() - 1.0) <= tol;
}

DirichletParams::DirichletParams(Eigen::VectorXd alpha) : alpha_(std::move(alpha)) {
  if (alpha_.size() < 2) throw std::invalid_argument("DirichletParams: need K >= 2");
  for (double a : alpha_) {
    if (!(a > 0.0) || !std::isfinite(a)) {
      throw std::invalid_argument("DirichletParams: concentrations must be finite and positive");
    }
  }
}

DirichletParams DirichletParams::from_mean_precision(const SimplexPoint& mean, double precision) {
  if (!(precision > 0.0)) throw std::invalid_argument("DirichletParams: precision must be positive");
  return DirichletParams(mean * precision);
}

PredictionSet::PredictionSet(Eigen::MatrixXd samples) : samples_(std::move(samples)) {
  if (samples_.cols() < 1) throw std::invalid_argument("PredictionSet: need at least one sample");
  if (samples_.rows() < 2) throw std::invalid_argument("PredictionSet: need K >= 2");
}

double log_normalizer(const DirichletParams& params) {
  double value = ln_gamma(params.precision());
  for (double a : params.alpha()) value -= ln_gamma(a);
  return value;
}

double log_pdf(const DirichletParams& params, const SimplexPoint& f) {
  require_same_dim(params.dim(), f.size(), "log_pdf");
  const Eigen::VectorXd& alpha = params.alpha();
  double value = log_normalizer(params);
  for (Eigen::Index k = 0; k < f.size(); ++k) {
    if (alpha[k] == 1.0) continue;
    if (!(f[k] > 0.0)) return kBoundaryLogPdf;
    value += (alpha[k] - 1.0) * std::log(f[k]);
  }
  return value;
}

double log_likelihood(const DirichletParams& params, const PredictionSet& preds) {
  double total = 0.0;
  for (Eigen::Index m = 0; m < preds.size(); ++m) {
    total += log_pdf(params, preds.samples().col(m));
  }
  return total;
}

SimplexPoint smooth(const SimplexPoint& f, double gamma) {
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("smooth: gamma must lie in [0, 1)");
  }
  const double uniform = gamma / static_cast<double>(f.size());
  return ((1.0 - gamma) * f.array() + uniform).matrix();
}

PredictionSet smooth(const PredictionSet& preds, double gamma) {
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("smooth: gamma must lie in [0, 1)");
  }
  const double uniform = gamma / static_cast<double>(preds.dim());
  return PredictionSet(((1.0 - gamma) * preds.samples().array() + uniform).matrix());
}

double kl_closed_form(const DirichletParams& p1, const DirichletParams& p2) {
  require_same_dim(p1.dim(), p2.dim(), "kl_closed_form");
  const Eigen::VectorXd& a1 = p1.alpha();
  const Eigen::VectorXd& a2 = p2.alpha();
  const double z1 = p1.precision();
  const double psi_z1 = digamma(z1);
  double kl = ln_gamma(z1) - ln_gamma(p2.precision());
  for (Eigen::Index k = 0; k < a1.size(); ++k) {
    kl += -ln_gamma(a1[k]) + ln_gamma(a2[k]) + (a1[k] - a2[k]) * (digamma(a1[k]) - psi_z1);
  }
  return kl;
}

SimplexPoint estimate_mean(const PredictionSet& preds) { return preds.samples().rowwise().mean(); }

PrecisionEstimate estimate_precision(const PredictionSet& preds, const SimplexPoint& mean,
                                     const FitOptions& options) {
  require_same_dim(preds.dim(), mean.size(), "estimate_precision");
  if (preds.size() < 2) {
    throw std::invalid_argument("estimate_precision: need M >= 2 samples (use fit for M = 1)");
  }
  if (!(options.tol > 0.0)) throw std::invalid_argument("estimate_precision: tol must be positive");
  if (!(options.z_min > 0.0) || options.z_min > options.z_max) {
    throw std::invalid_argument("estimate_precision: need 0 < z_min <= z_max");
  }
  if ((preds.samples().array() <= 0.0).any() || (mean.array() <= 0.0).any()) {
    throw std::invalid_argument("estimate_precision: samples must be strictly interior, smooth first");
  }

  PrecisionProblem problem{mean, preds.samples().array().log().rowwise().mean().matrix(),
                           static_cast<double>(preds.size())};
  const auto clamp = [&](double z) { return std::clamp(z, options.z_min, options.z_max); };

  PrecisionEstimate result;
  if (options.z_min == options.z_max) {
    result.z = options.z_min;
    result.converged = true;
    return result;
  }

  // Stirling-approximation start; ln(mean) - mean_log >= 0 by Jensen.
  const double K = static_cast<double>(mean.size());
  const double denom =
      -2.0 * (mean.array() * (problem.mean_log.array() - mean.array().log())).sum();
  double z = (denom > 0.0 && std::isfinite(denom)) ? clamp((K - 1.0) / denom)
                                                    : clamp(0.5 * options.z_max);

  double best_z = z;
  double best_ll = problem.log_likelihood(z);
  for (int it = 1; it <= options.max_iter; ++it) {
    const double d1 = problem.first_derivative(z);
    const double d2 = problem.second_derivative(z);
    const double inv = 1.0 / z + d1 / (z * z * d2);
    if (!std::isfinite(inv)) {
      result.z = golden_section_log_z(problem, options.z_min, options.z_max);
      result.iterations = it;
      result.converged = true;
      result.used_fallback = true;
      return result;
    }
    // A non-positive reciprocal means the optimum lies beyond any finite z.
    const double next = inv > 0.0 ? clamp(1.0 / inv) : options.z_max;
    result.iterations = it;
    const double ll = problem.log_likelihood(next);
    if (ll > best_ll) {
      best_ll = ll;
      best_z = next;
    }
    const double step = std::abs(next - z);
    z = next;
    if (step < options.tol) {
      result.converged = true;
      break;
    }
  }
  result.z = result.converged ? z : best_z;
  return result;
}

DirichletParams fit(const PredictionSet& preds, const FitOptions& options,
                    PrecisionEstimate* diagnostics) {
  const PredictionSet smoothed = smooth(preds, options.gamma);
  const SimplexPoint mean = estimate_mean(smoothed);
  if (smoothed.size() == 1) {
    if (diagnostics) *diagnostics = PrecisionEstimate{options.z_max, 0, true, false};
    return DirichletParams(mean * options.z_max);
  }
  const PrecisionEstimate estimate = estimate_precision(smoothed, mean, options);
  if (diagnostics) *diagnostics = estimate;
  return DirichletParams(mean * estimate.z);
}

SimplexPoint sample(const DirichletParams& params, std::mt19937_64& engine) {
  SimplexPoint draw(params.dim());
  for (Eigen::Index k = 0; k < draw.size(); ++k) {
    std::gamma_distribution<double> gamma(params.alpha()[k], 1.0);
    draw[k] = gamma(engine);
  }
  return draw / draw.sum();
}

}  // namespace fvi::dirichlet
