#include "fvi/metrics.hpp"

#include "fvi/csv.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <stdexcept>

namespace fvi::metrics {
namespace {

std::vector<std::uint64_t> column_ids(Eigen::Index start, Eigen::Index count) {
  std::vector<std::uint64_t> ids(static_cast<std::size_t>(count));
  std::iota(ids.begin(), ids.end(), static_cast<std::uint64_t>(start));
  return ids;
}

}  // namespace

Eigen::MatrixXd predictive(const models::StochasticClassifier& model, const Eigen::MatrixXd& inputs,
                           int samples, double gamma, std::size_t chunk) {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("predictive: gamma must lie in [0, 1)");
  if (chunk == 0) throw std::invalid_argument("predictive: chunk must be positive");
  const Eigen::Index N = inputs.cols();
  const Eigen::Index K = model.spec().num_classes();
  const Eigen::Index step = static_cast<Eigen::Index>(chunk);
  Eigen::MatrixXd out(K, N);
  for (Eigen::Index start = 0; start < N; start += step) {
    const Eigen::Index len = std::min(step, N - start);
    const std::vector<std::uint64_t> ids = column_ids(start, len);
    const models::SampleBatch batch =
        models::sample_predictions(model, inputs.middleCols(start, len), ids, samples, false);
    Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(K, len);
    for (const auto& s : batch.samples) mean += s.probs();
    mean /= batch.num_samples();
    out.middleCols(start, len) = ((1.0 - gamma) * mean.array() + gamma / static_cast<double>(K)).matrix();
  }
  return out;
}

int argmax(const Eigen::VectorXd& p) {
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < p.size(); ++k) {
    if (p[k] > p[best]) best = k;
  }
  return static_cast<int>(best);
}

double entropy(const Eigen::VectorXd& p) {
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

EvalReport evaluate_predictive(const Eigen::MatrixXd& probs, std::span<const int> labels, int bins) {
  const Eigen::Index N = probs.cols();
  if (N == 0) throw std::invalid_argument("evaluate: empty dataset");
  if (static_cast<Eigen::Index>(labels.size()) != N) {
    throw std::invalid_argument("evaluate: label count does not match predictions");
  }
  EvalReport report;
  report.n = N;
  std::vector<double> confidences(static_cast<std::size_t>(N));
  std::unique_ptr<bool[]> flags(new bool[static_cast<std::size_t>(N)]);
  double llh = 0.0;
  double ent = 0.0;
  Eigen::Index correct = 0;
  for (Eigen::Index n = 0; n < N; ++n) {
    const Eigen::VectorXd p = probs.col(n);
    const int y = labels[static_cast<std::size_t>(n)];
    if (y < 0 || y >= p.size()) throw std::invalid_argument("evaluate: label out of range");
    const int pred = argmax(p);
    const bool hit = pred == y;
    correct += hit ? 1 : 0;
    llh += std::log(p[y]);
    ent += entropy(p);
    confidences[static_cast<std::size_t>(n)] = p[pred];
    flags[static_cast<std::size_t>(n)] = hit;
  }
  report.accuracy = static_cast<double>(correct) / static_cast<double>(N);
  report.avg_llh = llh / static_cast<double>(N);
  report.mean_entropy = ent / static_cast<double>(N);
  report.ece = ece(confidences, std::span<const bool>(flags.get(), static_cast<std::size_t>(N)), bins);
  return report;
}

EvalReport evaluate(const models::StochasticClassifier& model, const data::Dataset& dataset,
                    int samples, double gamma, int bins) {
  if (dataset.size() == 0) throw std::invalid_argument("evaluate: empty dataset");
  return evaluate_predictive(predictive(model, dataset.inputs, samples, gamma), dataset.labels, bins);
}

double ece(std::span<const double> confidences, std::span<const bool> correct, int bins) {
  if (bins < 1) throw std::invalid_argument("ece: bins must be >= 1");
  if (confidences.size() != correct.size()) throw std::invalid_argument("ece: size mismatch");
  if (confidences.empty()) return 0.0;
  std::vector<double> conf_sum(static_cast<std::size_t>(bins), 0.0);
  std::vector<double> hit_sum(static_cast<std::size_t>(bins), 0.0);
  std::vector<double> count(static_cast<std::size_t>(bins), 0.0);
  for (std::size_t i = 0; i < confidences.size(); ++i) {
    const double c = confidences[i];
    if (!(c >= 0.0 && c <= 1.0)) throw std::invalid_argument("ece: confidence outside [0, 1]");
    int b = static_cast<int>(std::ceil(c * bins)) - 1;
    b = std::clamp(b, 0, bins - 1);
    conf_sum[static_cast<std::size_t>(b)] += c;
    hit_sum[static_cast<std::size_t>(b)] += correct[i] ? 1.0 : 0.0;
    count[static_cast<std::size_t>(b)] += 1.0;
  }
  const double n = static_cast<double>(confidences.size());
  double total = 0.0;
  for (std::size_t b = 0; b < count.size(); ++b) {
    if (count[b] == 0.0) continue;
    total += std::abs(hit_sum[b] - conf_sum[b]) / n;
  }
  return total;
}

Eigen::MatrixXd fgsm_perturb(const models::StochasticClassifier& model, const Eigen::MatrixXd& x,
                             std::span<const int> labels, double epsilon, int samples, double lo,
                             double hi, double gamma) {
  if (!(epsilon >= 0.0)) throw std::invalid_argument("fgsm_perturb: epsilon must be >= 0");
  if (static_cast<Eigen::Index>(labels.size()) != x.cols()) {
    throw std::invalid_argument("fgsm_perturb: label count does not match inputs");
  }
  if (epsilon == 0.0) return x;
  const Eigen::Index N = x.cols();
  const Eigen::Index K = model.spec().num_classes();
  constexpr Eigen::Index kChunk = 2048;
  Eigen::MatrixXd out(x.rows(), N);
  for (Eigen::Index start = 0; start < N; start += kChunk) {
    const Eigen::Index len = std::min(kChunk, N - start);
    const Eigen::MatrixXd xs = x.middleCols(start, len);
    const std::vector<std::uint64_t> ids = column_ids(start, len);
    const models::SampleBatch batch = models::sample_predictions(model, xs, ids, samples, false);
    const int M = batch.num_samples();
    Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(K, len);
    for (const auto& s : batch.samples) mean += s.probs();
    mean /= M;
    // CE = -ln((1 - gamma) pbar_y + gamma / K)
    Eigen::MatrixXd upstream = Eigen::MatrixXd::Zero(K, len);
    for (Eigen::Index n = 0; n < len; ++n) {
      const int y = labels[static_cast<std::size_t>(start + n)];
      const double smoothed = (1.0 - gamma) * mean(y, n) + gamma / static_cast<double>(K);
      upstream(y, n) = -(1.0 - gamma) / (smoothed * M);
    }
    const std::vector<Eigen::MatrixXd> grads(static_cast<std::size_t>(M), upstream);
    const Eigen::MatrixXd g = models::accumulate_input_grads(model, batch, grads);
    const Eigen::MatrixXd sign = g.unaryExpr([](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
    out.middleCols(start, len) = (xs + epsilon * sign).cwiseMax(lo).cwiseMin(hi);
  }
  return out;
}

ReportWriter::ReportWriter(std::ostream& out) : out_(out) {
  csv::Writer(out_).header({"dataset", "model", "condition", "accuracy", "llh", "ece", "entropy", "n"});
}

void ReportWriter::row(const std::string& dataset, const std::string& model,
                       const std::string& condition, const EvalReport& report) {
  csv::Writer writer(out_);
  writer.field(dataset).field(model).field(condition).field(report.accuracy).field(report.avg_llh);
  writer.field(report.ece).field(report.mean_entropy).field(static_cast<long long>(report.n));
  writer.end_row();
}

}  // namespace fvi::metrics
