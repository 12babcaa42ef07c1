#include "fvi/priors.hpp"

#include "fvi/csv.hpp"

#include <fstream>
#include <stdexcept>

namespace fvi::priors {

PriorSpec PriorSpec::constant(Eigen::VectorXd beta) {
  PriorSpec prior;
  // DirichletParams validates positivity and K >= 2.
  prior.beta_ = dirichlet::DirichletParams(std::move(beta)).alpha();
  prior.dim_ = static_cast<int>(prior.beta_.size());
  return prior;
}

PriorSpec PriorSpec::uniform(int num_classes) {
  return constant(Eigen::VectorXd::Ones(num_classes));
}

PriorSpec PriorSpec::table(std::vector<TableEntry> entries) {
  if (entries.empty()) throw std::invalid_argument("prior table is empty");
  PriorSpec prior;
  prior.dim_ = static_cast<int>(entries.front().mean.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const TableEntry& e = entries[i];
    if (e.mean.size() != prior.dim_) {
      throw std::invalid_argument("prior table entry '" + e.key + "' has the wrong dimension");
    }
    if (!dirichlet::on_simplex(e.mean, 1e-6) || (e.mean.array() <= 0.0).any()) {
      throw std::invalid_argument("prior table entry '" + e.key + "' mean is not interior to the simplex");
    }
    if (!(e.precision > 0.0)) {
      throw std::invalid_argument("prior table entry '" + e.key + "' precision must be positive");
    }
    if (!prior.index_.emplace(e.key, i).second) {
      throw std::invalid_argument("prior table has duplicate key '" + e.key + "'");
    }
  }
  prior.entries_ = std::move(entries);
  return prior;
}

PriorSpec PriorSpec::load_table(const std::string& path) {
  const auto lines = csv::read_lines(path);
  if (lines.empty()) throw std::runtime_error(path + ": missing header row");
  const auto header = csv::split(lines.front());
  if (header.size() < 4 || header.front() != "key" || header.back() != "precision") {
    throw std::runtime_error(path + ": header must be key,mean_1..mean_K,precision");
  }
  const std::size_t K = header.size() - 2;
  for (std::size_t k = 0; k < K; ++k) {
    if (header[k + 1] != "mean_" + std::to_string(k + 1)) {
      throw std::runtime_error(path + ": unexpected column '" + header[k + 1] + "'");
    }
  }
  std::vector<TableEntry> entries;
  for (std::size_t row = 1; row < lines.size(); ++row) {
    const auto fields = csv::split(lines[row]);
    if (fields.size() != header.size()) {
      throw std::runtime_error(path + ":" + std::to_string(row + 1) + ": expected " +
                               std::to_string(header.size()) + " fields");
    }
    TableEntry e;
    e.key = fields[0];
    e.mean.resize(static_cast<Eigen::Index>(K));
    try {
      for (std::size_t k = 0; k < K; ++k) e.mean[static_cast<Eigen::Index>(k)] = csv::parse_double(fields[k + 1]);
      e.precision = csv::parse_double(fields.back());
    } catch (const std::invalid_argument& err) {
      throw std::runtime_error(path + ":" + std::to_string(row + 1) + ": " + err.what());
    }
    entries.push_back(std::move(e));
  }
  return table(std::move(entries));
}

void PriorSpec::save_table(const std::string& path) const {
  if (is_constant()) throw std::logic_error("save_table: prior is not a table prior");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  csv::Writer writer(out);
  writer.field("key");
  for (int k = 0; k < dim_; ++k) writer.field("mean_" + std::to_string(k + 1));
  writer.field("precision");
  writer.end_row();
  for (const TableEntry& e : entries_) {
    writer.field(e.key);
    for (double m : e.mean) writer.field(m);
    writer.field(e.precision);
    writer.end_row();
  }
}

dirichlet::DirichletParams PriorSpec::params_at(std::string_view key) const {
  if (is_constant()) return dirichlet::DirichletParams(beta_);
  const auto it = index_.find(std::string(key));
  if (it == index_.end()) {
    throw std::out_of_range("prior table has no entry for key '" + std::string(key) + "'");
  }
  const TableEntry& e = entries_[it->second];
  return dirichlet::DirichletParams::from_mean_precision(e.mean, e.precision);
}

double PriorSpec::log_pdf(std::string_view key, const dirichlet::SimplexPoint& f) const {
  return dirichlet::log_pdf(params_at(key), f);
}

}  // namespace fvi::priors
