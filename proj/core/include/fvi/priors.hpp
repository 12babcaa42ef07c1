#pragma once

// Function-space Dirichlet priors p(f_x): a constant Dir(beta) at every input,
// or a table of per-input (mean, precision) pairs looked up by exact key.
//
// Table file (CSV, UTF-8, header mandatory):
//   key,mean_1,...,mean_K,precision

#include "fvi/dirichlet.hpp"

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace fvi::priors {

struct TableEntry {
  std::string key;
  dirichlet::SimplexPoint mean;
  double precision = 0.0;
};

class PriorSpec {
 public:
  /// Dir(beta) everywhere; throws unless every beta_k > 0 and K >= 2.
  static PriorSpec constant(Eigen::VectorXd beta);
  /// Dir(1, ..., 1), precision K.
  static PriorSpec uniform(int num_classes);
  /// Throws on duplicate keys, invalid means or non-positive precisions.
  static PriorSpec table(std::vector<TableEntry> entries);

  static PriorSpec load_table(const std::string& path);
  void save_table(const std::string& path) const;

  bool is_constant() const { return entries_.empty(); }
  int dim() const { return dim_; }
  const std::vector<TableEntry>& entries() const { return entries_; }

  /// Throws std::out_of_range naming the key when a table prior lacks it.
  dirichlet::DirichletParams params_at(std::string_view key) const;
  double log_pdf(std::string_view key, const dirichlet::SimplexPoint& f) const;

 private:
  PriorSpec() = default;

  int dim_ = 0;
  Eigen::VectorXd beta_;
  std::vector<TableEntry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace fvi::priors
