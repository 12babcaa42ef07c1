#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace fvi {

/// Finite set of inputs (D x L, one point per column) at which the variational
/// and prior processes are compared. Keys identify points for table priors;
/// without explicit keys a point's key is its column index.
struct MeasurementSet {
  Eigen::MatrixXd points;
  std::vector<std::string> keys;
  std::string provenance;

  Eigen::Index size() const { return points.cols(); }
  Eigen::Index dim() const { return points.rows(); }
  std::string key(Eigen::Index l) const {
    return keys.empty() ? std::to_string(l) : keys[static_cast<std::size_t>(l)];
  }

  /// Throws std::invalid_argument unless L >= 1, coordinates are finite and
  /// keys (when present) match the point count.
  void validate() const;
};

}  // namespace fvi
