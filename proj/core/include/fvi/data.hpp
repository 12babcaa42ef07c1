#pragma once

// Dataset generators and loaders. Inputs are stored column-wise (D x N) to
// match the network's batch layout; labels are class indices and one_hot()
// expands them on demand.

#include "fvi/measurement.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fvi::data {

/// Affine map from raw feature values: x = scale * raw + offset.
struct Normalization {
  std::string name = "identity";
  double scale = 1.0;
  double offset = 0.0;
  double lo = -1.0;  ///< clip range of normalized inputs (adversarial perturbation)
  double hi = 1.0;
};

struct Dataset {
  Eigen::MatrixXd inputs;   ///< D x N
  std::vector<int> labels;  ///< N class indices in [0, K)
  int num_classes = 0;
  Normalization normalization;

  Eigen::Index size() const { return inputs.cols(); }
  Eigen::Index dim() const { return inputs.rows(); }

  /// Throws std::invalid_argument on N mismatch, K < 2 or labels outside [0, K).
  void validate() const;

  Eigen::MatrixXd one_hot() const;
  Eigen::MatrixXd one_hot(std::span<const Eigen::Index> columns) const;
  Eigen::MatrixXd gather(std::span<const Eigen::Index> columns) const;
  /// The first `n` examples (all when n >= N).
  Dataset head(Eigen::Index n) const;
};

/// Two interleaving half-circles: class 0 is (cos t, sin t), class 1 is
/// (1 - cos t, 0.5 - sin t), t evenly spaced on [0, pi], plus N(0, noise^2)
/// on each coordinate. Class 0 occupies the first n/2 columns.
Dataset two_moons(int n, double noise, std::uint64_t seed);

/// Noise-free class centroids of two_moons (columns: class 0, class 1).
Eigen::Matrix2d two_moons_centroids(int n);

/// Uniform inputs on [-1, 1]^D; bit j of the label is [x_j > 0] for j < log2 K.
Dataset hypercube(int dim, int num_classes, int n, std::uint64_t seed);

/// IDX images (magic 0x803) and labels (0x801), raw or gzip. Pixels map to
/// 2 * p / 255 - 1. Parse errors name the file and byte offset.
Dataset load_mnist(const std::string& image_path, const std::string& label_path);

/// Loads `<dir>/{train,t10k}-{images-idx3,labels-idx1}-ubyte[.gz]`.
Dataset load_mnist_split(const std::string& dir, bool train);

inline constexpr int kImageSide = 28;

/// Rotates a 28x28 row-major image counter-clockwise about its center with
/// bilinear interpolation; samples outside the image read `fill`.
Eigen::VectorXd rotate_image(const Eigen::VectorXd& image, double angle_degrees,
                             double fill = -1.0);
Dataset rotate_dataset(const Dataset& dataset, double angle_degrees);

/// Row-major lattice (y outer, x inner), both endpoints included.
MeasurementSet grid_2d(double xmin, double xmax, double ymin, double ymax, double step);

/// CSV with header x1..xD and an optional trailing `key` column.
MeasurementSet load_measurement_csv(const std::string& path);
void save_measurement_csv(const MeasurementSet& set, const std::string& path);

/// CSV with header x1..xD,label.
void save_dataset_csv(const Dataset& dataset, const std::string& path);
Dataset load_dataset_csv(const std::string& path, int num_classes);

/// The training inputs as a measurement set keyed by dataset index.
MeasurementSet measurement_from_dataset(const Dataset& dataset);

}  // namespace fvi::data
