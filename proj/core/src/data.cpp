#include "fvi/data.hpp"

#include "fvi/csv.hpp"
#include "fvi/rng.hpp"

#include <zlib.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <stdexcept>

namespace fvi::data {
namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

// Sequential reader over an IDX file; gzread passes uncompressed files through.
class IdxReader {
 public:
  explicit IdxReader(const std::string& path) : path_(path) {
    file_ = gzopen(path.c_str(), "rb");
    if (file_ == nullptr) throw std::runtime_error("cannot open " + path);
  }
  ~IdxReader() { gzclose(file_); }
  IdxReader(const IdxReader&) = delete;
  IdxReader& operator=(const IdxReader&) = delete;

  void read(void* out, std::size_t n, const char* what) {
    const int got = gzread(file_, out, static_cast<unsigned>(n));
    if (got < 0 || static_cast<std::size_t>(got) != n) {
      fail(std::string("truncated while reading ") + what);
    }
    offset_ += n;
  }

  std::uint32_t read_u32(const char* what) {
    unsigned char b[4];
    read(b, 4, what);
    return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) |
           std::uint32_t{b[3]};
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw std::runtime_error(path_ + ": " + message + " at byte offset " + std::to_string(offset_));
  }

  std::size_t offset() const { return offset_; }

 private:
  std::string path_;
  gzFile file_ = nullptr;
  std::size_t offset_ = 0;
};

std::string hex(std::uint32_t value) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "0x%08x", value);
  return buf;
}

std::string pick_existing(const std::string& base) {
  if (std::filesystem::exists(base)) return base;
  if (std::filesystem::exists(base + ".gz")) return base + ".gz";
  throw std::runtime_error("missing MNIST file " + base + "[.gz]");
}

std::vector<std::string> coordinate_header(Eigen::Index dim) {
  std::vector<std::string> names;
  for (Eigen::Index d = 1; d <= dim; ++d) names.push_back("x" + std::to_string(d));
  return names;
}

void check_coordinate_header(const std::vector<std::string>& header, Eigen::Index dim,
                             const std::string& path) {
  for (Eigen::Index d = 0; d < dim; ++d) {
    if (header[static_cast<std::size_t>(d)] != "x" + std::to_string(d + 1)) {
      throw std::runtime_error(path + ":1: expected column x" + std::to_string(d + 1));
    }
  }
}

std::pair<double, double> exact_cos_sin(double degrees) {
  const double turns = degrees / 90.0;
  if (turns == std::floor(turns)) {
    switch (static_cast<int>(std::fmod(std::fmod(turns, 4.0) + 4.0, 4.0))) {
      case 0:
        return {1.0, 0.0};
      case 1:
        return {0.0, 1.0};
      case 2:
        return {-1.0, 0.0};
      default:
        return {0.0, -1.0};
    }
  }
  const double rad = degrees * std::numbers::pi / 180.0;
  return {std::cos(rad), std::sin(rad)};
}

}  // namespace

void Dataset::validate() const {
  if (num_classes < 2) throw std::invalid_argument("dataset needs K >= 2");
  if (static_cast<Eigen::Index>(labels.size()) != inputs.cols()) {
    throw std::invalid_argument("dataset has " + std::to_string(labels.size()) + " labels for " +
                                std::to_string(inputs.cols()) + " inputs");
  }
  for (std::size_t n = 0; n < labels.size(); ++n) {
    if (labels[n] < 0 || labels[n] >= num_classes) {
      throw std::invalid_argument("label " + std::to_string(labels[n]) + " at index " +
                                  std::to_string(n) + " outside [0, K)");
    }
  }
}

Eigen::MatrixXd Dataset::one_hot() const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(num_classes, size());
  for (Eigen::Index n = 0; n < size(); ++n) out(labels[static_cast<std::size_t>(n)], n) = 1.0;
  return out;
}

Eigen::MatrixXd Dataset::one_hot(std::span<const Eigen::Index> columns) const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(num_classes, static_cast<Eigen::Index>(columns.size()));
  for (std::size_t i = 0; i < columns.size(); ++i) {
    out(labels.at(static_cast<std::size_t>(columns[i])), static_cast<Eigen::Index>(i)) = 1.0;
  }
  return out;
}

Eigen::MatrixXd Dataset::gather(std::span<const Eigen::Index> columns) const {
  Eigen::MatrixXd out(dim(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t i = 0; i < columns.size(); ++i) {
    out.col(static_cast<Eigen::Index>(i)) = inputs.col(columns[i]);
  }
  return out;
}

Dataset Dataset::head(Eigen::Index n) const {
  const Eigen::Index take = std::min(n, size());
  Dataset out;
  out.inputs = inputs.leftCols(take);
  out.labels.assign(labels.begin(), labels.begin() + take);
  out.num_classes = num_classes;
  out.normalization = normalization;
  return out;
}

Dataset two_moons(int n, double noise, std::uint64_t seed) {
  if (n < 2 || n % 2 != 0) throw std::invalid_argument("two_moons: n must be even and >= 2");
  if (!(noise >= 0.0)) throw std::invalid_argument("two_moons: noise must be non-negative");
  const int half = n / 2;
  Dataset out;
  out.inputs.resize(2, n);
  out.labels.resize(static_cast<std::size_t>(n));
  out.num_classes = 2;
  out.normalization = Normalization{"identity", 1.0, 0.0, -1e300, 1e300};
  for (int i = 0; i < half; ++i) {
    const double t = half == 1 ? 0.0 : std::numbers::pi * i / (half - 1);
    out.inputs.col(i) << std::cos(t), std::sin(t);
    out.inputs.col(half + i) << 1.0 - std::cos(t), 0.5 - std::sin(t);
    out.labels[static_cast<std::size_t>(i)] = 0;
    out.labels[static_cast<std::size_t>(half + i)] = 1;
  }
  if (noise > 0.0) {
    rng::Engine engine(seed);
    for (int i = 0; i < n; ++i) {
      out.inputs(0, i) += noise * rng::normal(engine);
      out.inputs(1, i) += noise * rng::normal(engine);
    }
  }
  return out;
}

Eigen::Matrix2d two_moons_centroids(int n) {
  const Dataset clean = two_moons(n, 0.0, 0);
  const int half = n / 2;
  Eigen::Matrix2d c;
  c.col(0) = clean.inputs.leftCols(half).rowwise().mean();
  c.col(1) = clean.inputs.rightCols(half).rowwise().mean();
  return c;
}

Dataset hypercube(int dim, int num_classes, int n, std::uint64_t seed) {
  if (dim < 1) throw std::invalid_argument("hypercube: D must be >= 1");
  if (num_classes < 2 || (num_classes & (num_classes - 1)) != 0) {
    throw std::invalid_argument("hypercube: K must be a power of two >= 2");
  }
  int bits = 0;
  while ((1 << bits) < num_classes) ++bits;
  if (bits > dim) throw std::invalid_argument("hypercube: K exceeds 2^D");
  if (n < 1) throw std::invalid_argument("hypercube: n must be >= 1");

  Dataset out;
  out.inputs.resize(dim, n);
  out.labels.resize(static_cast<std::size_t>(n));
  out.num_classes = num_classes;
  rng::Engine engine(seed);
  for (int i = 0; i < n; ++i) {
    int label = 0;
    for (int d = 0; d < dim; ++d) {
      const double x = rng::uniform(engine, -1.0, 1.0);
      out.inputs(d, i) = x;
      if (d < bits && x > 0.0) label |= 1 << d;
    }
    out.labels[static_cast<std::size_t>(i)] = label;
  }
  return out;
}

Dataset load_mnist(const std::string& image_path, const std::string& label_path) {
  IdxReader images(image_path);
  if (const std::uint32_t magic = images.read_u32("magic"); magic != kImageMagic) {
    throw std::runtime_error(image_path + ": bad image magic " + hex(magic) +
                             " at byte offset 0");
  }
  const std::uint32_t count = images.read_u32("image count");
  const std::uint32_t rows = images.read_u32("row count");
  const std::uint32_t cols = images.read_u32("column count");

  IdxReader labels(label_path);
  if (const std::uint32_t magic = labels.read_u32("magic"); magic != kLabelMagic) {
    throw std::runtime_error(label_path + ": bad label magic " + hex(magic) +
                             " at byte offset 0");
  }
  const std::uint32_t label_count = labels.read_u32("label count");
  if (label_count != count) {
    labels.fail("label count " + std::to_string(label_count) + " differs from image count " +
                std::to_string(count));
  }

  const std::size_t pixels = std::size_t{rows} * cols;
  Dataset out;
  out.num_classes = 10;
  out.normalization = Normalization{"mnist", 2.0 / 255.0, -1.0, -1.0, 1.0};
  out.inputs.resize(static_cast<Eigen::Index>(pixels), count);
  out.labels.resize(count);

  std::vector<unsigned char> buffer(pixels);
  for (std::uint32_t i = 0; i < count; ++i) {
    images.read(buffer.data(), pixels, "pixels");
    for (std::size_t p = 0; p < pixels; ++p) {
      out.inputs(static_cast<Eigen::Index>(p), i) = 2.0 * (buffer[p] / 255.0) - 1.0;
    }
  }
  std::vector<unsigned char> raw_labels(count);
  if (count > 0) labels.read(raw_labels.data(), count, "labels");
  for (std::uint32_t i = 0; i < count; ++i) {
    if (raw_labels[i] > 9) {
      throw std::runtime_error(label_path + ": label " + std::to_string(raw_labels[i]) +
                               " out of range at byte offset " + std::to_string(8 + i));
    }
    out.labels[i] = raw_labels[i];
  }
  return out;
}

Dataset load_mnist_split(const std::string& dir, bool train) {
  const std::string prefix = dir + "/" + (train ? "train" : "t10k");
  return load_mnist(pick_existing(prefix + "-images-idx3-ubyte"),
                    pick_existing(prefix + "-labels-idx1-ubyte"));
}

Eigen::VectorXd rotate_image(const Eigen::VectorXd& image, double angle_degrees, double fill) {
  constexpr int side = kImageSide;
  if (image.size() != side * side) {
    throw std::invalid_argument("rotate_image: expected " + std::to_string(side * side) + " pixels");
  }
  if (angle_degrees == 0.0) return image;
  const auto [c, s] = exact_cos_sin(angle_degrees);
  const double center = (side - 1) / 2.0;
  const auto pixel = [&](int r, int col) {
    if (r < 0 || r >= side || col < 0 || col >= side) return fill;
    return image[r * side + col];
  };

  Eigen::VectorXd out(side * side);
  for (int r = 0; r < side; ++r) {
    for (int col = 0; col < side; ++col) {
      // Output pixel in centered, y-up coordinates, rotated back to the source.
      const double x = col - center;
      const double y = center - r;
      const double xs = c * x + s * y;
      const double ys = -s * x + c * y;
      const double src_col = xs + center;
      const double src_row = center - ys;
      const int c0 = static_cast<int>(std::floor(src_col));
      const int r0 = static_cast<int>(std::floor(src_row));
      const double fc = src_col - c0;
      const double fr = src_row - r0;
      out[r * side + col] = (1 - fr) * ((1 - fc) * pixel(r0, c0) + fc * pixel(r0, c0 + 1)) +
                            fr * ((1 - fc) * pixel(r0 + 1, c0) + fc * pixel(r0 + 1, c0 + 1));
    }
  }
  return out;
}

Dataset rotate_dataset(const Dataset& dataset, double angle_degrees) {
  Dataset out = dataset;
  if (angle_degrees == 0.0) return out;
  for (Eigen::Index n = 0; n < out.size(); ++n) {
    out.inputs.col(n) = rotate_image(dataset.inputs.col(n), angle_degrees, dataset.normalization.lo);
  }
  return out;
}

MeasurementSet grid_2d(double xmin, double xmax, double ymin, double ymax, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("grid_2d: step must be positive");
  if (!(xmax > xmin) || !(ymax > ymin)) throw std::invalid_argument("grid_2d: need max > min");
  const auto count = [step](double lo, double hi) {
    return static_cast<Eigen::Index>(std::floor((hi - lo) / step + 1e-9)) + 1;
  };
  const Eigen::Index nx = count(xmin, xmax);
  const Eigen::Index ny = count(ymin, ymax);
  MeasurementSet out;
  out.points.resize(2, nx * ny);
  for (Eigen::Index j = 0; j < ny; ++j) {
    for (Eigen::Index i = 0; i < nx; ++i) {
      out.points(0, j * nx + i) = xmin + static_cast<double>(i) * step;
      out.points(1, j * nx + i) = ymin + static_cast<double>(j) * step;
    }
  }
  out.provenance = "grid";
  return out;
}

MeasurementSet load_measurement_csv(const std::string& path) {
  const std::vector<std::string> lines = csv::read_lines(path);
  if (lines.empty()) throw std::runtime_error(path + ": empty measurement file");
  const std::vector<std::string> header = csv::split(lines.front());
  const bool has_key = !header.empty() && header.back() == "key";
  const Eigen::Index dim = static_cast<Eigen::Index>(header.size()) - (has_key ? 1 : 0);
  if (dim < 1) throw std::runtime_error(path + ":1: no coordinate columns");
  check_coordinate_header(header, dim, path);

  MeasurementSet out;
  out.provenance = path;
  out.points.resize(dim, static_cast<Eigen::Index>(lines.size()) - 1);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::vector<std::string> fields = csv::split(lines[i]);
    if (fields.size() != header.size()) {
      throw std::runtime_error(path + ":" + std::to_string(i + 1) + ": expected " +
                               std::to_string(header.size()) + " fields");
    }
    try {
      for (Eigen::Index d = 0; d < dim; ++d) {
        out.points(d, static_cast<Eigen::Index>(i) - 1) =
            csv::parse_double(fields[static_cast<std::size_t>(d)]);
      }
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error(path + ":" + std::to_string(i + 1) + ": " + e.what());
    }
    if (has_key) out.keys.push_back(fields.back());
  }
  out.validate();
  return out;
}

void save_measurement_csv(const MeasurementSet& set, const std::string& path) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot write " + path);
  csv::Writer writer(file);
  std::vector<std::string> header = coordinate_header(set.dim());
  if (!set.keys.empty()) header.push_back("key");
  writer.header(header);
  for (Eigen::Index l = 0; l < set.size(); ++l) {
    for (Eigen::Index d = 0; d < set.dim(); ++d) writer.field(set.points(d, l));
    if (!set.keys.empty()) writer.field(set.keys[static_cast<std::size_t>(l)]);
    writer.end_row();
  }
}

void save_dataset_csv(const Dataset& dataset, const std::string& path) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot write " + path);
  csv::Writer writer(file);
  std::vector<std::string> header = coordinate_header(dataset.dim());
  header.push_back("label");
  writer.header(header);
  for (Eigen::Index n = 0; n < dataset.size(); ++n) {
    for (Eigen::Index d = 0; d < dataset.dim(); ++d) writer.field(dataset.inputs(d, n));
    writer.field(dataset.labels[static_cast<std::size_t>(n)]);
    writer.end_row();
  }
}

Dataset load_dataset_csv(const std::string& path, int num_classes) {
  const std::vector<std::string> lines = csv::read_lines(path);
  if (lines.empty()) throw std::runtime_error(path + ": empty dataset file");
  const std::vector<std::string> header = csv::split(lines.front());
  if (header.size() < 2 || header.back() != "label") {
    throw std::runtime_error(path + ":1: expected x1..xD,label header");
  }
  const Eigen::Index dim = static_cast<Eigen::Index>(header.size()) - 1;
  check_coordinate_header(header, dim, path);
  Dataset out;
  out.num_classes = num_classes;
  out.inputs.resize(dim, static_cast<Eigen::Index>(lines.size()) - 1);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::vector<std::string> fields = csv::split(lines[i]);
    if (fields.size() != header.size()) {
      throw std::runtime_error(path + ":" + std::to_string(i + 1) + ": wrong field count");
    }
    try {
      for (Eigen::Index d = 0; d < dim; ++d) {
        out.inputs(d, static_cast<Eigen::Index>(i) - 1) =
            csv::parse_double(fields[static_cast<std::size_t>(d)]);
      }
      out.labels.push_back(static_cast<int>(csv::parse_int(fields.back())));
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error(path + ":" + std::to_string(i + 1) + ": " + e.what());
    }
  }
  out.validate();
  return out;
}

MeasurementSet measurement_from_dataset(const Dataset& dataset) {
  MeasurementSet out;
  out.points = dataset.inputs;
  out.provenance = "training";
  return out;
}

}  // namespace fvi::data
