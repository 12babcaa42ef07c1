#include "fvi/checkpoint.hpp"

#include <json.hpp>

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace fvi::checkpoint {
namespace {

constexpr const char* kFormat = "fvi-checkpoint";
constexpr int kVersion = 1;

void put_le(std::ostream& out, double value) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(value);
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(bits >> (8 * i));
  out.write(reinterpret_cast<const char*>(bytes), 8);
}

double get_le(const unsigned char* bytes) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= std::uint64_t{bytes[i]} << (8 * i);
  return std::bit_cast<double>(bits);
}

}  // namespace

void save(const models::StochasticClassifier& model, const std::string& path) {
  nlohmann::ordered_json header;
  header["format"] = kFormat;
  header["version"] = kVersion;
  header["kind"] = models::to_string(model.kind());
  header["widths"] = model.spec().widths;
  header["bias"] = model.spec().bias;
  header["dropout"] = model.dropout_rate();
  header["members"] = model.members();
  header["seed"] = model.seed();
  header["n_params"] = model.spec().num_params();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path);
  out << header.dump() << '\n';
  for (const net::WeightVector& w : model.params()) {
    for (double v : w) put_le(out, v);
  }
  if (!out) throw std::runtime_error("failed writing checkpoint " + path);
}

models::StochasticClassifier load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": missing checkpoint header");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path + ": malformed checkpoint header: " + e.what());
  }
  try {
    if (header.at("format").get<std::string>() != kFormat || header.at("version").get<int>() != kVersion) {
      throw std::runtime_error(path + ": unsupported checkpoint format");
    }
    net::MlpSpec spec;
    spec.widths = header.at("widths").get<std::vector<int>>();
    spec.bias = header.at("bias").get<bool>();
    spec.validate();
    const auto kind = models::parse_model_kind(header.at("kind").get<std::string>());
    const int members = header.at("members").get<int>();
    const auto n_params = header.at("n_params").get<Eigen::Index>();
    if (members < 1 || n_params != spec.num_params()) {
      throw std::runtime_error(path + ": header disagrees with the network layout");
    }

    const std::string payload((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const std::size_t expected = static_cast<std::size_t>(members) * static_cast<std::size_t>(n_params) * 8;
    if (payload.size() != expected) {
      throw std::runtime_error(path + ": payload has " + std::to_string(payload.size()) +
                               " bytes, expected " + std::to_string(expected));
    }
    const auto* bytes = reinterpret_cast<const unsigned char*>(payload.data());
    std::vector<net::WeightVector> params(static_cast<std::size_t>(members), net::WeightVector(n_params));
    for (int j = 0; j < members; ++j) {
      for (Eigen::Index i = 0; i < n_params; ++i) {
        params[static_cast<std::size_t>(j)][i] = get_le(bytes);
        bytes += 8;
      }
    }
    return models::StochasticClassifier(kind, spec, header.at("dropout").get<double>(),
                                        header.at("seed").get<std::uint64_t>(), std::move(params));
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path + ": bad checkpoint header field: " + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

}  // namespace fvi::checkpoint
