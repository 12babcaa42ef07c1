#pragma once

// Checkpoint file: one JSON header line, then every parameter vector as flat
// little-endian IEEE-754 doubles in member order.
//
//   {"format":"fvi-checkpoint","version":1,"kind":"map","widths":[2,25,25,2],
//    "bias":true,"dropout":0.0,"members":1,"seed":7,"n_params":778}\n
//   <members * n_params doubles>

#include "fvi/models.hpp"

#include <string>

namespace fvi::checkpoint {

void save(const models::StochasticClassifier& model, const std::string& path);

/// Throws std::runtime_error on unreadable files, malformed headers, or a
/// payload whose length disagrees with the header.
models::StochasticClassifier load(const std::string& path);

}  // namespace fvi::checkpoint
