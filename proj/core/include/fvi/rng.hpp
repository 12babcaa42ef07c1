#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace fvi::rng {

/// Engine used for all seeded draws. Its output sequence is fixed by the
/// standard, unlike the std distributions, so conversions below are our own.
using Engine = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t& state);

/// Hashes a seed together with an ordered list of stream coordinates.
std::uint64_t derive(std::uint64_t seed, std::initializer_list<std::uint64_t> coords);

/// Uniform double in [0, 1) from the top 53 bits.
inline double to_unit(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

double uniform(Engine& engine);
double uniform(Engine& engine, double lo, double hi);
/// Standard normal via Box-Muller (one draw per call, the sine branch is discarded).
double normal(Engine& engine);
/// Uniform integer in [0, n) by rejection, n > 0.
std::uint64_t below(Engine& engine, std::uint64_t n);

/// Counter-based stream: cheap, stateless to construct, keyed by coordinates.
class CounterStream {
 public:
  CounterStream(std::uint64_t seed, std::initializer_list<std::uint64_t> coords)
      : state_(derive(seed, coords)) {}

  std::uint64_t next() { return splitmix64(state_); }
  double uniform() { return to_unit(next()); }

 private:
  std::uint64_t state_;
};

}  // namespace fvi::rng
