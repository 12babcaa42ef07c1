#include "fvi/rng.hpp"

#include <cmath>
#include <numbers>

namespace fvi::rng {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t derive(std::uint64_t seed, std::initializer_list<std::uint64_t> coords) {
  std::uint64_t state = seed;
  std::uint64_t h = splitmix64(state);
  for (std::uint64_t c : coords) {
    state = h ^ (c + 0x632BE59BD9B4E019ULL);
    h = splitmix64(state);
  }
  return h;
}

double uniform(Engine& engine) { return to_unit(engine()); }

double uniform(Engine& engine, double lo, double hi) { return lo + (hi - lo) * uniform(engine); }

double normal(Engine& engine) {
  double u1 = uniform(engine);
  while (u1 <= 0.0) u1 = uniform(engine);
  const double u2 = uniform(engine);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t below(Engine& engine, std::uint64_t n) {
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x = engine();
  while (x >= limit) x = engine();
  return x % n;
}

}  // namespace fvi::rng
