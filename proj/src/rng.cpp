#include "gridloc/rng.hpp"

#include <cassert>
#include <cmath>
#include <limits>
#include <numbers>

namespace gridloc {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  // SplitMix64: state advances by the golden-ratio increment, output is the
  // mixed state. Writing it closed-form keeps derivation O(1) in the index.
  std::uint64_t z = master + (index + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t Rng::below(std::uint64_t bound) {
  assert(bound >= 1);
  // Rejection sampling keeps the result exactly uniform.
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() -
      std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % bound;
}

double Rng::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform01();
}

double Rng::normal(double mean, double stddev) {
  // 1 - u keeps the log argument in (0, 1].
  const double u = uniform01();
  const double v = uniform01();
  const double radius = std::sqrt(-2.0 * std::log(1.0 - u));
  return mean + stddev * radius * std::cos(2.0 * std::numbers::pi * v);
}

}  // namespace gridloc
