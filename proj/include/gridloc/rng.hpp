#pragma once

#include <cstdint>
#include <random>

namespace gridloc {

// Stage indices for derive_seed(master, index). Each pipeline stage owns an
// independent stream so stages can be re-run in isolation and still
// reproduce byte-identical artifacts.
namespace seed_stage {
inline constexpr std::uint64_t kData = 0;
inline constexpr std::uint64_t kNetInit = 1;
inline constexpr std::uint64_t kTraining = 2;
inline constexpr std::uint64_t kEval = 3;
inline constexpr std::uint64_t kFingerprint = 4;
}  // namespace seed_stage

// Counter-based SplitMix64 derivation: derive_seed(master, i) is the i-th
// output of the SplitMix64 stream seeded with `master`.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

// Deterministic random stream. The engine is std::mt19937_64, whose output
// sequence is fixed by the standard; all value mappings (uniform, bounded
// int, Gaussian) are implemented here because the std::*_distribution
// classes are implementation-defined and would break cross-toolchain
// reproducibility.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform integer in [0, bound). bound must be >= 1.
  std::uint64_t below(std::uint64_t bound);

  // Uniform double in [0, 1) with 53-bit resolution.
  double uniform01();

  double uniform(double lo, double hi);

  // Gaussian via Box-Muller; consumes exactly two uniform draws per call.
  double normal(double mean, double stddev);

 private:
  std::mt19937_64 engine_;
};

}  // namespace gridloc
