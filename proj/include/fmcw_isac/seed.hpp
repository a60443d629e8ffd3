#pragma once

#include <cstdint>
#include <random>

namespace fmcw_isac {

// Identifies which runner a stream belongs to; part of the seed derivation,
// so the numeric values are frozen.
enum class ExperimentId : std::uint64_t {
  Ber = 1,
  Spectrum = 2,
  Dispersion = 3,
  KlSweep = 4,
  IsnrSurface = 5,
  ChirpDemo = 6,
  Adhoc = 7,
};

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Stream seed for one (grid point, trial) of an experiment. Chained splitmix64
// over the four coordinates; do not change, outputs depend on it.
inline constexpr std::uint64_t derive_seed(std::uint64_t master, ExperimentId experiment,
                                           std::uint64_t grid_index,
                                           std::uint64_t trial_index) noexcept {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ static_cast<std::uint64_t>(experiment));
  h = splitmix64(h ^ grid_index);
  h = splitmix64(h ^ trial_index);
  return h;
}

using Rng = std::mt19937_64;

}  // namespace fmcw_isac
