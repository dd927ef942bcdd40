#pragma once

#include <cstdint>
#include <random>

namespace freqcache {

/// Independent random streams, one per purpose, so that changing how one
/// stage consumes randomness never shifts the draws of another stage.
enum class Stream : std::uint64_t {
  BsPositions = 1,
  Grouping = 2,
  UserPositions = 3,
  Requests = 4,
  Fading = 5,
  Scheduling = 6,
  RandomCaches = 7,
};

using Engine = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

/// Engine for (base seed, trial, purpose).
Engine make_stream(std::uint64_t base_seed, std::uint64_t trial, Stream purpose);

}  // namespace freqcache
