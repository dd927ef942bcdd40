#include "freqcache/rng.hpp"

namespace freqcache {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Engine make_stream(std::uint64_t base_seed, std::uint64_t trial, Stream purpose) {
  const std::uint64_t a = splitmix64(base_seed);
  const std::uint64_t b = splitmix64(a ^ splitmix64(trial + 0x51ed270b27f1c3a5ULL));
  const std::uint64_t c = splitmix64(b ^ static_cast<std::uint64_t>(purpose));
  std::seed_seq seq{static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return Engine(seq);
}

}  // namespace freqcache
