#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace wicm {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed for the substream addressed by `path` under `master`. Each path gives
/// an independent-looking stream regardless of which other paths are drawn.
constexpr std::uint64_t substream_seed(std::uint64_t master,
                                       std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t state = splitmix64(master);
  for (std::uint64_t step : path) state = splitmix64(state ^ splitmix64(step + 0x632BE59BD9B4E019ULL));
  return state;
}

using Rng = std::mt19937_64;

inline Rng make_stream(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  return Rng(substream_seed(master, path));
}

}  // namespace wicm
