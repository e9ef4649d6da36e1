#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace sdcs {

/// Named independent streams derived from one experiment seed.
enum class Stream : std::uint64_t {
  support = 1,
  oscillators = 2,
  noise = 3,
  data = 4,
  pattern = 5,
  coefficients = 6,
};

std::uint64_t splitmix64(std::uint64_t x);

/// Deterministic seed for (base seed, stream, index) triples.
std::uint64_t derive_seed(std::uint64_t seed, Stream stream, std::uint64_t index = 0);

inline std::mt19937_64 make_rng(std::uint64_t seed, Stream stream, std::uint64_t index = 0) {
  return std::mt19937_64(derive_seed(seed, stream, index));
}

}  // namespace sdcs
