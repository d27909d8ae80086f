#pragma once

#include <cstdint>
#include <random>

namespace eqbandit {

using Rng = std::mt19937_64;

/// Named sub-streams of one realization. Each gets an independent engine.
enum class Stream : std::uint32_t {
  kNoise = 1,
  kPolicy = 2,
  kInitialState = 3,
  kConstruction = 4,
};

/// Engine for child `child` of `master`, sub-stream `stream`. Depends only on
/// the triple, never on the order in which realizations are executed.
inline Rng make_rng(std::uint64_t master, std::uint64_t child, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(master & 0xffffffffu),
                    static_cast<std::uint32_t>(master >> 32),
                    static_cast<std::uint32_t>(child & 0xffffffffu),
                    static_cast<std::uint32_t>(child >> 32),
                    static_cast<std::uint32_t>(stream)};
  return Rng(seq);
}

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace eqbandit
