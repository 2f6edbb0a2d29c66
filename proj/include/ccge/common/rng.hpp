#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace ccge {

// Every run owns one 64-bit Mersenne Twister per consumer. Streams are
// derived from (seed, stream id) through std::seed_seq, so adding a new
// consumer never shifts the draws seen by existing ones.
using Rng = std::mt19937_64;

inline constexpr std::string_view kRngAlgorithm = "mt19937_64/seed_seq(seed_lo,seed_hi,stream)";

enum class Stream : std::uint32_t {
  kEnv = 1,
  kActor = 2,
  kBuffer = 3,
  kBootstrap = 4,
  kInit = 5,
  kEval = 6,
  kWarmup = 7,
  kRollIn = 8,
  kExplore = 9,
  kUpdate = 10,
  kReservoir = 11,
};

inline Rng make_rng(std::uint64_t seed, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return Rng(seq);
}

inline Rng make_rng(std::uint64_t seed, std::uint32_t stream) {
  return make_rng(seed, static_cast<Stream>(stream));
}

}  // namespace ccge
