#pragma once

#include <cstdint>

namespace spancb {

// Counter-based generator: every value is a pure function of
// (seed, stream, index, draw).  There is no mutable state, so consumers
// cannot shift each other's values and any (seed, round) pair can be
// replayed in isolation.  The mixer is the splitmix64 finalizer applied
// to each word in turn.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t bits(std::uint64_t stream, std::uint64_t index,
                     std::uint64_t draw = 0) const;

  // Uniform on [0, 1) with 53 random bits.
  double uniform(std::uint64_t stream, std::uint64_t index,
                 std::uint64_t draw = 0) const;

  // Standard normal via Box-Muller; consumes draws `draw` and `draw + 1`.
  double gaussian(std::uint64_t stream, std::uint64_t index,
                  std::uint64_t draw = 0) const;

 private:
  std::uint64_t seed_;
};

// Stream ids.  Keep these stable: changing them changes every logged run.
namespace rng_stream {
inline constexpr std::uint64_t kActionSample = 1;
inline constexpr std::uint64_t kReward = 2;
inline constexpr std::uint64_t kContext = 3;
inline constexpr std::uint64_t kBootstrap = 4;
inline constexpr std::uint64_t kEnvGen = 5;
}  // namespace rng_stream

}  // namespace spancb
