#include "spancb/rng.hpp"

#include <cmath>
#include <numbers>

namespace spancb {
namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t CounterRng::bits(std::uint64_t stream, std::uint64_t index,
                               std::uint64_t draw) const {
  std::uint64_t h = splitmix64(seed_);
  h = splitmix64(h ^ stream);
  h = splitmix64(h ^ index);
  h = splitmix64(h ^ draw);
  return h;
}

double CounterRng::uniform(std::uint64_t stream, std::uint64_t index,
                           std::uint64_t draw) const {
  return static_cast<double>(bits(stream, index, draw) >> 11) * 0x1.0p-53;
}

double CounterRng::gaussian(std::uint64_t stream, std::uint64_t index,
                            std::uint64_t draw) const {
  double u1 = uniform(stream, index, draw);
  double u2 = uniform(stream, index, draw + 1);
  if (u1 < 0x1.0p-53) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace spancb
