#include "floodbed/common.hpp"

#include <cmath>

namespace floodbed {

SimTime from_seconds(double s) { return SimTime{std::llround(s * 1e6)}; }

// splitmix64 finalizer
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Rng Rng::fork(std::uint64_t salt) { return Rng(mix_seed(engine_(), salt)); }

}  // namespace floodbed
