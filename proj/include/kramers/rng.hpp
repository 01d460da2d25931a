#pragma once

#include <cstdint>
#include <random>

namespace kramers {

// splitmix64: cheap, well-mixed 64-bit stream used to seed per-trajectory
// generators. Mixing (seed, index) this way gives every trajectory its own
// reproducible stream regardless of how work is split across threads.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::mt19937_64 stream_for(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t s = splitmix64(seed ^ splitmix64(index));
  return std::mt19937_64(s);
}

} // namespace kramers
