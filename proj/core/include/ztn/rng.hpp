#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace ztn {

// All subsystems draw from their own mt19937_64 stream so that the draw
// pattern of one subsystem never shifts another's sequence.  Distribution
// sampling is hand-rolled on top of the raw 64-bit output because the
// standard library's distribution implementations are not pinned by the
// standard.

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Stream seed = mix of the master seed and a stable subsystem tag.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag) {
  return splitmix64(master ^ fnv1a64(tag));
}

inline Rng make_stream(std::uint64_t master, std::string_view tag) {
  return Rng(derive_seed(master, tag));
}

// Uniform double in [0, 1) with 53 significant bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

// Uniform integer in [0, n).
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  // Modulo bias is < 2^-40 for every n used here (n <= a few thousand).
  return rng() % n;
}

// Single standard gaussian via Box-Muller; stateless so that stream state
// is exactly the mt19937_64 state (checkpointable).
inline double gaussian(Rng& rng) {
  double u1 = uniform01(rng);
  double u2 = uniform01(rng);
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

// Exponential with given rate (mean 1/rate).
inline double exponential(Rng& rng, double rate) {
  double u = uniform01(rng);
  if (u <= 0.0) u = 0x1.0p-53;
  return -std::log(u) / rate;
}

}  // namespace ztn
