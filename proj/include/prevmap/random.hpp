#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace prevmap {

using Rng = std::mt19937_64;

/// Uniform on [0,1) from the top 53 bits; identical on every platform.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// SplitMix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Independent stream keyed by a master seed and a path of indices, e.g.
/// (seed, {scenario, method, replication}).
inline Rng stream_rng(std::uint64_t master_seed, std::initializer_list<std::uint64_t> path) {
  std::uint64_t key = mix64(master_seed);
  for (std::uint64_t p : path) key = mix64(key ^ mix64(p + 0x632be59bd9b4e019ULL));
  std::seed_seq seq{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32),
                    static_cast<std::uint32_t>(master_seed),
                    static_cast<std::uint32_t>(master_seed >> 32)};
  return Rng(seq);
}

}  // namespace prevmap

namespace prevmap {

/// 64-bit seed for a sub-study keyed by a path of indices.
inline std::uint64_t derive_seed(std::uint64_t master_seed, std::initializer_list<std::uint64_t> path) {
  std::uint64_t key = mix64(master_seed ^ 0xa0761d6478bd642fULL);
  for (std::uint64_t p : path) key = mix64(key ^ mix64(p));
  return key;
}

}  // namespace prevmap
