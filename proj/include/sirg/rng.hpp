#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace sirg {

/// Random engine used for every stochastic operation in the library.
using Rng = std::mt19937_64;

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Well-known stream tags, so that locations, weights and edges of one graph
/// never share a substream.
enum class Stream : std::uint64_t {
  kLocations = 1,
  kWeights = 2,
  kEdges = 3,
  kReplica = 4,
  kRoots = 5,
  kLimit = 6,
  kOracle = 7,
  kGrid = 8,
  kPairs = 9,
};

/// Deterministically mixes a seed with a path of identifiers. Used to derive
/// independent substreams, e.g. (seed, replica k) or (seed, cell a, cell b).
constexpr std::uint64_t derive_seed(std::uint64_t seed,
                                    std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t h = detail::splitmix64(seed);
  for (std::uint64_t id : path) h = detail::splitmix64(h ^ detail::splitmix64(id));
  return h;
}

inline Rng make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> path = {}) {
  const std::uint64_t s = derive_seed(seed, path);
  std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32)};
  return Rng(seq);
}

inline Rng make_rng(std::uint64_t seed, Stream tag, std::uint64_t id = 0) {
  return make_rng(seed, {static_cast<std::uint64_t>(tag), id});
}

/// Counter-based uniform in [0,1) attached to the unordered pair {i, j}.
/// Every edge coin of the exact samplers is drawn from here, so the edge set
/// does not depend on iteration order or on the number of workers.
constexpr double pair_uniform(std::uint64_t edge_seed, std::uint64_t i, std::uint64_t j) noexcept {
  if (i > j) {
    const auto t = i;
    i = j;
    j = t;
  }
  std::uint64_t h = detail::splitmix64(edge_seed ^ detail::splitmix64(i));
  h = detail::splitmix64(h ^ (j * 0xD6E8FEB86659FD93ULL));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

}  // namespace sirg
