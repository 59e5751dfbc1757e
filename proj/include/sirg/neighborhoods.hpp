#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sirg/generator.hpp"
#include "sirg/graph.hpp"
#include "sirg/kernels.hpp"
#include "sirg/rng.hpp"
#include "sirg/weights.hpp"

namespace sirg {

inline constexpr std::size_t kDefaultBallCap = 64;

/// Small rooted graph with bitset adjacency rows (at most 64 vertices).
/// `oversized` marks a ball that exceeded its cap; it then has no adjacency.
class RootedGraph {
 public:
  static constexpr std::size_t kMaxVertices = 64;

  RootedGraph() = default;
  explicit RootedGraph(std::size_t n, std::size_t root = 0);
  static RootedGraph make_oversized(std::size_t actual_size);

  std::size_t size() const { return rows_.size(); }
  std::size_t root() const { return root_; }
  bool oversized() const { return oversized_; }
  /// Vertices reached before giving up: cap + 1 for graph balls, the full count
  /// for euclidean ones.
  std::size_t actual_size() const { return oversized_ ? actual_size_ : size(); }

  void add_edge(std::size_t u, std::size_t v);
  bool has_edge(std::size_t u, std::size_t v) const { return (rows_[u] >> v) & 1u; }
  std::uint64_t row(std::size_t v) const { return rows_[v]; }
  std::size_t degree(std::size_t v) const;
  std::size_t edge_count() const;

 private:
  std::vector<std::uint64_t> rows_;
  std::size_t root_ = 0;
  bool oversized_ = false;
  std::size_t actual_size_ = 0;
};

/// Canonical form of a rooted graph: the vertex count followed by the packed
/// upper triangle of the adjacency matrix under the canonical relabeling.
/// Equal codes exactly when the rooted graphs are isomorphic.
struct CanonicalCode {
  std::vector<std::uint8_t> bytes;

  static CanonicalCode oversized();
  bool is_oversized() const;
  std::string hex() const;
  static CanonicalCode from_hex(const std::string& text);
  /// Decodes back into a rooted graph (root 0). Throws for the oversized code.
  RootedGraph decode() const;

  friend auto operator<=>(const CanonicalCode&, const CanonicalCode&) = default;
  friend bool operator==(const CanonicalCode&, const CanonicalCode&) = default;
};

CanonicalCode canonical_code(const RootedGraph& h);
bool rooted_isomorphic(const RootedGraph& a, const RootedGraph& b);

/// Induced subgraph on the vertices within graph distance K of root, root
/// relabeled 0, others in BFS order.
RootedGraph graph_ball(const SpatialGraph& g, std::size_t root, std::size_t k,
                       std::size_t cap = kDefaultBallCap);
RootedGraph graph_ball(const RootedGraph& g, std::size_t root, std::size_t k);
RootedGraph graph_ball(const LimitBall& ball, std::size_t k, std::size_t cap = kDefaultBallCap);

/// Induced subgraph on the vertices at spatial distance < r from the root
/// (open ball, graph metric), root relabeled 0. May be disconnected.
RootedGraph euclidean_ball_subgraph(const SpatialGraph& g, std::size_t root, double r,
                                    std::size_t cap = kDefaultBallCap);

enum class BallMode { kGraph, kEuclidean };
const char* to_string(BallMode mode);

/// Histogram over canonical codes, tagged with the ball kind and size.
class NeighborhoodHistogram {
 public:
  NeighborhoodHistogram() = default;
  NeighborhoodHistogram(BallMode mode, std::size_t k, double radius = 0.0)
      : mode_(mode), k_(k), radius_(radius) {}

  void add(const CanonicalCode& code, std::uint64_t count = 1);
  void merge(const NeighborhoodHistogram& other);

  BallMode mode() const { return mode_; }
  std::size_t k() const { return k_; }
  double radius() const { return radius_; }
  std::uint64_t total() const { return total_; }
  const std::map<CanonicalCode, std::uint64_t>& counts() const { return counts_; }
  std::uint64_t count(const CanonicalCode& code) const;
  double proportion(const CanonicalCode& code) const;
  bool same_tags(const NeighborhoodHistogram& other) const;

  friend bool operator==(const NeighborhoodHistogram&, const NeighborhoodHistogram&) = default;

 private:
  BallMode mode_ = BallMode::kGraph;
  std::size_t k_ = 0;
  double radius_ = 0.0;
  std::map<CanonicalCode, std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

struct NeighborhoodQuery {
  BallMode mode = BallMode::kGraph;
  std::size_t k = 1;      // graph radius (graph mode)
  double radius = 0.0;    // spatial radius (euclidean mode)
  std::size_t cap = kDefaultBallCap;
};

/// Histogram over every vertex (sample = 0) or `sample` uniform vertices.
NeighborhoodHistogram empirical_neighborhood_distribution(const SpatialGraph& g,
                                                          const NeighborhoodQuery& query,
                                                          std::size_t sample = 0, Rng* rng = nullptr);

/// Monte Carlo law of the K-ball around the root of the limit graph restricted
/// to the ball of `radius`. Replica k uses the substream (seed, k).
NeighborhoodHistogram limit_neighborhood_distribution(const KernelSpec& kernel, const WeightLaw& law,
                                                      std::size_t k, double radius,
                                                      std::size_t replicas, int dimension,
                                                      double mean_weight, std::uint64_t seed,
                                                      unsigned workers = 1,
                                                      std::size_t cap = kDefaultBallCap);

/// a^m + a^{m^2} + ... + a^{m^K}. Throws ParameterError on overflow.
double coupling_radius(double a, double m, std::size_t k);

/// True iff the K-ball of the root inside its spatial ball of radius
/// coupling_radius(a, m, K) equals its K-ball in the whole graph.
bool coupling_check(const SpatialGraph& g, std::size_t root, double a, double m, std::size_t k);
bool coupling_check_radius(const SpatialGraph& g, std::size_t root, double r, std::size_t k);

}  // namespace sirg
