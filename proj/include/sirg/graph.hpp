#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sirg/geometry.hpp"
#include "sirg/weights.hpp"

namespace sirg {

using Vertex = std::uint32_t;
using Edge = std::pair<Vertex, Vertex>;

/// Native hyperbolic coordinates of an HRG sample.
struct HyperbolicCoords {
  std::vector<double> radius;
  std::vector<double> angle;
  double disk_radius = 0.0;
  friend bool operator==(const HyperbolicCoords&, const HyperbolicCoords&) = default;
};

struct GraphMeta {
  std::string kernel_id;
  std::uint64_t seed = 0;
  Metric metric = Euclidean{};
  std::string mode = "exact";
  std::optional<Vertex> root;
};

/// Undirected simple graph in CSR form with optional locations and weights.
class SpatialGraph {
 public:
  SpatialGraph() = default;

  /// Abstract graph without spatial data. Edges may be given in any order and
  /// orientation; duplicates collapse. Self-loops and out-of-range indices throw.
  SpatialGraph(std::size_t n, std::span<const Edge> edges);

  SpatialGraph(PointCloud locations, WeightVector weights, std::span<const Edge> edges,
               GraphMeta meta = {});

  std::size_t size() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t edge_count() const { return targets_.size() / 2; }

  std::span<const Vertex> neighbors(std::size_t v) const {
    return {targets_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
  }
  std::size_t degree(std::size_t v) const { return offsets_[v + 1] - offsets_[v]; }
  bool has_edge(std::size_t u, std::size_t v) const;

  /// All edges as (i, j) with i < j, sorted.
  std::vector<Edge> edges() const;

  bool has_locations() const { return !locations_.coords.empty(); }
  const PointCloud& locations() const { return locations_; }
  const WeightVector& weights() const { return weights_; }
  const GraphMeta& meta() const { return meta_; }
  GraphMeta& meta() { return meta_; }

  const std::optional<HyperbolicCoords>& hyperbolic() const { return hyperbolic_; }
  void set_hyperbolic(HyperbolicCoords coords);

 private:
  void build(std::size_t n, std::span<const Edge> edges);

  std::vector<std::size_t> offsets_;
  std::vector<Vertex> targets_;
  PointCloud locations_;
  WeightVector weights_;
  GraphMeta meta_;
  std::optional<HyperbolicCoords> hyperbolic_;
};

}  // namespace sirg
