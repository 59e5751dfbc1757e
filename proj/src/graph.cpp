#include "sirg/graph.hpp"

#include <algorithm>

#include "sirg/errors.hpp"

namespace sirg {

SpatialGraph::SpatialGraph(std::size_t n, std::span<const Edge> edges) { build(n, edges); }

SpatialGraph::SpatialGraph(PointCloud locations, WeightVector weights, std::span<const Edge> edges,
                           GraphMeta meta)
    : locations_(std::move(locations)), weights_(std::move(weights)), meta_(std::move(meta)) {
  const std::size_t n = weights_.size() > 0 ? weights_.size() : locations_.size();
  if (!locations_.coords.empty() && locations_.size() != n)
    throw ValidationError("graph: location count does not match weight count");
  if (locations_.dimension > 0 && locations_.coords.size() % locations_.dimension != 0)
    throw ValidationError("graph: coordinate array is not a multiple of the dimension");
  if (meta_.root && *meta_.root >= n) throw ValidationError("graph: root index out of range");
  build(n, edges);
}

void SpatialGraph::build(std::size_t n, std::span<const Edge> edges) {
  if (n > std::size_t{0xFFFFFFFFu}) throw ParameterError("graph: too many vertices");
  std::vector<std::size_t> degree(n + 1, 0);
  for (auto [u, v] : edges) {
    if (u >= n || v >= n) throw ValidationError("graph: edge endpoint out of range");
    if (u == v) throw ValidationError("graph: self-loop");
    ++degree[u];
    ++degree[v];
  }
  offsets_.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) offsets_[i + 1] = offsets_[i] + degree[i];
  targets_.assign(offsets_[n], 0);
  std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (auto [u, v] : edges) {
    targets_[fill[u]++] = v;
    targets_[fill[v]++] = u;
  }
  // Sort and drop duplicates, then compact.
  std::size_t out = 0;
  std::vector<std::size_t> compact(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    auto first = targets_.begin() + static_cast<std::ptrdiff_t>(offsets_[i]);
    auto last = targets_.begin() + static_cast<std::ptrdiff_t>(offsets_[i + 1]);
    std::sort(first, last);
    last = std::unique(first, last);
    compact[i] = out;
    for (auto it = first; it != last; ++it) targets_[out++] = *it;
  }
  compact[n] = out;
  targets_.resize(out);
  offsets_ = std::move(compact);
}

bool SpatialGraph::has_edge(std::size_t u, std::size_t v) const {
  const auto nb = neighbors(u);
  return std::binary_search(nb.begin(), nb.end(), static_cast<Vertex>(v));
}

std::vector<Edge> SpatialGraph::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count());
  for (std::size_t u = 0; u < size(); ++u)
    for (Vertex v : neighbors(u))
      if (u < v) out.emplace_back(static_cast<Vertex>(u), v);
  return out;
}

void SpatialGraph::set_hyperbolic(HyperbolicCoords coords) {
  if (coords.radius.size() != size() || coords.angle.size() != size())
    throw ValidationError("graph: hyperbolic coordinate count does not match vertex count");
  hyperbolic_ = std::move(coords);
}

}  // namespace sirg
