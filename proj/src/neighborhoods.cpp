#include "sirg/neighborhoods.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <deque>
#include <numeric>

#include "sirg/errors.hpp"
#include "sirg/parallel.hpp"

namespace sirg {

// ---------------------------------------------------------------------------
// RootedGraph

RootedGraph::RootedGraph(std::size_t n, std::size_t root) : rows_(n, 0), root_(root) {
  if (n == 0) throw ParameterError("rooted graph needs at least one vertex");
  if (n > kMaxVertices) throw ParameterError("rooted graph exceeds 64 vertices");
  if (root >= n) throw ParameterError("rooted graph root out of range");
}

RootedGraph RootedGraph::make_oversized(std::size_t actual_size) {
  RootedGraph g;
  g.oversized_ = true;
  g.actual_size_ = actual_size;
  return g;
}

void RootedGraph::add_edge(std::size_t u, std::size_t v) {
  if (u >= size() || v >= size()) throw ParameterError("rooted graph edge out of range");
  if (u == v) throw ParameterError("rooted graph self-loop");
  rows_[u] |= std::uint64_t{1} << v;
  rows_[v] |= std::uint64_t{1} << u;
}

std::size_t RootedGraph::degree(std::size_t v) const {
  return static_cast<std::size_t>(std::popcount(rows_[v]));
}

std::size_t RootedGraph::edge_count() const {
  std::size_t total = 0;
  for (auto r : rows_) total += static_cast<std::size_t>(std::popcount(r));
  return total / 2;
}

// ---------------------------------------------------------------------------
// Canonical codes: colour refinement plus individualization, with pruning by
// automorphisms discovered at equivalent leaves.

namespace {

using Colors = std::vector<int>;

int rank_keys(std::vector<std::vector<int>>& keys, Colors& color) {
  std::vector<std::vector<int>> sorted = keys;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  for (std::size_t v = 0; v < keys.size(); ++v)
    color[v] = static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), keys[v]) - sorted.begin());
  return static_cast<int>(sorted.size());
}

int refine(const RootedGraph& h, Colors& color, int classes) {
  const std::size_t n = h.size();
  std::vector<std::vector<int>> keys(n);
  while (true) {
    for (std::size_t v = 0; v < n; ++v) {
      auto& key = keys[v];
      key.clear();
      key.push_back(color[v]);
      for (std::uint64_t row = h.row(v); row; row &= row - 1)
        key.push_back(color[static_cast<std::size_t>(std::countr_zero(row))]);
      std::sort(key.begin() + 1, key.end());
    }
    const int next = rank_keys(keys, color);
    if (next == classes) return next;
    classes = next;
  }
}

std::vector<int> depths_from(const RootedGraph& h, std::size_t root) {
  std::vector<int> depth(h.size(), static_cast<int>(h.size()));
  std::deque<std::size_t> queue{root};
  depth[root] = 0;
  while (!queue.empty()) {
    const std::size_t v = queue.front();
    queue.pop_front();
    for (std::uint64_t row = h.row(v); row; row &= row - 1) {
      const auto u = static_cast<std::size_t>(std::countr_zero(row));
      if (depth[u] > depth[v] + 1) {
        depth[u] = depth[v] + 1;
        queue.push_back(u);
      }
    }
  }
  return depth;
}

std::vector<std::uint8_t> encode(const RootedGraph& h, const Colors& label) {
  const std::size_t n = h.size();
  std::vector<std::size_t> at(n);
  for (std::size_t v = 0; v < n; ++v) at[static_cast<std::size_t>(label[v])] = v;
  std::vector<std::uint8_t> out;
  out.reserve(1 + (n * (n - 1) / 2 + 7) / 8);
  out.push_back(static_cast<std::uint8_t>(n));
  std::uint8_t acc = 0;
  int bits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      acc = static_cast<std::uint8_t>((acc << 1) | (h.has_edge(at[i], at[j]) ? 1 : 0));
      if (++bits == 8) {
        out.push_back(acc);
        acc = 0;
        bits = 0;
      }
    }
  }
  if (bits > 0) out.push_back(static_cast<std::uint8_t>(acc << (8 - bits)));
  return out;
}

class CanonicalSearch {
 public:
  explicit CanonicalSearch(const RootedGraph& h) : h_(h), n_(h.size()) {}

  std::vector<std::uint8_t> run() {
    const auto depth = depths_from(h_, h_.root());
    std::vector<std::vector<int>> keys(n_);
    for (std::size_t v = 0; v < n_; ++v)
      keys[v] = {v == h_.root() ? 0 : 1, depth[v], static_cast<int>(h_.degree(v))};
    Colors color(n_);
    int classes = rank_keys(keys, color);
    classes = refine(h_, color, classes);
    std::vector<std::size_t> path;
    visit(color, classes, path);
    return best_;
  }

 private:
  static constexpr std::size_t kNoJump = static_cast<std::size_t>(-1);

  std::size_t visit(const Colors& color, int classes, std::vector<std::size_t>& path) {
    if (static_cast<std::size_t>(classes) == n_) return leaf(color, path);

    // First non-singleton cell.
    std::vector<int> size(static_cast<std::size_t>(classes), 0);
    for (int c : color) ++size[static_cast<std::size_t>(c)];
    int target = 0;
    while (size[static_cast<std::size_t>(target)] == 1) ++target;
    std::vector<std::size_t> cell;
    for (std::size_t v = 0; v < n_; ++v)
      if (color[v] == target) cell.push_back(v);

    std::vector<std::size_t> explored;
    for (std::size_t v : cell) {
      if (!explored.empty() && shares_orbit(v, explored, path)) continue;
      std::vector<std::vector<int>> keys(n_);
      for (std::size_t u = 0; u < n_; ++u) keys[u] = {color[u], u == v ? 0 : 1};
      Colors child(n_);
      int child_classes = rank_keys(keys, child);
      child_classes = refine(h_, child, child_classes);
      path.push_back(v);
      const std::size_t jump = visit(child, child_classes, path);
      path.pop_back();
      explored.push_back(v);
      if (jump != kNoJump && jump < path.size()) return jump;
    }
    return kNoJump;
  }

  std::size_t leaf(const Colors& label, const std::vector<std::size_t>& path) {
    auto code = encode(h_, label);
    if (first_code_.empty()) {
      first_code_ = code;
      first_path_ = path;
      first_at_.assign(n_, 0);
      for (std::size_t v = 0; v < n_; ++v) first_at_[static_cast<std::size_t>(label[v])] = v;
      best_ = std::move(code);
      return kNoJump;
    }
    if (code == first_code_) {
      // label maps this leaf onto the first one: an automorphism.
      std::vector<std::size_t> gamma(n_);
      for (std::size_t v = 0; v < n_; ++v) gamma[v] = first_at_[static_cast<std::size_t>(label[v])];
      generators_.push_back(std::move(gamma));
      std::size_t common = 0;
      while (common < path.size() && common < first_path_.size() && path[common] == first_path_[common])
        ++common;
      return common;
    }
    if (code < best_) best_ = std::move(code);
    return kNoJump;
  }

  bool shares_orbit(std::size_t v, const std::vector<std::size_t>& explored,
                    const std::vector<std::size_t>& path) const {
    std::vector<std::size_t> parent(n_);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    for (const auto& gamma : generators_) {
      const bool fixes = std::all_of(path.begin(), path.end(), [&](std::size_t p) { return gamma[p] == p; });
      if (!fixes) continue;
      for (std::size_t x = 0; x < n_; ++x) parent[find(x)] = find(gamma[x]);
    }
    const std::size_t rv = find(v);
    return std::any_of(explored.begin(), explored.end(), [&](std::size_t e) { return find(e) == rv; });
  }

  const RootedGraph& h_;
  std::size_t n_;
  std::vector<std::uint8_t> best_;
  std::vector<std::uint8_t> first_code_;
  std::vector<std::size_t> first_path_;
  std::vector<std::size_t> first_at_;
  std::vector<std::vector<std::size_t>> generators_;
};

}  // namespace

CanonicalCode CanonicalCode::oversized() { return CanonicalCode{{0xFF}}; }

bool CanonicalCode::is_oversized() const { return bytes.size() == 1 && bytes[0] == 0xFF; }

std::string CanonicalCode::hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xF]);
  }
  return out;
}

CanonicalCode CanonicalCode::from_hex(const std::string& text) {
  if (text.size() % 2 != 0) throw ParseError("canonical code: odd hex length");
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw ParseError("canonical code: bad hex digit");
  };
  CanonicalCode code;
  for (std::size_t i = 0; i < text.size(); i += 2)
    code.bytes.push_back(static_cast<std::uint8_t>(nibble(text[i]) * 16 + nibble(text[i + 1])));
  return code;
}

RootedGraph CanonicalCode::decode() const {
  if (bytes.empty() || is_oversized()) throw ParameterError("canonical code: nothing to decode");
  const std::size_t n = bytes[0];
  RootedGraph g(n, 0);
  std::size_t bit = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j, ++bit) {
      const std::size_t byte = 1 + bit / 8;
      if (byte >= bytes.size()) throw ParseError("canonical code: truncated");
      if ((bytes[byte] >> (7 - bit % 8)) & 1u) g.add_edge(i, j);
    }
  }
  return g;
}

CanonicalCode canonical_code(const RootedGraph& h) {
  if (h.oversized()) return CanonicalCode::oversized();
  if (h.size() == 0) throw ParameterError("canonical_code: empty graph");
  return CanonicalCode{CanonicalSearch(h).run()};
}

bool rooted_isomorphic(const RootedGraph& a, const RootedGraph& b) {
  if (a.oversized() || b.oversized()) throw ParameterError("rooted_isomorphic: ball exceeds the cap");
  if (a.size() != b.size() || a.edge_count() != b.edge_count()) return false;
  return canonical_code(a) == canonical_code(b);
}

// ---------------------------------------------------------------------------
// Balls

namespace {

/// Small sorted map from global vertex ids to local indices.
class LocalIndex {
 public:
  void insert(std::size_t global, std::size_t local) {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), std::pair{global, std::size_t{0}});
    entries_.insert(it, {global, local});
  }
  std::optional<std::size_t> find(std::size_t global) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), std::pair{global, std::size_t{0}});
    if (it == entries_.end() || it->first != global) return std::nullopt;
    return it->second;
  }

 private:
  std::vector<std::pair<std::size_t, std::size_t>> entries_;
};

/// BFS to depth k from root. Stops early once more than `cap` vertices are found.
template <class Neighbors>
std::vector<std::size_t> bfs_ball(std::size_t root, std::size_t k, std::size_t cap,
                                  Neighbors&& neighbors_of, LocalIndex& index) {
  std::vector<std::size_t> order{root};
  index.insert(root, 0);
  std::size_t level_begin = 0;
  for (std::size_t depth = 0; depth < k; ++depth) {
    const std::size_t level_end = order.size();
    for (std::size_t i = level_begin; i < level_end; ++i) {
      for (auto u : neighbors_of(order[i])) {
        if (index.find(u)) continue;
        index.insert(u, order.size());
        order.push_back(u);
        if (order.size() > cap) return order;
      }
    }
    if (order.size() == level_end) break;
    level_begin = level_end;
  }
  return order;
}

RootedGraph induced(const SpatialGraph& g, const std::vector<std::size_t>& order,
                    const LocalIndex& index) {
  RootedGraph h(order.size(), 0);
  for (std::size_t i = 0; i < order.size(); ++i)
    for (Vertex u : g.neighbors(order[i]))
      if (auto j = index.find(u); j && *j > i) h.add_edge(i, *j);
  return h;
}

}  // namespace

RootedGraph graph_ball(const SpatialGraph& g, std::size_t root, std::size_t k, std::size_t cap) {
  if (root >= g.size()) throw ParameterError("graph_ball: root out of range");
  cap = std::min(cap, RootedGraph::kMaxVertices);
  LocalIndex index;
  const auto order = bfs_ball(root, k, cap, [&](std::size_t v) { return g.neighbors(v); }, index);
  if (order.size() > cap) return RootedGraph::make_oversized(order.size());
  return induced(g, order, index);
}

RootedGraph graph_ball(const RootedGraph& g, std::size_t root, std::size_t k) {
  if (g.oversized()) return g;
  if (root >= g.size()) throw ParameterError("graph_ball: root out of range");
  auto neighbors_of = [&](std::size_t v) {
    std::vector<std::size_t> out;
    for (std::uint64_t row = g.row(v); row; row &= row - 1)
      out.push_back(static_cast<std::size_t>(std::countr_zero(row)));
    return out;
  };
  LocalIndex index;
  const auto order = bfs_ball(root, k, RootedGraph::kMaxVertices, neighbors_of, index);
  RootedGraph h(order.size(), 0);
  for (std::size_t i = 0; i < order.size(); ++i)
    for (std::size_t j = i + 1; j < order.size(); ++j)
      if (g.has_edge(order[i], order[j])) h.add_edge(i, j);
  return h;
}

RootedGraph graph_ball(const LimitBall& ball, std::size_t k, std::size_t cap) {
  cap = std::min(cap, RootedGraph::kMaxVertices);
  LocalIndex index;
  const auto order = bfs_ball(0, k, cap, [&](std::size_t v) { return ball.neighbors(v); }, index);
  if (order.size() > cap) return RootedGraph::make_oversized(order.size());
  RootedGraph h(order.size(), 0);
  for (std::size_t i = 0; i < order.size(); ++i)
    for (std::size_t j = i + 1; j < order.size(); ++j)
      if (ball.adjacent(order[i], order[j])) h.add_edge(i, j);
  return h;
}

RootedGraph euclidean_ball_subgraph(const SpatialGraph& g, std::size_t root, double r,
                                    std::size_t cap) {
  if (root >= g.size()) throw ParameterError("euclidean_ball_subgraph: root out of range");
  if (!g.has_locations()) throw ParameterError("euclidean_ball_subgraph: graph has no locations");
  if (r < 0) throw ParameterError("euclidean_ball_subgraph: radius must be >= 0");
  cap = std::min(cap, RootedGraph::kMaxVertices);
  const auto& pts = g.locations();
  std::vector<std::size_t> order{root};
  LocalIndex index;
  index.insert(root, 0);
  for (std::size_t v = 0; v < g.size(); ++v) {
    if (v == root || !(distance(pts.point(root), pts.point(v), g.meta().metric) < r)) continue;
    index.insert(v, order.size());
    order.push_back(v);
  }
  if (order.size() > cap) return RootedGraph::make_oversized(order.size());
  return induced(g, order, index);
}

const char* to_string(BallMode mode) { return mode == BallMode::kGraph ? "graph" : "euclidean"; }

// ---------------------------------------------------------------------------
// Histograms

void NeighborhoodHistogram::add(const CanonicalCode& code, std::uint64_t count) {
  if (count == 0) return;
  counts_[code] += count;
  total_ += count;
}

bool NeighborhoodHistogram::same_tags(const NeighborhoodHistogram& other) const {
  return mode_ == other.mode_ && k_ == other.k_ && radius_ == other.radius_;
}

void NeighborhoodHistogram::merge(const NeighborhoodHistogram& other) {
  if (!same_tags(other)) throw ValidationError("histogram merge: tags differ");
  for (const auto& [code, c] : other.counts_) add(code, c);
}

std::uint64_t NeighborhoodHistogram::count(const CanonicalCode& code) const {
  auto it = counts_.find(code);
  return it == counts_.end() ? 0 : it->second;
}

double NeighborhoodHistogram::proportion(const CanonicalCode& code) const {
  return total_ == 0 ? 0.0 : static_cast<double>(count(code)) / static_cast<double>(total_);
}

NeighborhoodHistogram empirical_neighborhood_distribution(const SpatialGraph& g,
                                                          const NeighborhoodQuery& query,
                                                          std::size_t sample, Rng* rng) {
  NeighborhoodHistogram hist(query.mode, query.mode == BallMode::kGraph ? query.k : 0,
                             query.mode == BallMode::kEuclidean ? query.radius : 0.0);
  auto ball = [&](std::size_t v) {
    return query.mode == BallMode::kGraph ? graph_ball(g, v, query.k, query.cap)
                                          : euclidean_ball_subgraph(g, v, query.radius, query.cap);
  };
  if (sample == 0) {
    for (std::size_t v = 0; v < g.size(); ++v) hist.add(canonical_code(ball(v)));
  } else {
    if (!rng) throw ParameterError("empirical_neighborhood_distribution: sampling needs an rng");
    if (g.size() == 0) throw ParameterError("empirical_neighborhood_distribution: empty graph");
    std::uniform_int_distribution<std::size_t> pick(0, g.size() - 1);
    for (std::size_t s = 0; s < sample; ++s) hist.add(canonical_code(ball(pick(*rng))));
  }
  return hist;
}

NeighborhoodHistogram limit_neighborhood_distribution(const KernelSpec& kernel, const WeightLaw& law,
                                                      std::size_t k, double radius,
                                                      std::size_t replicas, int dimension,
                                                      double mean_weight, std::uint64_t seed,
                                                      unsigned workers, std::size_t cap) {
  std::vector<CanonicalCode> codes(replicas);
  parallel_for(replicas, workers, [&](std::size_t rep) {
    const auto sub = derive_seed(seed, {static_cast<std::uint64_t>(Stream::kReplica), rep});
    const LimitBall ball(kernel, law, radius, dimension, mean_weight, sub);
    codes[rep] = canonical_code(graph_ball(ball, k, cap));
  });
  NeighborhoodHistogram hist(BallMode::kGraph, k);
  for (const auto& c : codes) hist.add(c);
  return hist;
}

// ---------------------------------------------------------------------------
// Coupling

double coupling_radius(double a, double m, std::size_t k) {
  if (!(a > 1) || !(m > 1) || k < 1) throw ParameterError("coupling_radius needs a > 1, m > 1, K >= 1");
  double sum = 0.0;
  double exponent = 1.0;
  for (std::size_t j = 1; j <= k; ++j) {
    exponent *= m;
    sum += std::pow(a, exponent);
    if (!std::isfinite(sum)) throw ParameterError("coupling_radius overflows; parameters too large");
  }
  return sum;
}

bool coupling_check_radius(const SpatialGraph& g, std::size_t root, double r, std::size_t k) {
  if (root >= g.size()) throw ParameterError("coupling_check: root out of range");
  if (!g.has_locations()) throw ParameterError("coupling_check: graph has no locations");
  const auto& pts = g.locations();
  const auto origin = pts.point(root);
  // The restricted ball is a subset of the full one and both are induced
  // subgraphs of g, so they are isomorphic exactly when they have equal size.
  auto ball_size = [&](bool restricted) {
    LocalIndex index;
    auto neighbors_of = [&](std::size_t v) {
      std::vector<std::size_t> out;
      for (Vertex u : g.neighbors(v))
        if (!restricted || distance(origin, pts.point(u), g.meta().metric) < r) out.push_back(u);
      return out;
    };
    return bfs_ball(root, k, static_cast<std::size_t>(-1), neighbors_of, index).size();
  };
  return ball_size(true) == ball_size(false);
}

bool coupling_check(const SpatialGraph& g, std::size_t root, double a, double m, std::size_t k) {
  return coupling_check_radius(g, root, coupling_radius(a, m, k), k);
}

}  // namespace sirg
