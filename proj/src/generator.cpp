#include "sirg/generator.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numbers>

#include "sirg/errors.hpp"
#include "sirg/parallel.hpp"

namespace sirg {

namespace {

constexpr std::size_t kRowBlock = 64;

std::uint64_t edge_seed_of(std::uint64_t seed) {
  return derive_seed(seed, {static_cast<std::uint64_t>(Stream::kEdges)});
}

std::vector<Edge> concat(std::vector<std::vector<Edge>>& parts) {
  std::size_t total = 0;
  for (const auto& p : parts) total += p.size();
  std::vector<Edge> out;
  out.reserve(total);
  for (auto& p : parts) {
    out.insert(out.end(), p.begin(), p.end());
    std::vector<Edge>().swap(p);
  }
  return out;
}

std::vector<Edge> exact_edges(const PointCloud& points, const WeightVector& weights,
                              const KernelSpec& kernel, const Metric& metric,
                              std::uint64_t edge_seed, unsigned workers) {
  const std::size_t n = points.size();
  const double total = weights.total();
  const std::size_t blocks = (n + kRowBlock - 1) / kRowBlock;
  std::vector<std::vector<Edge>> parts(blocks);
  parallel_for(blocks, workers, [&](std::size_t b) {
    auto& out = parts[b];
    const std::size_t end = std::min(n, (b + 1) * kRowBlock);
    for (std::size_t i = b * kRowBlock; i < end; ++i) {
      const auto pi = points.point(i);
      for (std::size_t j = i + 1; j < n; ++j) {
        const double t = distance(pi, points.point(j), metric);
        const double p = eval_finite(kernel, n, t, weights[i], weights[j], total);
        if (p > 0 && pair_uniform(edge_seed, i, j) < p)
          out.emplace_back(static_cast<Vertex>(i), static_cast<Vertex>(j));
      }
    }
  });
  return concat(parts);
}

struct Grid {
  int dimension = 1;
  std::size_t per_dim = 1;
  double cell_side = 1.0;
  bool torus = false;
  std::vector<std::size_t> start;  // CSR over cells
  std::vector<Vertex> members;
  std::vector<WeightRange> range;

  std::size_t cells() const { return start.size() - 1; }

  double gap(std::size_t a, std::size_t b) const {
    double sum = 0.0;
    for (int k = 0; k < dimension; ++k) {
      const auto ia = static_cast<long long>(a % per_dim);
      const auto ib = static_cast<long long>(b % per_dim);
      a /= per_dim;
      b /= per_dim;
      long long delta = std::llabs(ia - ib);
      if (torus) delta = std::min<long long>(delta, static_cast<long long>(per_dim) - delta);
      const double g = static_cast<double>(std::max<long long>(0, delta - 1)) * cell_side;
      sum += g * g;
    }
    return std::sqrt(sum);
  }
};

Grid build_grid(const PointCloud& points, const WeightVector& weights, const Metric& metric) {
  const std::size_t n = points.size();
  const int d = points.dimension;
  Grid grid;
  grid.dimension = d;
  std::vector<double> lo(d), extent(d);
  if (const auto* torus = std::get_if<Torus>(&metric)) {
    grid.torus = true;
    std::fill(lo.begin(), lo.end(), -torus->side / 2);
    std::fill(extent.begin(), extent.end(), torus->side);
  } else {
    for (int k = 0; k < d; ++k) {
      double mn = points.coords[k], mx = points.coords[k];
      for (std::size_t i = 0; i < n; ++i) {
        mn = std::min(mn, points.coords[i * d + k]);
        mx = std::max(mx, points.coords[i * d + k]);
      }
      lo[k] = mn;
      extent[k] = mx - mn;
    }
  }
  const double min_extent = *std::min_element(extent.begin(), extent.end());
  // About sqrt(n) cells overall, each of side >= 1.
  const double target = std::round(std::pow(static_cast<double>(n), 1.0 / (2.0 * d)));
  grid.per_dim = static_cast<std::size_t>(std::max(1.0, std::min(std::floor(min_extent), target)));
  // Cells may be boxes; the gap bound uses the narrowest side.
  grid.cell_side = min_extent / static_cast<double>(grid.per_dim);

  std::size_t cells = 1;
  for (int k = 0; k < d; ++k) cells *= grid.per_dim;
  std::vector<std::size_t> cell_of(n);
  std::vector<std::size_t> count(cells + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t flat = 0, stride = 1;
    for (int k = 0; k < d; ++k) {
      double x = points.coords[i * d + k] - lo[k];
      if (grid.torus) x -= extent[k] * std::floor(x / extent[k]);
      const double width = extent[k] > 0 ? extent[k] / static_cast<double>(grid.per_dim) : 1.0;
      auto idx = static_cast<long long>(std::floor(x / width));
      idx = std::clamp<long long>(idx, 0, static_cast<long long>(grid.per_dim) - 1);
      flat += static_cast<std::size_t>(idx) * stride;
      stride *= grid.per_dim;
    }
    cell_of[i] = flat;
    ++count[flat + 1];
  }
  for (std::size_t c = 0; c < cells; ++c) count[c + 1] += count[c];
  grid.start = count;
  grid.members.resize(n);
  std::vector<std::size_t> fill(count.begin(), count.end() - 1);
  for (std::size_t i = 0; i < n; ++i) grid.members[fill[cell_of[i]]++] = static_cast<Vertex>(i);
  grid.range.assign(cells, WeightRange{});
  for (std::size_t c = 0; c < cells; ++c) {
    if (grid.start[c] == grid.start[c + 1]) continue;
    WeightRange r{weights[grid.members[grid.start[c]]], weights[grid.members[grid.start[c]]]};
    for (std::size_t k = grid.start[c]; k < grid.start[c + 1]; ++k) {
      r.lo = std::min(r.lo, weights[grid.members[k]]);
      r.hi = std::max(r.hi, weights[grid.members[k]]);
    }
    grid.range[c] = r;
  }
  return grid;
}

std::vector<Edge> grid_edges(const PointCloud& points, const WeightVector& weights,
                             const KernelSpec& kernel, const Metric& metric, const Grid& grid,
                             std::uint64_t seed, unsigned workers) {
  const std::size_t n = points.size();
  const double total = weights.total();
  const std::size_t cells = grid.cells();
  std::vector<std::vector<Edge>> parts(cells);
  parallel_for(cells, workers, [&](std::size_t a) {
    const std::size_t size_a = grid.start[a + 1] - grid.start[a];
    if (size_a == 0) return;
    auto& out = parts[a];
    const Vertex* ma = grid.members.data() + grid.start[a];
    for (std::size_t b = a; b < cells; ++b) {
      const std::size_t size_b = grid.start[b + 1] - grid.start[b];
      if (size_b == 0 || (a == b && size_a < 2)) continue;
      const auto bound = finite_upper_bound(kernel, n, grid.gap(a, b), grid.range[a],
                                            grid.range[b], total);
      const double pbar = std::min(1.0, bound.value_or(1.0));
      if (!(pbar > 0)) continue;
      const Vertex* mb = grid.members.data() + grid.start[b];
      Rng rng = make_rng(seed, {static_cast<std::uint64_t>(Stream::kGrid), a, b});
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      const std::uint64_t pairs = static_cast<std::uint64_t>(size_a) * size_b;
      const double log_miss = std::log1p(-pbar);
      std::uint64_t idx = 0;
      bool first = true;
      while (true) {
        // Geometric skip to the next candidate pair.
        std::uint64_t step = 1;
        if (pbar < 1) {
          const double skip = std::floor(std::log(1.0 - unit(rng)) / log_miss);
          if (skip >= static_cast<double>(pairs)) break;
          step += static_cast<std::uint64_t>(skip);
        }
        if (first) {
          idx = step - 1;
          first = false;
        } else {
          idx += step;
        }
        if (idx >= pairs) break;
        const Vertex u = ma[idx / size_b];
        const Vertex v = mb[idx % size_b];
        if (a == b && u >= v) continue;
        const double t = distance(points.point(u), points.point(v), metric);
        const double p = eval_finite(kernel, n, t, weights[u], weights[v], total);
        if (unit(rng) * pbar < p) out.emplace_back(std::min(u, v), std::max(u, v));
      }
    }
  });
  auto edges = concat(parts);
  std::sort(edges.begin(), edges.end());
  return edges;
}

bool grid_supported(const KernelSpec& kernel, std::size_t n, const WeightVector& weights) {
  if (weights.size() == 0) return true;
  const auto [lo, hi] = std::minmax_element(weights.values().begin(), weights.values().end());
  const WeightRange range{*lo, *hi};
  return finite_upper_bound(kernel, n, 0.0, range, range, weights.total()).has_value();
}

}  // namespace

const char* to_string(SamplingMode mode) { return mode == SamplingMode::kGrid ? "grid" : "exact"; }

SpatialGraph connect(PointCloud points, WeightVector weights, const KernelSpec& kernel,
                     const Metric& metric, SamplingMode mode, std::uint64_t seed, unsigned workers) {
  validate(kernel);
  if (points.size() != weights.size())
    throw ParameterError("connect: point and weight counts differ");
  const std::size_t n = points.size();
  if (mode == SamplingMode::kGrid && !grid_supported(kernel, n, weights)) {
    std::cerr << "warning: kernel " << kernel_id(kernel)
              << " has no cell-pair bound; using exact sampling\n";
    mode = SamplingMode::kExact;
  }
  std::vector<Edge> edges;
  if (n > 1) {
    if (mode == SamplingMode::kGrid)
      edges = grid_edges(points, weights, kernel, metric, build_grid(points, weights, metric), seed,
                         workers);
    else
      edges = exact_edges(points, weights, kernel, metric, edge_seed_of(seed), workers);
  }
  GraphMeta meta{kernel_id(kernel), seed, metric, to_string(mode), std::nullopt};
  return SpatialGraph(std::move(points), std::move(weights), edges, std::move(meta));
}

SpatialGraph generate_finite(std::size_t n, const FiniteModel& model, std::uint64_t seed,
                             unsigned workers) {
  if (n == 0) throw ParameterError("generate_finite: n must be >= 1");
  validate(model.kernel);
  validate(model.weights);
  const BoxSpec box = BoxSpec::blown_up(n, model.dimension);
  Rng loc_rng = make_rng(seed, Stream::kLocations);
  Rng weight_rng = make_rng(seed, Stream::kWeights);
  PointCloud points = sample_uniform_box(n, box, loc_rng);
  WeightVector weights = sample_weights(model.weights, n, weight_rng);
  const Metric metric = model.torus ? Metric{Torus{box.side}} : Metric{Euclidean{}};
  return connect(std::move(points), std::move(weights), model.kernel, metric, model.mode, seed,
                 workers);
}

LimitBall::LimitBall(const KernelSpec& kernel, const WeightLaw& law, double radius, int dimension,
                     double mean_weight, std::uint64_t seed)
    : kernel_(kernel), mean_weight_(mean_weight), seed_(seed), edge_seed_(edge_seed_of(seed)) {
  if (!(radius > 0)) throw ParameterError("sample_limit_ball: radius must be > 0");
  validate(kernel);
  validate(law);
  Rng weight_rng = make_rng(seed, Stream::kWeights);
  Rng loc_rng = make_rng(seed, Stream::kLocations);
  const double root_weight = sample_limit_weight(law, weight_rng);
  PointCloud cloud = sample_poisson_ball(1.0, radius, dimension, loc_rng);
  points_.dimension = dimension;
  points_.domain = cloud.domain;
  points_.coords.assign(dimension, 0.0);
  points_.coords.insert(points_.coords.end(), cloud.coords.begin(), cloud.coords.end());
  std::vector<double> w;
  w.reserve(points_.size());
  w.push_back(root_weight);
  for (std::size_t i = 1; i < points_.size(); ++i) w.push_back(sample_limit_weight(law, weight_rng));
  weights_ = WeightVector(std::move(w));
}

bool LimitBall::adjacent(std::size_t u, std::size_t v) const {
  if (u == v) return false;
  const double t = distance(points_.point(u), points_.point(v));
  const double p = eval_limit(kernel_, t, weights_[u], weights_[v], mean_weight_);
  return p > 0 && pair_uniform(edge_seed_, u, v) < p;
}

std::vector<Vertex> LimitBall::neighbors(std::size_t v) const {
  std::vector<Vertex> out;
  for (std::size_t u = 0; u < size(); ++u)
    if (adjacent(u, v)) out.push_back(static_cast<Vertex>(u));
  return out;
}

SpatialGraph LimitBall::materialize() const {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < size(); ++i)
    for (std::size_t j = i + 1; j < size(); ++j)
      if (adjacent(i, j)) edges.emplace_back(static_cast<Vertex>(i), static_cast<Vertex>(j));
  GraphMeta meta{kernel_id(kernel_), seed_, Euclidean{}, "limit", Vertex{0}};
  return SpatialGraph(points_, weights_, edges, std::move(meta));
}

SpatialGraph sample_limit_ball(const KernelSpec& kernel, const WeightLaw& law, double radius,
                               int dimension, double mean_weight, std::uint64_t seed) {
  return LimitBall(kernel, law, radius, dimension, mean_weight, seed).materialize();
}

void validate(const HrgModel& model) {
  if (!(model.alpha_h > 0.5)) throw ParameterError("HRG needs alpha_H > 1/2");
  if (!(model.nu > 0)) throw ParameterError("HRG needs nu > 0");
  if (model.t_h && !(*model.t_h > 0 && *model.t_h < 1))
    throw ParameterError("PHRG needs 0 < T_H < 1");
}

KernelSpec hrg_kernel(const HrgModel& model) {
  KernelSpec spec;
  if (model.t_h) spec.model = kernel::PhrgLimit{model.nu, *model.t_h};
  else spec.model = kernel::ThrgLimit{model.nu};
  return spec;
}

SpatialGraph generate_hrg_native(std::size_t n, const HrgModel& model, std::uint64_t seed) {
  if (n == 0) throw ParameterError("generate_hrg_native: n must be >= 1");
  validate(model);
  const double radius = hrg_radius(n, model.nu);
  Rng loc_rng = make_rng(seed, Stream::kLocations);
  Rng weight_rng = make_rng(seed, Stream::kWeights);
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  HyperbolicCoords coords;
  coords.disk_radius = radius;
  coords.angle.resize(n);
  coords.radius.resize(n);
  for (double& a : coords.angle) a = angle(loc_rng);
  for (double& r : coords.radius) r = hrg_radial_inverse_cdf(unit(weight_rng), model.alpha_h, radius);
  return connect_hrg_native(std::move(coords), model, seed);
}

SpatialGraph connect_hrg_native(HyperbolicCoords coords, const HrgModel& model, std::uint64_t seed) {
  validate(model);
  const std::size_t n = coords.radius.size();
  if (coords.angle.size() != n) throw ParameterError("connect_hrg_native: coordinate size mismatch");
  const double radius = coords.disk_radius;
  const std::uint64_t edge_seed = edge_seed_of(seed);
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dh =
          hyperbolic_distance(coords.radius[i], coords.angle[i], coords.radius[j], coords.angle[j]);
      const double p = model.t_h ? phrg_probability(dh, radius, *model.t_h)
                                 : thrg_probability(dh, radius);
      if (p > 0 && pair_uniform(edge_seed, i, j) < p)
        edges.emplace_back(static_cast<Vertex>(i), static_cast<Vertex>(j));
    }
  }
  PointCloud points{1, std::vector<double>(n), BoxSpec{1, static_cast<double>(n)}};
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    const HrgPoint h = hrg_transform(coords.radius[i], coords.angle[i], radius);
    points.coords[i] = static_cast<double>(n) * h.x;
    w[i] = h.w;
  }
  GraphMeta meta{kernel_id(hrg_kernel(model)), seed, Torus{static_cast<double>(n)}, "hrg-native",
                 std::nullopt};
  SpatialGraph g(std::move(points), WeightVector(std::move(w)), edges, std::move(meta));
  g.set_hyperbolic(std::move(coords));
  return g;
}

SpatialGraph connect_hrg_transformed(const SpatialGraph& native, const HrgModel& model) {
  const std::size_t n = native.size();
  if (!native.hyperbolic()) throw ParameterError("connect_hrg_transformed: graph has no HRG coordinates");
  if (std::abs(native.hyperbolic()->disk_radius - hrg_radius(n, model.nu)) > 1e-12)
    throw ParameterError("connect_hrg_transformed: disk radius does not match 2 log(n / nu)");
  return connect(native.locations(), native.weights(), hrg_kernel(model),
                 Torus{static_cast<double>(n)}, SamplingMode::kExact, native.meta().seed);
}

}  // namespace sirg
