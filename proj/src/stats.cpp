#include "sirg/stats.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <numeric>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "sirg/errors.hpp"
#include "sirg/generator.hpp"
#include "sirg/parallel.hpp"

namespace sirg {

namespace {

// Quantile of the limiting weight variable.
double limit_quantile(const WeightLaw& law, double u) {
  if (const auto* h = std::get_if<law::HrgRadial>(&law))
    return quantile(law::Pareto{2 * h->alpha_h}, u);
  return quantile(law, u);
}

// Stratified draws u_i in [i/m, (i+1)/m).
std::vector<double> stratified_quantiles(const WeightLaw& law, std::size_t m, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> out(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double u = (static_cast<double>(i) + unit(rng)) / static_cast<double>(m);
    out[i] = limit_quantile(law, std::min(u, std::nextafter(1.0, 0.0)));
  }
  return out;
}

bool deterministic_weight(const KernelSpec& kernel, const WeightLaw& law) {
  return weight_independent(kernel) || std::holds_alternative<law::Constant>(law);
}

double integrate(const std::function<double(double)>& f, double a, double b) {
  if (!(b > a)) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 8, 1e-10);
}

// Integral of f over [a, b], split at the given points and on a doubling grid.
double integrate_pieces(const std::function<double(double)>& f, double a, double b,
                        std::vector<double> cuts) {
  for (double x = 1.0; x < b; x *= 2) cuts.push_back(x);
  cuts.push_back(a);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double lo = std::max(a, cuts[i]);
    const double hi = std::min(b, cuts[i + 1]);
    sum += integrate(f, lo, hi);
  }
  return sum;
}

}  // namespace

// ---------------------------------------------------------------------------
// Degrees

void DegreeHistogram::add(std::size_t degree, std::uint64_t count) {
  if (counts.size() <= degree) counts.resize(degree + 1, 0);
  counts[degree] += count;
  const double total = static_cast<double>(n + count);
  const double d = static_cast<double>(degree);
  mean += (d - mean) * static_cast<double>(count) / total;
  second_factorial += (d * (d - 1) - second_factorial) * static_cast<double>(count) / total;
  n += count;
}

void DegreeHistogram::merge(const DegreeHistogram& other) {
  for (std::size_t k = 0; k < other.counts.size(); ++k)
    if (other.counts[k]) add(k, other.counts[k]);
}

std::vector<double> DegreeHistogram::pmf() const {
  std::vector<double> out(counts.size(), 0.0);
  if (n == 0) return out;
  for (std::size_t k = 0; k < counts.size(); ++k)
    out[k] = static_cast<double>(counts[k]) / static_cast<double>(n);
  return out;
}

DegreeHistogram degree_histogram(const SpatialGraph& g) {
  DegreeHistogram h;
  std::vector<std::uint64_t> counts;
  for (std::size_t v = 0; v < g.size(); ++v) {
    const std::size_t d = g.degree(v);
    if (counts.size() <= d) counts.resize(d + 1, 0);
    ++counts[d];
  }
  for (std::size_t k = 0; k < counts.size(); ++k)
    if (counts[k]) h.add(k, counts[k]);
  return h;
}

double poisson_pmf(double lambda, std::size_t k) {
  if (!(lambda >= 0)) throw ParameterError("poisson_pmf: lambda must be >= 0");
  if (lambda == 0) return k == 0 ? 1.0 : 0.0;
  const double kd = static_cast<double>(k);
  return std::exp(kd * std::log(lambda) - lambda - std::lgamma(kd + 1));
}

double binomial_pmf(std::size_t trials, double p, std::size_t k) {
  if (k > trials) return 0.0;
  if (p <= 0) return k == 0 ? 1.0 : 0.0;
  if (p >= 1) return k == trials ? 1.0 : 0.0;
  const double n = static_cast<double>(trials), kd = static_cast<double>(k);
  return std::exp(std::lgamma(n + 1) - std::lgamma(kd + 1) - std::lgamma(n - kd + 1) +
                  kd * std::log(p) + (n - kd) * std::log1p(-p));
}

// ---------------------------------------------------------------------------
// Mixing parameter

InnerWeights inner_weights(const KernelSpec& kernel, const WeightLaw& law,
                           const QuadratureSpec& quad, Rng& rng) {
  validate(law);
  InnerWeights inner;
  inner.mean_weight = limit_mean_weight(kernel, law);
  if (weight_independent(kernel)) {
    inner.values = {1.0};
  } else if (const auto* c = std::get_if<law::Constant>(&law)) {
    inner.values = {c->value};
  } else {
    if (quad.inner_samples == 0) throw ParameterError("mixing_parameter: inner_samples must be >= 1");
    inner.values = stratified_quantiles(law, quad.inner_samples, rng);
  }
  return inner;
}

MixingEstimate mixing_parameter(const KernelSpec& kernel, double w0, const InnerWeights& inner,
                                int dimension, const QuadratureSpec& quad) {
  validate(kernel);
  if (dimension < 1) throw ParameterError("mixing_parameter: dimension must be >= 1");
  const auto alpha = tail_exponent(kernel);
  if (!alpha)
    throw ParameterError("mixing_parameter: declare a tail exponent for " + kernel_id(kernel));
  const double d = dimension;
  if (!(*alpha > d))
    throw ParameterError("mixing_parameter: tail exponent alpha <= d, the degree integral diverges");
  const double sphere = unit_sphere_area(dimension);
  const double mw = inner.mean_weight;
  const auto& ws = inner.values;
  const double inv = 1.0 / static_cast<double>(ws.size());

  auto radial = [&](double t, double w) {
    const double k = eval_limit(kernel, t, w0, w, mw);
    return dimension == 1 ? k : k * std::pow(t, d - 1);
  };

  MixingEstimate est;
  const bool per_sample = !weight_independent(kernel) && !limit_breakpoints(kernel, w0, ws[0], mw).empty();
  if (std::isinf(*alpha)) {
    // Compact support: integrate up to the largest breakpoint.
    double sum = 0.0;
    for (double w : ws) {
      const auto cuts = limit_breakpoints(kernel, w0, w, mw);
      const double top = cuts.empty() ? 0.0 : *std::max_element(cuts.begin(), cuts.end());
      est.cutoff = std::max(est.cutoff, top);
      sum += integrate_pieces([&](double t) { return radial(t, w); }, 0.0, top, cuts);
    }
    est.value = sphere * sum * inv;
    return est;
  }

  std::function<double(double, double)> integral;  // over [a, b]
  if (per_sample) {
    integral = [&](double a, double b) {
      double sum = 0.0;
      for (double w : ws)
        sum += integrate_pieces([&](double t) { return radial(t, w); }, a, b,
                                limit_breakpoints(kernel, w0, w, mw));
      return sum * inv;
    };
  } else {
    integral = [&](double a, double b) {
      auto mean_radial = [&](double t) {
        double s = 0.0;
        for (double w : ws) s += radial(t, w);
        return s * inv;
      };
      return integrate_pieces(mean_radial, a, b, {});
    };
  }

  const double gap = *alpha - d;
  const double prefactor = sphere * kernel.tail_prefactor;
  double cutoff = 1.0;
  double main = integral(0.0, cutoff);
  // Push the cutoff out until the analytic tail bound is small against the estimate.
  if (main > 0) {
    const double wanted = std::pow(prefactor / (gap * quad.relative_tolerance * sphere * main), 1.0 / gap);
    const double target = std::clamp(wanted, 1.0, 1e12);
    if (target > cutoff) {
      main += integral(cutoff, target);
      cutoff = target;
    }
  }
  double total = sphere * main;
  // Doubling shells catch kernels whose conditional tail is heavier than the bound.
  double lo = cutoff;
  for (int shell = 0; shell < 200 && total > 0; ++shell) {
    const double add = sphere * integral(lo, 2 * lo);
    total += add;
    lo *= 2;
    if (add <= quad.shell_tolerance * total) break;
  }
  est.value = total;
  est.cutoff = cutoff;
  est.tail_bound = prefactor * std::pow(cutoff, d - *alpha) / gap;
  return est;
}

MixingEstimate mixing_parameter(const KernelSpec& kernel, double w0, const WeightLaw& law,
                                int dimension, const QuadratureSpec& quad, Rng& rng) {
  return mixing_parameter(kernel, w0, inner_weights(kernel, law, quad, rng), dimension, quad);
}

std::vector<PmfEstimate> mixed_poisson_table(const KernelSpec& kernel, const WeightLaw& law,
                                             int dimension, std::size_t k_max,
                                             std::size_t w0_samples, const QuadratureSpec& quad,
                                             Rng& rng, unsigned workers) {
  if (w0_samples == 0) throw ParameterError("mixed_poisson_pmf: need at least one root weight");
  const InnerWeights inner = inner_weights(kernel, law, quad, rng);
  std::vector<double> roots;
  if (deterministic_weight(kernel, law))
    roots = {inner.values[0]};
  else
    roots = stratified_quantiles(law, w0_samples, rng);
  std::vector<double> lambda(roots.size());
  parallel_for(roots.size(), workers, [&](std::size_t i) {
    lambda[i] = mixing_parameter(kernel, roots[i], inner, dimension, quad).value;
  });
  std::vector<PmfEstimate> table(k_max + 1);
  for (std::size_t k = 0; k <= k_max; ++k) {
    RunningStats s;
    for (double l : lambda) s.add(poisson_pmf(l, k));
    table[k] = {s.mean(), s.std_error()};
  }
  return table;
}

PmfEstimate mixed_poisson_pmf(const KernelSpec& kernel, const WeightLaw& law, int dimension,
                              std::size_t k, std::size_t w0_samples, const QuadratureSpec& quad,
                              Rng& rng) {
  return mixed_poisson_table(kernel, law, dimension, k, w0_samples, quad, rng).back();
}

std::vector<double> degree_tail_expectation(std::span<const SpatialGraph> graphs,
                                            std::span<const std::size_t> thresholds) {
  if (graphs.empty()) throw ParameterError("degree_tail_expectation: need at least one graph");
  std::vector<double> sums(thresholds.size(), 0.0);
  std::size_t vertices = 0;
  for (const auto& g : graphs) {
    vertices += g.size();
    for (std::size_t v = 0; v < g.size(); ++v) {
      const std::size_t d = g.degree(v);
      for (std::size_t i = 0; i < thresholds.size(); ++i)
        if (d > thresholds[i]) sums[i] += static_cast<double>(d);
    }
  }
  for (double& s : sums) s = vertices ? s / static_cast<double>(vertices) : 0.0;
  return sums;
}

// ---------------------------------------------------------------------------
// Clustering

namespace {

template <class OnTriangle>
void for_each_triangle(const SpatialGraph& g, OnTriangle&& on_triangle) {
  for (std::size_t u = 0; u < g.size(); ++u) {
    const auto nu = g.neighbors(u);
    for (Vertex v : nu) {
      if (v <= u) continue;
      const auto nv = g.neighbors(v);
      auto a = std::upper_bound(nu.begin(), nu.end(), v);
      auto b = std::upper_bound(nv.begin(), nv.end(), v);
      while (a != nu.end() && b != nv.end()) {
        if (*a < *b) {
          ++a;
        } else if (*b < *a) {
          ++b;
        } else {
          on_triangle(static_cast<Vertex>(u), v, *a);
          ++a;
          ++b;
        }
      }
    }
  }
}

}  // namespace

WedgeTriangle wedge_triangle_counts(const SpatialGraph& g) {
  WedgeTriangle out;
  for (std::size_t v = 0; v < g.size(); ++v) {
    const std::uint64_t d = g.degree(v);
    out.wedges += d * (d > 0 ? d - 1 : 0);
  }
  std::uint64_t triangles = 0;
  for_each_triangle(g, [&](Vertex, Vertex, Vertex) { ++triangles; });
  out.triangles = 6 * triangles;
  return out;
}

std::vector<std::uint64_t> vertex_triangles(const SpatialGraph& g) {
  std::vector<std::uint64_t> delta(g.size(), 0);
  for_each_triangle(g, [&](Vertex a, Vertex b, Vertex c) {
    delta[a] += 2;
    delta[b] += 2;
    delta[c] += 2;
  });
  return delta;
}

double global_clustering(const SpatialGraph& g) {
  const auto c = wedge_triangle_counts(g);
  return c.wedges == 0 ? 0.0 : static_cast<double>(c.triangles) / static_cast<double>(c.wedges);
}

namespace {

double vertex_clustering(std::uint64_t delta, std::size_t degree) {
  if (degree < 2) return 0.0;
  return static_cast<double>(delta) / (static_cast<double>(degree) * static_cast<double>(degree - 1));
}

}  // namespace

double local_clustering(const SpatialGraph& g) {
  if (g.size() == 0) return 0.0;
  const auto delta = vertex_triangles(g);
  double sum = 0.0;
  for (std::size_t v = 0; v < g.size(); ++v) sum += vertex_clustering(delta[v], g.degree(v));
  return sum / static_cast<double>(g.size());
}

double clustering_function(const SpatialGraph& g, std::size_t k) {
  if (k < 2) return 0.0;
  const auto delta = vertex_triangles(g);
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t v = 0; v < g.size(); ++v) {
    if (g.degree(v) != k) continue;
    sum += vertex_clustering(delta[v], k);
    ++hits;
  }
  return hits == 0 ? 0.0 : sum / static_cast<double>(hits);
}

ClusteringReport clustering_report(const SpatialGraph& g, std::span<const std::size_t> ks) {
  ClusteringReport r;
  r.counts = wedge_triangle_counts(g);
  r.global = r.counts.wedges == 0 ? 0.0
                                  : static_cast<double>(r.counts.triangles) /
                                        static_cast<double>(r.counts.wedges);
  const auto delta = vertex_triangles(g);
  std::map<std::size_t, std::pair<double, std::size_t>> by;
  double sum = 0.0;
  for (std::size_t v = 0; v < g.size(); ++v) {
    const double c = vertex_clustering(delta[v], g.degree(v));
    sum += c;
    auto& slot = by[g.degree(v)];
    slot.first += c;
    ++slot.second;
  }
  r.local = g.size() ? sum / static_cast<double>(g.size()) : 0.0;
  for (std::size_t k : ks) {
    auto it = by.find(k);
    r.by_degree[k] = (k < 2 || it == by.end()) ? 0.0 : it->second.first / static_cast<double>(it->second.second);
  }
  return r;
}

double LimitClustering::global_ratio() const {
  return wedges.mean() == 0 ? 0.0 : triangles.mean() / wedges.mean();
}

double LimitClustering::global_ratio_std_error() const {
  const double b = wedges.mean();
  if (b == 0 || replicas < 2) return 0.0;
  const double ratio = triangles.mean() / b;
  const double var = triangles.variance() - 2 * ratio * covariance + ratio * ratio * wedges.variance();
  return std::sqrt(std::max(0.0, var) / static_cast<double>(replicas)) / b;
}

std::pair<PmfEstimate, bool> LimitClustering::clustering_at(std::size_t k) const {
  auto it = by_degree.find(k);
  if (k < 2 || it == by_degree.end()) return {PmfEstimate{}, true};
  const double norm = static_cast<double>(k) * static_cast<double>(k - 1);
  return {PmfEstimate{it->second.mean() / norm, it->second.std_error() / norm},
          it->second.count() < 30};
}

LimitClustering limit_clustering_estimates(const KernelSpec& kernel, const WeightLaw& law,
                                           double radius, std::size_t replicas, int dimension,
                                           double mean_weight, std::uint64_t seed,
                                           unsigned workers) {
  std::vector<std::pair<std::size_t, std::uint64_t>> draws(replicas);
  parallel_for(replicas, workers, [&](std::size_t rep) {
    const auto sub = derive_seed(seed, {static_cast<std::uint64_t>(Stream::kReplica), rep});
    const LimitBall ball(kernel, law, radius, dimension, mean_weight, sub);
    const auto nb = ball.neighbors(0);
    std::uint64_t triangles = 0;
    for (std::size_t i = 0; i < nb.size(); ++i)
      for (std::size_t j = i + 1; j < nb.size(); ++j)
        if (ball.adjacent(nb[i], nb[j])) ++triangles;
    draws[rep] = {nb.size(), 2 * triangles};
  });
  LimitClustering out;
  out.replicas = replicas;
  double cross = 0.0;
  for (const auto& [d, delta] : draws) {
    const double dd = static_cast<double>(d);
    const double wedge = dd * (dd > 0 ? dd - 1 : 0);
    const double a = static_cast<double>(delta);
    // Running co-moment of (Delta_0, D(D-1)), updated before the means move.
    const double n = static_cast<double>(out.triangles.count() + 1);
    cross += (a - out.triangles.mean()) * (wedge - out.wedges.mean()) * (n - 1) / n;
    out.triangles.add(a);
    out.wedges.add(wedge);
    out.local.add(vertex_clustering(delta, d));
    out.by_degree[d].add(a);
  }
  out.covariance = replicas > 1 ? cross / static_cast<double>(replicas - 1) : 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// Distances

std::uint32_t graph_distance(const SpatialGraph& g, std::size_t from, std::size_t to) {
  if (from >= g.size() || to >= g.size()) throw ParameterError("graph_distance: vertex out of range");
  if (from == to) return 0;
  std::vector<std::uint32_t> dist(g.size(), kInfiniteDistance);
  std::deque<std::size_t> queue{from};
  dist[from] = 0;
  while (!queue.empty()) {
    const std::size_t v = queue.front();
    queue.pop_front();
    for (Vertex u : g.neighbors(v)) {
      if (dist[u] != kInfiniteDistance) continue;
      dist[u] = dist[v] + 1;
      if (u == to) return dist[u];
      queue.push_back(u);
    }
  }
  return kInfiniteDistance;
}

std::vector<std::uint32_t> typical_distances(const SpatialGraph& g, std::size_t pairs, Rng& rng) {
  if (pairs == 0) throw ParameterError("typical_distances: pairs must be >= 1");
  if (g.size() < 2) throw ParameterError("typical_distances: need at least two vertices");
  std::uniform_int_distribution<std::size_t> pick(0, g.size() - 1);
  std::vector<std::uint32_t> out;
  out.reserve(pairs);
  for (std::size_t p = 0; p < pairs; ++p) {
    const std::size_t u = pick(rng);
    std::size_t v = pick(rng);
    while (v == u) v = pick(rng);
    out.push_back(graph_distance(g, u, v));
  }
  return out;
}

double critical_distance_constant(double alpha, int dimension) {
  if (!(alpha > dimension)) throw ParameterError("distance bound needs alpha > d");
  if (std::isinf(alpha)) return std::numeric_limits<double>::infinity();
  return 1.0 / std::log(alpha / (alpha - dimension));
}

ThresholdFraction distance_threshold_fraction(std::span<const std::uint32_t> samples, std::size_t n,
                                              double c, double alpha, int dimension) {
  if (n < 16) throw ParameterError("distance_threshold_fraction: n must be >= 16");
  ThresholdFraction out;
  out.critical_constant = critical_distance_constant(alpha, dimension);
  out.threshold = c * std::log(std::log(static_cast<double>(n)));
  if (samples.empty()) return out;
  std::size_t above = 0, finite = 0;
  for (auto d : samples) {
    if (d != kInfiniteDistance) ++finite;
    if (d == kInfiniteDistance || static_cast<double>(d) > out.threshold) ++above;
  }
  const double m = static_cast<double>(samples.size());
  out.fraction = static_cast<double>(above) / m;
  out.finite_fraction = static_cast<double>(finite) / m;
  out.std_error = std::sqrt(out.fraction * (1 - out.fraction) / m);
  return out;
}

// ---------------------------------------------------------------------------
// Total variation

double tv_distance(std::span<const double> p, std::span<const double> q) {
  double sum = 0.0;
  const std::size_t n = std::max(p.size(), q.size());
  for (std::size_t i = 0; i < n; ++i) {
    const double a = i < p.size() ? p[i] : 0.0;
    const double b = i < q.size() ? q[i] : 0.0;
    sum += std::abs(a - b);
  }
  return std::min(1.0, sum / 2);
}

double tv_distance(const DegreeHistogram& a, const DegreeHistogram& b) {
  const auto pa = a.pmf(), pb = b.pmf();
  return tv_distance(pa, pb);
}

double tv_distance(const DegreeHistogram& a, std::span<const double> reference) {
  const auto pa = a.pmf();
  double sum = 0.0, covered = 0.0;
  const std::size_t n = std::max(pa.size(), reference.size());
  for (std::size_t i = 0; i < n; ++i) {
    const double x = i < pa.size() ? pa[i] : 0.0;
    const double y = i < reference.size() ? reference[i] : 0.0;
    covered += y;
    sum += std::abs(x - y);
  }
  sum += std::max(0.0, 1.0 - covered);
  return std::min(1.0, sum / 2);
}

double tv_distance(const NeighborhoodHistogram& a, const NeighborhoodHistogram& b) {
  if (!a.same_tags(b)) throw ValidationError("tv_distance: histogram tags differ");
  double sum = 0.0;
  auto ia = a.counts().begin(), ib = b.counts().begin();
  const auto ea = a.counts().end(), eb = b.counts().end();
  auto pa = [&](std::uint64_t c) { return a.total() ? static_cast<double>(c) / static_cast<double>(a.total()) : 0.0; };
  auto pb = [&](std::uint64_t c) { return b.total() ? static_cast<double>(c) / static_cast<double>(b.total()) : 0.0; };
  while (ia != ea || ib != eb) {
    if (ib == eb || (ia != ea && ia->first < ib->first)) {
      sum += pa(ia->second);
      ++ia;
    } else if (ia == ea || ib->first < ia->first) {
      sum += pb(ib->second);
      ++ib;
    } else {
      sum += std::abs(pa(ia->second) - pb(ib->second));
      ++ia;
      ++ib;
    }
  }
  return std::min(1.0, sum / 2);
}

}  // namespace sirg
