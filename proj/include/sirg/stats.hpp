#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <vector>

#include "sirg/graph.hpp"
#include "sirg/kernels.hpp"
#include "sirg/neighborhoods.hpp"
#include "sirg/rng.hpp"
#include "sirg/running_stats.hpp"
#include "sirg/weights.hpp"

namespace sirg {

struct DegreeHistogram {
  std::vector<std::uint64_t> counts;  // counts[k] = number of vertices of degree k
  std::uint64_t n = 0;
  double mean = 0.0;
  double second_factorial = 0.0;  // sum d (d - 1) / n

  void add(std::size_t degree, std::uint64_t count = 1);
  void merge(const DegreeHistogram& other);
  std::vector<double> pmf() const;
};

DegreeHistogram degree_histogram(const SpatialGraph& g);

/// Knobs for the radial integral of the mixing parameter.
struct QuadratureSpec {
  std::size_t inner_samples = 10000;  // W1 draws when no closed form applies
  double relative_tolerance = 1e-6;   // analytic tail bound target
  double shell_tolerance = 1e-9;      // stop adding shells below this fraction
};

struct MixingEstimate {
  double value = 0.0;
  double cutoff = 0.0;      // radial cutoff T of the main integral
  double tail_bound = 0.0;  // s_{d-1} A T^{d - alpha} / (alpha - d)
};

/// Inner weight sample for the mixing integral; reused across root weights.
struct InnerWeights {
  std::vector<double> values;
  double mean_weight = 1.0;
};
InnerWeights inner_weights(const KernelSpec& kernel, const WeightLaw& law,
                           const QuadratureSpec& quad, Rng& rng);

/// Lambda(w0) = int_{R^d} E[kappa(|z|, w0, W)] dz. Refuses kernels with alpha <= d.
MixingEstimate mixing_parameter(const KernelSpec& kernel, double w0, const WeightLaw& law,
                                int dimension, const QuadratureSpec& quad, Rng& rng);
MixingEstimate mixing_parameter(const KernelSpec& kernel, double w0, const InnerWeights& inner,
                                int dimension, const QuadratureSpec& quad);

struct PmfEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// P(D = k) of the mixed Poisson law, averaged over stratified root-weight draws.
PmfEstimate mixed_poisson_pmf(const KernelSpec& kernel, const WeightLaw& law, int dimension,
                              std::size_t k, std::size_t w0_samples, const QuadratureSpec& quad,
                              Rng& rng);
std::vector<PmfEstimate> mixed_poisson_table(const KernelSpec& kernel, const WeightLaw& law,
                                             int dimension, std::size_t k_max,
                                             std::size_t w0_samples, const QuadratureSpec& quad,
                                             Rng& rng, unsigned workers = 1);

double poisson_pmf(double lambda, std::size_t k);
double binomial_pmf(std::size_t trials, double p, std::size_t k);

/// E[D 1{D > M}] over all vertices of the given graphs, one value per M.
std::vector<double> degree_tail_expectation(std::span<const SpatialGraph> graphs,
                                            std::span<const std::size_t> thresholds);

struct WedgeTriangle {
  std::uint64_t wedges = 0;     // sum d_v (d_v - 1)
  std::uint64_t triangles = 0;  // six times the number of triangles
};

WedgeTriangle wedge_triangle_counts(const SpatialGraph& g);
/// Twice the number of triangles through each vertex.
std::vector<std::uint64_t> vertex_triangles(const SpatialGraph& g);

double global_clustering(const SpatialGraph& g);
double local_clustering(const SpatialGraph& g);
double clustering_function(const SpatialGraph& g, std::size_t k);

struct ClusteringReport {
  WedgeTriangle counts;
  double global = 0.0;
  double local = 0.0;
  std::map<std::size_t, double> by_degree;
};
ClusteringReport clustering_report(const SpatialGraph& g, std::span<const std::size_t> ks);

struct LimitClustering {
  RunningStats triangles;          // Delta_0
  RunningStats wedges;             // D (D - 1)
  RunningStats local;              // Delta_0 / (D (D - 1)), 0 when D < 2
  std::map<std::size_t, RunningStats> by_degree;  // Delta_0 given D = k
  double covariance = 0.0;  // sample covariance of Delta_0 and D (D - 1)
  std::size_t replicas = 0;

  double global_ratio() const;
  double global_ratio_std_error() const;
  /// E[Delta_0 | D = k] / (k (k - 1)); the second member flags fewer than 30 hits.
  std::pair<PmfEstimate, bool> clustering_at(std::size_t k) const;
};

LimitClustering limit_clustering_estimates(const KernelSpec& kernel, const WeightLaw& law,
                                           double radius, std::size_t replicas, int dimension,
                                           double mean_weight, std::uint64_t seed,
                                           unsigned workers = 1);

inline constexpr std::uint32_t kInfiniteDistance = std::numeric_limits<std::uint32_t>::max();

std::uint32_t graph_distance(const SpatialGraph& g, std::size_t from, std::size_t to);
std::vector<std::uint32_t> typical_distances(const SpatialGraph& g, std::size_t pairs, Rng& rng);

struct ThresholdFraction {
  double fraction = 0.0;
  double std_error = 0.0;
  double threshold = 0.0;  // C log log n
  double critical_constant = 0.0;  // 1 / log(alpha / (alpha - d))
  double finite_fraction = 0.0;
};

ThresholdFraction distance_threshold_fraction(std::span<const std::uint32_t> samples, std::size_t n,
                                              double c, double alpha, int dimension);
double critical_distance_constant(double alpha, int dimension);

double tv_distance(std::span<const double> p, std::span<const double> q);
double tv_distance(const DegreeHistogram& a, const DegreeHistogram& b);
double tv_distance(const NeighborhoodHistogram& a, const NeighborhoodHistogram& b);
/// Empirical histogram against a reference pmf on 0..size-1; mass the
/// reference leaves beyond its support counts as disagreement.
double tv_distance(const DegreeHistogram& a, std::span<const double> reference);

}  // namespace sirg
