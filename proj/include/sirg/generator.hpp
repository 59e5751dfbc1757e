#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "sirg/geometry.hpp"
#include "sirg/graph.hpp"
#include "sirg/kernels.hpp"
#include "sirg/weights.hpp"

namespace sirg {

enum class SamplingMode { kExact, kGrid };

const char* to_string(SamplingMode mode);

struct FiniteModel {
  KernelSpec kernel;
  WeightLaw weights = law::Constant{1.0};
  int dimension = 1;
  bool torus = false;
  SamplingMode mode = SamplingMode::kExact;
};

/// n uniform points on the blown-up box, weights from the law, and independent
/// edges with probability eval_finite. Both modes sample the same distribution.
SpatialGraph generate_finite(std::size_t n, const FiniteModel& model, std::uint64_t seed,
                             unsigned workers = 1);

/// Samples edges on fixed points and weights; n is taken as points.size().
/// Grid mode falls back to exact (with a warning on stderr) when the kernel has
/// no usable cell-pair bound.
SpatialGraph connect(PointCloud points, WeightVector weights, const KernelSpec& kernel,
                     const Metric& metric, SamplingMode mode, std::uint64_t seed,
                     unsigned workers = 1);

/// Infinite SIRG restricted to the ball of `radius` around the root at the
/// origin. Vertex 0 is the root; edge coins are counter based, so adjacency
/// can be queried lazily without materializing all pairs.
class LimitBall {
 public:
  LimitBall(const KernelSpec& kernel, const WeightLaw& law, double radius, int dimension,
            double mean_weight, std::uint64_t seed);

  std::size_t size() const { return weights_.size(); }
  const PointCloud& points() const { return points_; }
  const WeightVector& weights() const { return weights_; }

  bool adjacent(std::size_t u, std::size_t v) const;
  std::vector<Vertex> neighbors(std::size_t v) const;
  SpatialGraph materialize() const;

 private:
  KernelSpec kernel_;
  double mean_weight_;
  std::uint64_t seed_;
  std::uint64_t edge_seed_;
  PointCloud points_;
  WeightVector weights_;
};

SpatialGraph sample_limit_ball(const KernelSpec& kernel, const WeightLaw& law, double radius,
                               int dimension, double mean_weight, std::uint64_t seed);

/// Native hyperbolic random graph. t_h unset selects the threshold rule.
struct HrgModel {
  double alpha_h = 1.0;
  double nu = 1.0;
  std::optional<double> t_h;
};

void validate(const HrgModel& model);

/// Kernel of the equivalent 1-d SIRG (ThrgLimit or PhrgLimit).
KernelSpec hrg_kernel(const HrgModel& model);

/// Angles uniform on [-pi, pi], radii from the radial law, edges from hyperbolic
/// distances. Locations are n * theta / (2 pi) on a circle of length n and
/// weights exp((R - r) / 2), so the result doubles as a 1-d SIRG sample.
SpatialGraph generate_hrg_native(std::size_t n, const HrgModel& model, std::uint64_t seed);

/// Connects given polar coordinates with the native rule and the coins of `seed`.
SpatialGraph connect_hrg_native(HyperbolicCoords coords, const HrgModel& model, std::uint64_t seed);

/// Re-samples the edges of a native HRG graph through the transformed 1-d
/// kernel, with the same coins. Edge sets agree with the native route.
SpatialGraph connect_hrg_transformed(const SpatialGraph& native, const HrgModel& model);

}  // namespace sirg
