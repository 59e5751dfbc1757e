#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "sirg/rng.hpp"

namespace sirg {

/// Axis-aligned box [-side/2, side/2]^d. The blown-up ensemble uses side = n^{1/d}.
struct BoxSpec {
  int dimension = 1;
  double side = 1.0;

  static BoxSpec blown_up(std::size_t n, int dimension);
  double volume() const;
  bool contains(std::span<const double> p) const;
  friend bool operator==(const BoxSpec&, const BoxSpec&) = default;
};

/// Open ball of the given radius around the origin.
struct BallSpec {
  int dimension = 1;
  double radius = 0.0;
  friend bool operator==(const BallSpec&, const BallSpec&) = default;
};

using Domain = std::variant<BoxSpec, BallSpec>;

struct PointCloud {
  int dimension = 1;
  std::vector<double> coords;  // row-major, size() * dimension values
  Domain domain = BoxSpec{};

  std::size_t size() const { return dimension > 0 ? coords.size() / dimension : 0; }
  std::span<const double> point(std::size_t i) const {
    return {coords.data() + i * dimension, static_cast<std::size_t>(dimension)};
  }
  std::span<double> point(std::size_t i) {
    return {coords.data() + i * dimension, static_cast<std::size_t>(dimension)};
  }
  friend bool operator==(const PointCloud&, const PointCloud&) = default;
};

struct Euclidean {};
struct Torus {
  double side = 1.0;
};
using Metric = std::variant<Euclidean, Torus>;

PointCloud sample_uniform_box(std::size_t n, const BoxSpec& box, Rng& rng);

/// Homogeneous Poisson process of the given rate restricted to the ball of
/// `radius` around the origin.
PointCloud sample_poisson_ball(double rate, double radius, int dimension, Rng& rng);

/// Appends one point uniform in the ball (Gaussian direction, radius * U^{1/d}).
void sample_in_ball(double radius, int dimension, Rng& rng, std::vector<double>& out);

double distance(std::span<const double> p, std::span<const double> q, const Metric& metric = Euclidean{});

/// Lebesgue volume of the d-ball of radius r.
double ball_volume(int dimension, double radius);

/// Surface area of the unit sphere in R^d (d * volume of the unit ball).
double unit_sphere_area(int dimension);

}  // namespace sirg
