#include "sirg/geometry.hpp"

#include <cmath>
#include <numbers>

#include "sirg/errors.hpp"

namespace sirg {

BoxSpec BoxSpec::blown_up(std::size_t n, int dimension) {
  if (n == 0) throw ParameterError("blown-up box needs n >= 1");
  if (dimension < 1) throw ParameterError("dimension must be >= 1");
  const double side = dimension == 1 ? static_cast<double>(n)
                                     : std::pow(static_cast<double>(n), 1.0 / dimension);
  return {dimension, side};
}

double BoxSpec::volume() const { return std::pow(side, dimension); }

bool BoxSpec::contains(std::span<const double> p) const {
  if (static_cast<int>(p.size()) != dimension) return false;
  for (double x : p)
    if (!(x >= -side / 2 && x <= side / 2)) return false;
  return true;
}

PointCloud sample_uniform_box(std::size_t n, const BoxSpec& box, Rng& rng) {
  if (n == 0) throw ParameterError("sample_uniform_box: n must be >= 1");
  if (box.dimension < 1) throw ParameterError("sample_uniform_box: dimension must be >= 1");
  if (!(box.side > 0)) throw ParameterError("sample_uniform_box: side must be > 0");
  std::uniform_real_distribution<double> u(-box.side / 2, box.side / 2);
  PointCloud cloud{box.dimension, {}, box};
  cloud.coords.resize(n * box.dimension);
  for (double& x : cloud.coords) x = u(rng);
  return cloud;
}

void sample_in_ball(double radius, int dimension, Rng& rng, std::vector<double>& out) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (dimension == 1) {
    out.push_back(radius * (2.0 * unit(rng) - 1.0));
    return;
  }
  std::normal_distribution<double> gauss;
  const std::size_t start = out.size();
  double norm2 = 0.0;
  do {
    out.resize(start);
    norm2 = 0.0;
    for (int k = 0; k < dimension; ++k) {
      const double g = gauss(rng);
      out.push_back(g);
      norm2 += g * g;
    }
  } while (norm2 == 0.0);
  const double scale = radius * std::pow(unit(rng), 1.0 / dimension) / std::sqrt(norm2);
  for (std::size_t k = start; k < out.size(); ++k) out[k] *= scale;
}

PointCloud sample_poisson_ball(double rate, double radius, int dimension, Rng& rng) {
  if (!(rate > 0)) throw ParameterError("sample_poisson_ball: rate must be > 0");
  if (radius < 0) throw ParameterError("sample_poisson_ball: radius must be >= 0");
  if (dimension < 1) throw ParameterError("sample_poisson_ball: dimension must be >= 1");
  PointCloud cloud{dimension, {}, BallSpec{dimension, radius}};
  const double mean = rate * ball_volume(dimension, radius);
  if (mean <= 0) return cloud;
  std::poisson_distribution<std::size_t> count_dist(mean);
  const std::size_t count = count_dist(rng);
  cloud.coords.reserve(count * dimension);
  for (std::size_t i = 0; i < count; ++i) sample_in_ball(radius, dimension, rng, cloud.coords);
  return cloud;
}

double distance(std::span<const double> p, std::span<const double> q, const Metric& metric) {
  if (p.size() != q.size()) throw ParameterError("distance: dimension mismatch");
  double sum = 0.0;
  if (const auto* torus = std::get_if<Torus>(&metric)) {
    const double s = torus->side;
    for (std::size_t k = 0; k < p.size(); ++k) {
      double diff = std::fmod(p[k] - q[k], s);
      if (diff > s / 2) diff -= s;
      if (diff < -s / 2) diff += s;
      sum += diff * diff;
    }
  } else {
    for (std::size_t k = 0; k < p.size(); ++k) {
      const double diff = p[k] - q[k];
      sum += diff * diff;
    }
  }
  return std::sqrt(sum);
}

double ball_volume(int dimension, double radius) {
  if (dimension < 1) throw ParameterError("ball_volume: dimension must be >= 1");
  if (radius < 0) throw ParameterError("ball_volume: radius must be >= 0");
  const double d = dimension;
  const double unit = std::pow(std::numbers::pi, d / 2) / std::tgamma(d / 2 + 1);
  return unit * std::pow(radius, d);
}

double unit_sphere_area(int dimension) { return dimension * ball_volume(dimension, 1.0); }

}  // namespace sirg
