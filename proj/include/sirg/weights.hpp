#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "sirg/rng.hpp"

namespace sirg {

namespace law {

struct Constant {
  double value = 1.0;
};
struct Uniform01 {};
/// P(W > w) = w^{-beta} on [1, inf).
struct Pareto {
  double beta = 2.0;
};
/// Tail bracketed by c_G z^{1-beta_G} <= P(W > z) <= C_G z^{1-beta_G}. Generated
/// as Pareto(beta_G - 1); the bracket constants are informational.
struct PowerLawTail {
  double beta_g = 2.5;
  double c_g = 1.0;
  double big_c_g = 1.0;
};
/// Fixed sequence; sample_weights takes its first n entries.
struct Empirical {
  std::vector<double> values;
};
/// Weight exp((R - r)/2) of a hyperbolic radius r with the HRG radial law.
/// `radius` is R_n; zero means "derive from n as 2 log(n / nu)".
struct HrgRadial {
  double alpha_h = 1.0;
  double nu = 1.0;
  double radius = 0.0;
};

}  // namespace law

using WeightLaw = std::variant<law::Constant, law::Uniform01, law::Pareto, law::PowerLawTail,
                               law::Empirical, law::HrgRadial>;

/// Realized per-vertex weights with their cached sum.
class WeightVector {
 public:
  WeightVector() = default;
  explicit WeightVector(std::vector<double> values);

  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }
  double total() const { return total_; }
  friend bool operator==(const WeightVector&, const WeightVector&) = default;

 private:
  std::vector<double> values_;
  double total_ = 0.0;
};

void validate(const WeightLaw& law);
std::string describe(const WeightLaw& law);

WeightVector sample_weights(const WeightLaw& law, std::size_t n, Rng& rng);

/// One draw from the limiting law (HrgRadial draws its Pareto(2 alpha_H) limit).
double sample_limit_weight(const WeightLaw& law, Rng& rng);

/// Distribution function. For HrgRadial with a set radius this is the exact
/// finite-n law of exp((R - r)/2); with radius 0 it is the Pareto(2 alpha_H) limit.
double cdf(const WeightLaw& law, double x);
double quantile(const WeightLaw& law, double u);
/// Mean of the limiting weight variable.
double mean(const WeightLaw& law);

/// Kolmogorov-Smirnov statistic sup_x |F_emp(x) - F(x)| over the sample points,
/// excluding atoms of F.
double empirical_cdf_distance(std::span<const double> values, const WeightLaw& law);

/// R_n = 2 log(n / nu).
double hrg_radius(std::size_t n, double nu);
/// (cosh(alpha r) - 1) / (cosh(alpha R) - 1), clamped to [0, 1].
double hrg_radial_cdf(double r, double alpha_h, double radius);
double hrg_radial_inverse_cdf(double u, double alpha_h, double radius);

struct HrgPoint {
  double x = 0.0;  // theta / (2 pi), in [-1/2, 1/2]
  double w = 1.0;  // exp((R - r) / 2)
};
HrgPoint hrg_transform(double r, double theta, double radius);

/// Reads one weight per line; blank lines and '#' comments are skipped.
std::vector<double> load_weight_sequence(const std::filesystem::path& path);

}  // namespace sirg
