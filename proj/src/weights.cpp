#include "sirg/weights.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include "sirg/detail/overloaded.hpp"
#include "sirg/errors.hpp"

namespace sirg {

namespace {

using detail::overloaded;

// log(sinh(x)) for x > 0 without overflow.
double log_sinh(double x) {
  if (x > 20) return x + std::log1p(-std::exp(-2 * x)) - std::numbers::ln2;
  return std::log(std::sinh(x));
}

double pareto_quantile(double beta, double u) {
  // u in [0,1); 1 - u in (0,1].
  return std::pow(1.0 - u, -1.0 / beta);
}

double effective_radius(const law::HrgRadial& h, std::size_t n) {
  return h.radius > 0 ? h.radius : hrg_radius(n, h.nu);
}

}  // namespace

WeightVector::WeightVector(std::vector<double> values)
    : values_(std::move(values)), total_(std::accumulate(values_.begin(), values_.end(), 0.0)) {}

void validate(const WeightLaw& law) {
  std::visit(overloaded{
                 [](const law::Constant&) {},
                 [](const law::Uniform01&) {},
                 [](const law::Pareto& p) {
                   if (!(p.beta > 0)) throw ParameterError("Pareto weights need beta > 0");
                 },
                 [](const law::PowerLawTail& p) {
                   if (!(p.beta_g > 2)) throw ParameterError("power-law tail needs beta_G > 2");
                 },
                 [](const law::Empirical& e) {
                   if (e.values.empty()) throw ParameterError("empirical weight sequence is empty");
                 },
                 [](const law::HrgRadial& h) {
                   if (!(h.alpha_h > 0.5)) throw ParameterError("HRG radial law needs alpha_H > 1/2");
                   if (!(h.nu > 0)) throw ParameterError("HRG radial law needs nu > 0");
                   if (h.radius < 0) throw ParameterError("HRG radius must be >= 0");
                 },
             },
             law);
}

std::string describe(const WeightLaw& law) {
  std::ostringstream out;
  out.precision(17);
  std::visit(overloaded{
                 [&](const law::Constant& c) { out << "constant(" << c.value << ")"; },
                 [&](const law::Uniform01&) { out << "uniform01"; },
                 [&](const law::Pareto& p) { out << "pareto(" << p.beta << ")"; },
                 [&](const law::PowerLawTail& p) { out << "powerlaw(" << p.beta_g << ")"; },
                 [&](const law::Empirical& e) { out << "empirical(" << e.values.size() << ")"; },
                 [&](const law::HrgRadial& h) {
                   out << "hrg(" << h.alpha_h << "," << h.nu << "," << h.radius << ")";
                 },
             },
             law);
  return out.str();
}

WeightVector sample_weights(const WeightLaw& law, std::size_t n, Rng& rng) {
  if (n == 0) throw ParameterError("sample_weights: n must be >= 1");
  validate(law);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> values(n);
  std::visit(overloaded{
                 [&](const law::Constant& c) { std::fill(values.begin(), values.end(), c.value); },
                 [&](const law::Uniform01&) {
                   for (double& v : values) v = unit(rng);
                 },
                 [&](const law::Pareto& p) {
                   for (double& v : values) v = pareto_quantile(p.beta, unit(rng));
                 },
                 [&](const law::PowerLawTail& p) {
                   for (double& v : values) v = pareto_quantile(p.beta_g - 1, unit(rng));
                 },
                 [&](const law::Empirical& e) {
                   if (e.values.size() < n)
                     throw ParameterError("empirical weight sequence shorter than n");
                   std::copy_n(e.values.begin(), n, values.begin());
                 },
                 [&](const law::HrgRadial& h) {
                   const double radius = effective_radius(h, n);
                   for (double& v : values) {
                     const double r = hrg_radial_inverse_cdf(unit(rng), h.alpha_h, radius);
                     v = std::exp((radius - r) / 2);
                   }
                 },
             },
             law);
  return WeightVector(std::move(values));
}

double sample_limit_weight(const WeightLaw& law, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  return std::visit(overloaded{
                        [&](const law::Constant& c) { return c.value; },
                        [&](const law::Uniform01&) { return unit(rng); },
                        [&](const law::Pareto& p) { return pareto_quantile(p.beta, unit(rng)); },
                        [&](const law::PowerLawTail& p) {
                          return pareto_quantile(p.beta_g - 1, unit(rng));
                        },
                        [&](const law::Empirical& e) {
                          std::uniform_int_distribution<std::size_t> pick(0, e.values.size() - 1);
                          return e.values[pick(rng)];
                        },
                        [&](const law::HrgRadial& h) {
                          return pareto_quantile(2 * h.alpha_h, unit(rng));
                        },
                    },
                    law);
}

double cdf(const WeightLaw& law, double x) {
  return std::visit(
      overloaded{
          [&](const law::Constant& c) { return x < c.value ? 0.0 : 1.0; },
          [&](const law::Uniform01&) { return std::clamp(x, 0.0, 1.0); },
          [&](const law::Pareto& p) { return x <= 1 ? 0.0 : 1.0 - std::pow(x, -p.beta); },
          [&](const law::PowerLawTail& p) {
            return x <= 1 ? 0.0 : 1.0 - std::pow(x, 1.0 - p.beta_g);
          },
          [&](const law::Empirical& e) {
            const auto below = std::count_if(e.values.begin(), e.values.end(),
                                             [&](double v) { return v <= x; });
            return static_cast<double>(below) / static_cast<double>(e.values.size());
          },
          [&](const law::HrgRadial& h) {
            if (x <= 1) return 0.0;
            if (h.radius <= 0) return 1.0 - std::pow(x, -2 * h.alpha_h);
            const double r = h.radius - 2 * std::log(x);
            if (r <= 0) return 1.0;
            return 1.0 - hrg_radial_cdf(r, h.alpha_h, h.radius);
          },
      },
      law);
}

double quantile(const WeightLaw& law, double u) {
  if (!(u >= 0 && u <= 1)) throw ParameterError("quantile: u must lie in [0,1]");
  return std::visit(
      overloaded{
          [&](const law::Constant& c) { return c.value; },
          [&](const law::Uniform01&) { return u; },
          [&](const law::Pareto& p) { return pareto_quantile(p.beta, u); },
          [&](const law::PowerLawTail& p) { return pareto_quantile(p.beta_g - 1, u); },
          [&](const law::Empirical& e) {
            std::vector<double> sorted = e.values;
            std::sort(sorted.begin(), sorted.end());
            const auto k = static_cast<std::size_t>(std::ceil(u * sorted.size()));
            return sorted[k == 0 ? 0 : k - 1];
          },
          [&](const law::HrgRadial& h) {
            if (h.radius <= 0) return pareto_quantile(2 * h.alpha_h, u);
            const double r = hrg_radial_inverse_cdf(1.0 - u, h.alpha_h, h.radius);
            return std::exp((h.radius - r) / 2);
          },
      },
      law);
}

double mean(const WeightLaw& law) {
  auto pareto_mean = [](double beta) {
    if (!(beta > 1)) throw ParameterError("weight law has infinite mean (Pareto beta <= 1)");
    return beta / (beta - 1);
  };
  return std::visit(overloaded{
                        [](const law::Constant& c) { return c.value; },
                        [](const law::Uniform01&) { return 0.5; },
                        [&](const law::Pareto& p) { return pareto_mean(p.beta); },
                        [&](const law::PowerLawTail& p) { return pareto_mean(p.beta_g - 1); },
                        [](const law::Empirical& e) {
                          return std::accumulate(e.values.begin(), e.values.end(), 0.0) /
                                 static_cast<double>(e.values.size());
                        },
                        [&](const law::HrgRadial& h) { return pareto_mean(2 * h.alpha_h); },
                    },
                    law);
}

double empirical_cdf_distance(std::span<const double> values, const WeightLaw& law) {
  if (std::holds_alternative<law::Empirical>(law))
    throw ParameterError("empirical_cdf_distance: empirical law has no reference CDF");
  if (values.empty()) return 0.0;
  const auto* constant = std::get_if<law::Constant>(&law);
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double stat = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (constant && sorted[i] == constant->value) continue;
    const double f = cdf(law, sorted[i]);
    stat = std::max(stat, std::max((i + 1) / n - f, f - i / n));
  }
  return stat;
}

double hrg_radius(std::size_t n, double nu) {
  if (n == 0 || !(nu > 0)) throw ParameterError("hrg_radius: need n >= 1 and nu > 0");
  return 2 * std::log(static_cast<double>(n) / nu);
}

double hrg_radial_cdf(double r, double alpha_h, double radius) {
  if (r <= 0) return 0.0;
  if (r >= radius) return 1.0;
  // (cosh(a r) - 1) / (cosh(a R) - 1) = (sinh(a r / 2) / sinh(a R / 2))^2
  return std::exp(2 * (log_sinh(alpha_h * r / 2) - log_sinh(alpha_h * radius / 2)));
}

double hrg_radial_inverse_cdf(double u, double alpha_h, double radius) {
  if (!(u >= 0 && u <= 1)) throw ParameterError("hrg_radial_inverse_cdf: u must lie in [0,1]");
  if (!(alpha_h > 0) || !(radius > 0)) throw ParameterError("hrg_radial_inverse_cdf: bad parameters");
  if (u == 0) return 0.0;
  if (u == 1) return radius;
  const double log_y = 0.5 * std::log(u) + log_sinh(alpha_h * radius / 2);
  const double half = log_y > 20 ? std::numbers::ln2 + log_y + std::log1p(std::exp(-2 * log_y) / 4)
                                 : std::asinh(std::exp(log_y));
  return std::clamp(2 * half / alpha_h, 0.0, radius);
}

HrgPoint hrg_transform(double r, double theta, double radius) {
  if (!(theta >= -std::numbers::pi && theta <= std::numbers::pi))
    throw ParameterError("hrg_transform: angle outside [-pi, pi]");
  if (!(r >= 0 && r <= radius)) throw ParameterError("hrg_transform: radius outside [0, R_n]");
  return {theta / (2 * std::numbers::pi), std::exp((radius - r) / 2)};
}

std::vector<double> load_weight_sequence(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open weight file " + path.string());
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto last = line.find_last_not_of(" \t\r");
    double v = 0;
    const char* begin = line.data() + first;
    const char* end = line.data() + last + 1;
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{} || ptr != end)
      throw ParseError("bad weight value in " + path.string(), line_no);
    values.push_back(v);
  }
  return values;
}

}  // namespace sirg
