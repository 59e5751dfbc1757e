#include "sirg/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "sirg/detail/overloaded.hpp"
#include "sirg/errors.hpp"
#include "sirg/running_stats.hpp"

namespace sirg {

using detail::overloaded;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double clamp01(double p) {
  if (std::isnan(p)) return 0.0;
  return std::clamp(p, 0.0, 1.0);
}

double csfp(const kernel::Csfp& k, double t, double w1, double w2) {
  if (t == 0) return 1.0;
  return clamp01(-std::expm1(-k.lambda * w1 * w2 / std::pow(t, k.alpha)));
}

double product(const kernel::Product& k, double t, double w1, double w2) {
  const double g = k.coupler(w1, w2);
  if (t == 0) return g > 0 ? 1.0 : 0.0;
  return clamp01(k.profile(t) * g);
}

double wdrcm(const kernel::Wdrcm& k, double t, double s1, double s2) {
  const double h = std::pow(t, k.dimension) * std::pow(s1 * s2, k.gamma);
  if (h == 0) return 1.0;
  return clamp01(std::min(1.0, std::pow(h, -k.eta)));
}

// 1 ^ (w1 w2 / (scale t^d))^alpha, scale = sum W / n (finite) or E[W] (limit).
double girg(const kernel::Girg& k, double t, double w1, double w2, double scale) {
  if (t == 0) return 1.0;
  const double td = k.dimension == 1 ? t : std::pow(t, k.dimension);
  const double ratio = w1 * w2 / (scale * td);
  if (std::isinf(k.alpha_g)) return td <= w1 * w2 / scale ? 1.0 : 0.0;
  return clamp01(std::min(1.0, std::pow(ratio, k.alpha_g)));
}

double hrg_finite_distance(double nu, std::size_t n, double t, double w1, double w2, double& radius) {
  radius = hrg_radius(n, nu);
  const double r1 = std::max(0.0, radius - 2 * std::log(w1));
  const double r2 = std::max(0.0, radius - 2 * std::log(w2));
  const double dtheta = 2 * std::numbers::pi * t / static_cast<double>(n);
  return hyperbolic_distance(r1, 0.0, r2, dtheta);
}

}  // namespace

kernel::Product kernel::Product::power(double a, double b, double c, double beta_p) {
  Product p;
  p.profile = [a](double t) { return std::pow(t, -a); };
  p.coupler = [b, c](double x, double y) { return b == 0 ? c : c * std::pow(x * y, b); };
  p.alpha_p = a;
  p.beta_p = beta_p;
  p.monotone_coupler = b >= 0 && c >= 0;
  std::ostringstream label;
  label.precision(17);
  label << "power(" << a << "," << b << "," << c << ")";
  p.label = label.str();
  return p;
}

void validate(const KernelSpec& spec) {
  std::visit(overloaded{
                 [](const kernel::Constant& k) {
                   if (!(k.p >= 0 && k.p <= 1)) throw ParameterError("constant kernel needs p in [0,1]");
                 },
                 [](const kernel::Threshold& k) {
                   if (!(k.r0 >= 0)) throw ParameterError("threshold kernel needs r0 >= 0");
                 },
                 [](const kernel::Product& k) {
                   if (!k.profile || !k.coupler) throw ParameterError("product kernel needs f and g");
                   if (!(k.alpha_p > 0) || !(k.beta_p > 0))
                     throw ParameterError("product kernel needs alpha_p, beta_p > 0");
                 },
                 [](const kernel::Girg& k) {
                   if (!(k.alpha_g > 1)) throw ParameterError("GIRG needs alpha_G > 1");
                   if (k.dimension < 1) throw ParameterError("GIRG needs d >= 1");
                 },
                 [](const kernel::ThrgLimit& k) {
                   if (!(k.nu > 0)) throw ParameterError("THRG needs nu > 0");
                 },
                 [](const kernel::PhrgLimit& k) {
                   if (!(k.nu > 0)) throw ParameterError("PHRG needs nu > 0");
                   if (!(k.t_h > 0 && k.t_h < 1)) throw ParameterError("PHRG needs 0 < T_H < 1");
                 },
                 [](const kernel::Csfp& k) {
                   if (!(k.lambda > 0) || !(k.alpha > 0))
                     throw ParameterError("CSFP needs lambda > 0 and alpha > 0");
                 },
                 [](const kernel::Wdrcm& k) {
                   if (!(k.eta > 0)) throw ParameterError("WDRCM needs eta > 0");
                   if (k.dimension < 1) throw ParameterError("WDRCM needs d >= 1");
                 },
             },
             spec.model);
  if (!(spec.tail_prefactor >= 1)) throw ParameterError("tail prefactor A must be >= 1");
  if (spec.tail_exponent && !(*spec.tail_exponent > 0))
    throw ParameterError("declared tail exponent must be > 0");
}

std::string kernel_id(const KernelSpec& spec) {
  std::ostringstream out;
  out.precision(17);
  std::visit(overloaded{
                 [&](const kernel::Constant& k) { out << "constant(" << k.p << ")"; },
                 [&](const kernel::Threshold& k) { out << "threshold(" << k.r0 << ")"; },
                 [&](const kernel::Product& k) {
                   out << "product(" << k.label << "," << k.alpha_p << "," << k.beta_p << ")";
                 },
                 [&](const kernel::Girg& k) {
                   out << "girg(" << k.alpha_g << "," << k.dimension << ")";
                 },
                 [&](const kernel::ThrgLimit& k) { out << "thrg(" << k.nu << ")"; },
                 [&](const kernel::PhrgLimit& k) { out << "phrg(" << k.nu << "," << k.t_h << ")"; },
                 [&](const kernel::Csfp& k) { out << "csfp(" << k.lambda << "," << k.alpha << ")"; },
                 [&](const kernel::Wdrcm& k) {
                   out << "wdrcm(" << k.eta << "," << k.gamma << "," << k.dimension << ")";
                 },
             },
             spec.model);
  return out.str();
}

std::optional<double> tail_exponent(const KernelSpec& spec) {
  if (spec.tail_exponent) return spec.tail_exponent;
  return std::visit(overloaded{
                        [](const kernel::Constant& k) -> std::optional<double> {
                          return k.p > 0 ? 0.0 : kInf;
                        },
                        [](const kernel::Threshold&) -> std::optional<double> { return kInf; },
                        [](const kernel::Product& k) -> std::optional<double> {
                          return std::min(k.alpha_p, k.alpha_p * k.beta_p);
                        },
                        [](const kernel::Girg& k) -> std::optional<double> {
                          return k.dimension * k.alpha_g;
                        },
                        [](const kernel::ThrgLimit&) -> std::optional<double> { return std::nullopt; },
                        [](const kernel::PhrgLimit& k) -> std::optional<double> { return 1 / k.t_h; },
                        [](const kernel::Csfp& k) -> std::optional<double> { return k.alpha; },
                        [](const kernel::Wdrcm& k) -> std::optional<double> {
                          return k.dimension * k.eta;
                        },
                    },
                    spec.model);
}

double eval_finite(const KernelSpec& spec, std::size_t n, double t, double w1, double w2,
                   std::optional<double> total_weight) {
  if (!(t >= 0)) throw ParameterError("eval_finite: distance must be >= 0");
  return std::visit(
      overloaded{
          [&](const kernel::Constant& k) { return k.p; },
          [&](const kernel::Threshold& k) { return t <= k.r0 ? 1.0 : 0.0; },
          [&](const kernel::Product& k) { return product(k, t, w1, w2); },
          [&](const kernel::Girg& k) {
            if (!total_weight) throw ParameterError("GIRG finite kernel needs the total weight");
            return girg(k, t, w1, w2, *total_weight / static_cast<double>(n));
          },
          [&](const kernel::ThrgLimit& k) {
            double radius = 0;
            const double dh = hrg_finite_distance(k.nu, n, t, w1, w2, radius);
            return thrg_probability(dh, radius);
          },
          [&](const kernel::PhrgLimit& k) {
            double radius = 0;
            const double dh = hrg_finite_distance(k.nu, n, t, w1, w2, radius);
            return phrg_probability(dh, radius, k.t_h);
          },
          [&](const kernel::Csfp& k) { return csfp(k, t, w1, w2); },
          [&](const kernel::Wdrcm& k) { return wdrcm(k, t, w1, w2); },
      },
      spec.model);
}

double eval_limit(const KernelSpec& spec, double t, double w1, double w2, double mean_weight) {
  if (!(t >= 0)) throw ParameterError("eval_limit: distance must be >= 0");
  return std::visit(
      overloaded{
          [&](const kernel::Constant& k) { return k.p; },
          [&](const kernel::Threshold& k) { return t <= k.r0 ? 1.0 : 0.0; },
          [&](const kernel::Product& k) { return product(k, t, w1, w2); },
          [&](const kernel::Girg& k) {
            if (!(mean_weight > 0)) throw ParameterError("GIRG limit kernel needs E[W] > 0");
            return girg(k, t, w1, w2, mean_weight);
          },
          [&](const kernel::ThrgLimit& k) {
            return t <= k.nu * w1 * w2 / std::numbers::pi ? 1.0 : 0.0;
          },
          [&](const kernel::PhrgLimit& k) {
            if (t == 0) return 1.0;
            const double scale = k.nu * w1 * w2;
            if (!(scale > 0)) return 0.0;
            return 1.0 / (1.0 + std::pow(std::numbers::pi * t / scale, 1.0 / k.t_h));
          },
          [&](const kernel::Csfp& k) { return csfp(k, t, w1, w2); },
          [&](const kernel::Wdrcm& k) { return wdrcm(k, t, w1, w2); },
      },
      spec.model);
}

bool weight_independent(const KernelSpec& spec) {
  return std::visit(overloaded{
                        [](const kernel::Constant&) { return true; },
                        [](const kernel::Threshold&) { return true; },
                        [](const kernel::Wdrcm& k) { return k.gamma == 0; },
                        [](const auto&) { return false; },
                    },
                    spec.model);
}

std::vector<double> limit_breakpoints(const KernelSpec& spec, double w1, double w2,
                                      double mean_weight) {
  return std::visit(overloaded{
                        [](const kernel::Threshold& k) { return std::vector<double>{k.r0}; },
                        [&](const kernel::Girg& k) {
                          if (!std::isinf(k.alpha_g) || !(w1 * w2 > 0)) return std::vector<double>{};
                          return std::vector<double>{
                              std::pow(w1 * w2 / mean_weight, 1.0 / k.dimension)};
                        },
                        [&](const kernel::ThrgLimit& k) {
                          return std::vector<double>{k.nu * w1 * w2 / std::numbers::pi};
                        },
                        [](const auto&) { return std::vector<double>{}; },
                    },
                    spec.model);
}

std::optional<double> finite_upper_bound(const KernelSpec& spec, std::size_t n, double t_min,
                                         WeightRange a, WeightRange b,
                                         std::optional<double> total_weight) {
  const bool nonnegative = a.lo >= 0 && b.lo >= 0;
  return std::visit(
      overloaded{
          [&](const kernel::Constant& k) -> std::optional<double> { return k.p; },
          [&](const kernel::Threshold& k) -> std::optional<double> {
            return t_min <= k.r0 ? 1.0 : 0.0;
          },
          [&](const kernel::Product& k) -> std::optional<double> {
            if (!k.monotone_coupler || !nonnegative) return std::nullopt;
            return product(k, t_min, a.hi, b.hi);
          },
          [&](const kernel::Girg&) -> std::optional<double> {
            if (!nonnegative) return std::nullopt;
            return eval_finite(spec, n, t_min, a.hi, b.hi, total_weight);
          },
          [&](const kernel::Csfp& k) -> std::optional<double> {
            if (!nonnegative) return std::nullopt;
            return csfp(k, t_min, a.hi, b.hi);
          },
          [&](const kernel::Wdrcm& k) -> std::optional<double> {
            if (!nonnegative) return std::nullopt;
            // kappa decreases in each mark when gamma >= 0 and increases otherwise.
            return k.gamma >= 0 ? wdrcm(k, t_min, a.lo, b.lo) : wdrcm(k, t_min, a.hi, b.hi);
          },
          [](const auto&) -> std::optional<double> { return std::nullopt; },
      },
      spec.model);
}

double limit_mean_weight(const KernelSpec& spec, const WeightLaw& law) {
  if (std::holds_alternative<kernel::Girg>(spec.model)) return mean(law);
  return 1.0;
}

double hyperbolic_distance(double r1, double theta1, double r2, double theta2) {
  if (!(r1 >= 0) || !(r2 >= 0)) throw ParameterError("hyperbolic_distance: radii must be >= 0");
  // cosh d = cosh(r1 - r2) + 2 sinh r1 sinh r2 sin^2(dtheta / 2)
  const double s = std::sin((theta1 - theta2) / 2);
  const double arg = std::cosh(r1 - r2) + 2 * std::sinh(r1) * std::sinh(r2) * s * s;
  return std::acosh(std::max(1.0, arg));
}

double thrg_probability(double hyperbolic_dist, double radius) {
  return hyperbolic_dist < radius ? 1.0 : 0.0;
}

double phrg_probability(double hyperbolic_dist, double radius, double t_h) {
  return 1.0 / (1.0 + std::exp((hyperbolic_dist - radius) / (2 * t_h)));
}

TailEstimate tail_expectation(const KernelSpec& spec, double t, const WeightLaw& law,
                              std::size_t samples, Rng& rng) {
  if (samples < 2) throw ParameterError("tail_expectation: need at least 2 samples");
  const double mw = limit_mean_weight(spec, law);
  RunningStats stats;
  for (std::size_t s = 0; s < samples; ++s) {
    const double w1 = sample_limit_weight(law, rng);
    const double w2 = sample_limit_weight(law, rng);
    stats.add(eval_limit(spec, t, w1, w2, mw));
  }
  return {stats.mean(), stats.std_error()};
}

TailBoundReport verify_tail_bound(const KernelSpec& spec, const WeightLaw& law,
                                  std::span<const double> t_grid, double epsilon,
                                  std::size_t samples, Rng& rng, double t0) {
  const auto gamma = tail_exponent(spec);
  if (!gamma) throw ParameterError("verify_tail_bound: kernel declares no tail exponent");
  TailBoundReport report;
  report.exponent = *gamma;
  report.epsilon = epsilon;
  report.prefactor = spec.tail_prefactor;
  report.passed = true;
  for (double t : t_grid) {
    if (!(t > t0)) throw ParameterError("verify_tail_bound: grid point outside the asymptotic regime");
    const TailEstimate est = tail_expectation(spec, t, law, samples, rng);
    TailBoundPoint point{t, est.mean, est.std_error,
                         spec.tail_prefactor * std::pow(t, -*gamma + epsilon), false};
    point.passed = point.estimate - 3 * point.std_error <= point.bound;
    report.passed = report.passed && point.passed;
    report.points.push_back(point);
  }
  return report;
}

}  // namespace sirg
