#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "sirg/rng.hpp"
#include "sirg/weights.hpp"

namespace sirg {

namespace kernel {

/// kappa == p everywhere. Mostly useful for the degenerate cases (p = 0, p = 1).
struct Constant {
  double p = 0.0;
};

/// 1{t <= r0}, independent of the weights.
struct Threshold {
  double r0 = 1.0;
};

/// 1 ^ f(t) g(x, y) with a nonincreasing profile f and a symmetric coupler g.
/// alpha_p and beta_p are the declared exponents of f and of the tail of g(W1, W2).
struct Product {
  std::function<double(double)> profile;
  std::function<double(double, double)> coupler;
  double alpha_p = 1.0;
  double beta_p = 1.0;
  /// Set when g is nondecreasing in each argument on [0, inf); enables grid sampling.
  bool monotone_coupler = false;
  std::string label = "product";

  /// f(t) = t^{-a}, g(x, y) = c (x y)^b.
  static Product power(double a, double b, double c, double beta_p);
};

/// Finite form 1 ^ (w1 w2 / sum W)^alpha (t^d / n)^{-alpha}; limit uses E[W].
/// alpha_g = +inf selects the indicator branch.
struct Girg {
  double alpha_g = 2.0;
  int dimension = 1;
};

/// Threshold hyperbolic graph. Limit 1{t <= nu x y / pi}; the finite form is the
/// native rule 1{d_H < R_n} evaluated on transformed coordinates.
struct ThrgLimit {
  double nu = 1.0;
};

/// Parametrized hyperbolic graph. Limit (1 + (pi t / (nu x y))^{1/T_H})^{-1}.
struct PhrgLimit {
  double nu = 1.0;
  double t_h = 0.5;
};

/// Continuum scale-free percolation, 1 - exp(-lambda x y / t^alpha).
struct Csfp {
  double lambda = 1.0;
  double alpha = 3.0;
};

/// Weight-dependent random connection model rho(h(s, t, v)) with
/// rho(u) = 1 ^ u^{-eta} and h(s, t, v) = v^d (s t)^gamma. Weights are the marks s.
struct Wdrcm {
  double eta = 2.0;
  double gamma = 1.0;
  int dimension = 1;
};

}  // namespace kernel

using KernelModel = std::variant<kernel::Constant, kernel::Threshold, kernel::Product, kernel::Girg,
                                 kernel::ThrgLimit, kernel::PhrgLimit, kernel::Csfp, kernel::Wdrcm>;

struct KernelSpec {
  KernelModel model;
  /// Declared alpha in E[kappa(t, W1, W2)] <= A t^{-alpha}; falls back to the
  /// model's own decay exponent when unset.
  std::optional<double> tail_exponent;
  /// The constant A above, A >= 1.
  double tail_prefactor = 1.0;
};

void validate(const KernelSpec& spec);
std::string kernel_id(const KernelSpec& spec);

/// Resolved tail exponent: the declared value, else the model default
/// (min(alpha_p, alpha_p beta_p) for products, d alpha_G for GIRG, alpha for
/// CSFP, 1/T_H for PHRG, d eta for WDRCM, +inf for compactly supported kernels).
std::optional<double> tail_exponent(const KernelSpec& spec);

/// Edge probability of the finite-n model at blown-up distance t.
/// `total_weight` (sum of all weights) is required by GIRG and ignored otherwise.
double eval_finite(const KernelSpec& spec, std::size_t n, double t, double w1, double w2,
                   std::optional<double> total_weight = std::nullopt);

/// Limiting connection function. `mean_weight` is E[W], used by GIRG only.
double eval_limit(const KernelSpec& spec, double t, double w1, double w2, double mean_weight = 1.0);

/// True when kappa(t, x, y) does not depend on (x, y).
bool weight_independent(const KernelSpec& spec);

/// Distances at which the limiting kernel jumps for the given weights.
std::vector<double> limit_breakpoints(const KernelSpec& spec, double w1, double w2,
                                      double mean_weight = 1.0);

struct WeightRange {
  double lo = 0.0;
  double hi = 0.0;
};

/// Upper bound of the finite kernel over all distances >= t_min and weights in
/// the two ranges. Empty when the model does not admit such a bound.
std::optional<double> finite_upper_bound(const KernelSpec& spec, std::size_t n, double t_min,
                                         WeightRange a, WeightRange b,
                                         std::optional<double> total_weight = std::nullopt);

/// Mean weight needed by eval_limit for this kernel/law pair (1 when unused).
double limit_mean_weight(const KernelSpec& spec, const WeightLaw& law);

/// Distance in the hyperbolic plane between polar points (r1, theta1), (r2, theta2).
double hyperbolic_distance(double r1, double theta1, double r2, double theta2);
double thrg_probability(double hyperbolic_dist, double radius);
double phrg_probability(double hyperbolic_dist, double radius, double t_h);

struct TailEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Monte Carlo estimate of E[kappa(t, W1, W2)] for i.i.d. limit weights.
TailEstimate tail_expectation(const KernelSpec& spec, double t, const WeightLaw& law,
                              std::size_t samples, Rng& rng);

struct TailBoundPoint {
  double t = 0.0;
  double estimate = 0.0;
  double std_error = 0.0;
  double bound = 0.0;
  bool passed = false;
};

struct TailBoundReport {
  double exponent = 0.0;  // gamma used in the bound A t^{-gamma + eps}
  double epsilon = 0.0;
  double prefactor = 1.0;
  std::vector<TailBoundPoint> points;
  bool passed = false;
};

/// Checks estimate - 3 std_error <= A t^{-gamma + eps} at every grid point.
/// Grid points must exceed t0.
TailBoundReport verify_tail_bound(const KernelSpec& spec, const WeightLaw& law,
                                  std::span<const double> t_grid, double epsilon,
                                  std::size_t samples, Rng& rng, double t0 = 0.0);

}  // namespace sirg
