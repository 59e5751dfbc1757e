#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "sirg/errors.hpp"
#include "sirg/kernels.hpp"

using namespace sirg;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

KernelSpec spec_of(KernelModel m) {
  KernelSpec s;
  s.model = std::move(m);
  return s;
}

}  // namespace

TEST_CASE("finite kernel values") {
  SUBCASE("indicator GIRG") {
    // n = 10, t = 5: rescaled distance 0.5 against w1 w2 / sum W = 1
    const auto s = spec_of(kernel::Girg{kInf, 1});
    CHECK(eval_finite(s, 10, 5.0, 2.0, 2.0, 4.0) == 1.0);
    CHECK(eval_finite(s, 10, 10.0, 2.0, 2.0, 4.0) == 1.0);
    CHECK(eval_finite(s, 10, 11.0, 2.0, 2.0, 4.0) == 0.0);
    CHECK_THROWS_AS(eval_finite(s, 10, 5.0, 2.0, 2.0), ParameterError);
  }
  SUBCASE("CSFP") {
    const auto s = spec_of(kernel::Csfp{1.0, 2.0});
    CHECK(eval_finite(s, 100, 1.0, 1.0, 1.0) == doctest::Approx(1 - std::exp(-1.0)));
    CHECK(eval_finite(s, 100, 1.0, 1.0, 1.0) == doctest::Approx(0.6321).epsilon(1e-4));
  }
  SUBCASE("threshold boundary is closed") {
    const auto s = spec_of(kernel::Threshold{1.5});
    CHECK(eval_finite(s, 10, 1.5, 1, 1) == 1.0);
    CHECK(eval_finite(s, 10, std::nextafter(1.5, 2.0), 1, 1) == 0.0);
  }
  CHECK_THROWS_AS(eval_finite(spec_of(kernel::Threshold{1}), 10, -1.0, 1, 1), ParameterError);
}

TEST_CASE("limit kernel values") {
  const auto thrg = spec_of(kernel::ThrgLimit{std::numbers::pi});
  CHECK(eval_limit(thrg, 0.5, 1, 1) == 1.0);
  CHECK(eval_limit(thrg, 2.0, 1, 1) == 0.0);
  const auto phrg = spec_of(kernel::PhrgLimit{std::numbers::pi, 0.5});
  CHECK(eval_limit(phrg, 1.0, 1, 1) == doctest::Approx(0.5));
  const auto girg = spec_of(kernel::Girg{2.0, 1});
  CHECK(eval_limit(girg, 2.0, 1, 1, 1.0) == doctest::Approx(0.25));
  CHECK(eval_limit(girg, 0.5, 1, 1, 1.0) == 1.0);
  CHECK(eval_limit(spec_of(kernel::Constant{0.3}), 7.0, 2, 5) == 0.3);
}

TEST_CASE("kernel properties") {
  std::vector<KernelSpec> specs{spec_of(kernel::Threshold{1.0}),
                                spec_of(kernel::Product::power(2, 1, 0.5, 2)),
                                spec_of(kernel::Girg{2.5, 1}),
                                spec_of(kernel::Girg{kInf, 2}),
                                spec_of(kernel::ThrgLimit{1.0}),
                                spec_of(kernel::PhrgLimit{1.0, 0.5}),
                                spec_of(kernel::Csfp{1.0, 3.0}),
                                spec_of(kernel::Wdrcm{2.0, 1.0, 1})};
  const std::vector<double> ws{1.0, 1.3, 2.0, 7.5, 40.0};
  const std::vector<double> ts{0.0, 0.1, 0.5, 1.0, 2.0, 5.0, 30.0, 1000.0};
  for (const auto& s : specs) {
    CAPTURE(kernel_id(s));
    for (double x : ws)
      for (double y : ws) {
        double prev = 1.0;
        for (double t : ts) {
          const double p = eval_limit(s, t, x, y, 1.5);
          CHECK(p >= 0.0);
          CHECK(p <= 1.0);
          CHECK(p == eval_limit(s, t, y, x, 1.5));
          CHECK(p <= prev);
          prev = p;
          const double f = eval_finite(s, 1000, t, x, y, 1500.0);
          CHECK(f >= 0.0);
          CHECK(f <= 1.0);
          CHECK(f == doctest::Approx(eval_finite(s, 1000, t, y, x, 1500.0)).epsilon(1e-12));
        }
      }
  }
}

TEST_CASE("finite kernels converge to their limits") {
  const double mean_w = 1.5;
  struct Case {
    KernelSpec spec;
    double t, x, y;
  };
  std::vector<Case> cases{{spec_of(kernel::Girg{2.0, 1}), 3.0, 1.2, 2.0},
                          {spec_of(kernel::Csfp{1.0, 3.0}), 1.7, 1.1, 2.5},
                          {spec_of(kernel::PhrgLimit{1.0, 0.5}), 2.0, 1.5, 3.0},
                          {spec_of(kernel::ThrgLimit{1.0}), 0.3, 1.5, 3.0}};
  for (const auto& c : cases) {
    CAPTURE(kernel_id(c.spec));
    const double limit = eval_limit(c.spec, c.t, c.x, c.y, mean_w);
    std::vector<double> gaps;
    for (std::size_t n : {100u, 1000u, 10000u, 100000u})
      gaps.push_back(std::abs(eval_finite(c.spec, n, c.t, c.x, c.y, n * mean_w) - limit));
    CHECK(gaps.back() <= gaps.front());
    CHECK(gaps.back() <= 1e-2);
  }
}

TEST_CASE("tail expectations") {
  Rng rng = make_rng(11);
  const auto csfp = tail_expectation(spec_of(kernel::Csfp{1.0, 3.0}), 2.0, law::Constant{1.0}, 100, rng);
  CHECK(csfp.mean == doctest::Approx(1 - std::exp(-1.0 / 8)));
  CHECK(csfp.std_error == 0.0);
  const auto girg = tail_expectation(spec_of(kernel::Girg{2.0, 1}), 10.0, law::Constant{1.0}, 100, rng);
  CHECK(girg.mean == doctest::Approx(0.01));
  CHECK(girg.std_error == 0.0);
  CHECK_THROWS_AS(tail_expectation(spec_of(kernel::Threshold{1}), 2.0, law::Constant{1.0}, 1, rng),
                  ParameterError);
}

TEST_CASE("tail bound verification") {
  Rng rng = make_rng(12);
  const std::vector<double> grid{2.0, 10.0, 100.0};
  SUBCASE("compact kernel vanishes beyond its support") {
    const auto rep = verify_tail_bound(spec_of(kernel::Threshold{1.0}), law::Pareto{2.0}, grid, 0.5, 1000, rng);
    CHECK(rep.passed);
    for (const auto& p : rep.points) CHECK(p.estimate == 0.0);
  }
  SUBCASE("inverse-square profile meets the bound with equality") {
    auto product = spec_of(kernel::Product::power(2, 0, 1, 1e6));
    const auto rep = verify_tail_bound(product, law::Pareto{2.0}, grid, 0.0, 1000, rng);
    CHECK(rep.exponent == doctest::Approx(2.0));
    CHECK(rep.passed);
    for (const auto& p : rep.points) CHECK(p.estimate == doctest::Approx(p.bound));
  }
  SUBCASE("a declared exponent that is too large fails") {
    auto s = spec_of(kernel::Csfp{1.0, 3.0});
    s.tail_exponent = 6.0;
    CHECK_FALSE(verify_tail_bound(s, law::Pareto{2.0}, grid, 0.0, 20000, rng).passed);
  }
  SUBCASE("grid must lie beyond t0") {
    CHECK_THROWS_AS(verify_tail_bound(spec_of(kernel::Csfp{1.0, 3.0}), law::Pareto{2.0}, grid, 0.5, 100, rng, 5.0),
                    ParameterError);
  }
}

TEST_CASE("hyperbolic geometry") {
  CHECK(hyperbolic_distance(2.0, 0.4, 2.0, 0.4) == doctest::Approx(0.0));
  CHECK(hyperbolic_distance(3.0, 1.0, 1.0, 1.0) == doctest::Approx(2.0));
  CHECK(hyperbolic_distance(1.0, 0.0, 1.0, std::numbers::pi) == doctest::Approx(2.0));
  CHECK(hyperbolic_distance(1.0, 0.3, 2.5, -1.2) == doctest::Approx(hyperbolic_distance(2.5, -1.2, 1.0, 0.3)));
  CHECK(thrg_probability(3.0, 4.0) == 1.0);
  CHECK(thrg_probability(4.0, 4.0) == 0.0);
  CHECK(phrg_probability(4.0, 4.0, 0.3) == doctest::Approx(0.5));
  CHECK_THROWS_AS(hyperbolic_distance(-1.0, 0, 1.0, 0), ParameterError);
}

TEST_CASE("declared exponents and validation") {
  CHECK(*tail_exponent(spec_of(kernel::Girg{2.0, 2})) == doctest::Approx(4.0));
  CHECK(*tail_exponent(spec_of(kernel::Csfp{1.0, 3.0})) == doctest::Approx(3.0));
  CHECK(*tail_exponent(spec_of(kernel::PhrgLimit{1.0, 0.25})) == doctest::Approx(4.0));
  CHECK(std::isinf(*tail_exponent(spec_of(kernel::Threshold{1.0}))));
  auto declared = spec_of(kernel::Csfp{1.0, 3.0});
  declared.tail_exponent = 2.5;
  CHECK(*tail_exponent(declared) == 2.5);
  CHECK_THROWS_AS(validate(spec_of(kernel::Threshold{-1.0})), ParameterError);
  CHECK_THROWS_AS(validate(spec_of(kernel::PhrgLimit{1.0, 1.5})), ParameterError);
  CHECK_THROWS_AS(validate(spec_of(kernel::Girg{1.0, 1})), ParameterError);
  auto bad_prefactor = spec_of(kernel::Csfp{1.0, 3.0});
  bad_prefactor.tail_prefactor = 0.5;
  CHECK_THROWS_AS(validate(bad_prefactor), ParameterError);
  CHECK(weight_independent(spec_of(kernel::Threshold{1.0})));
  CHECK_FALSE(weight_independent(spec_of(kernel::Csfp{1.0, 3.0})));
}

TEST_CASE("finite upper bound dominates the kernel") {
  const auto s = spec_of(kernel::Csfp{1.0, 3.0});
  const auto bound = finite_upper_bound(s, 1000, 2.0, {1.0, 2.0}, {1.0, 4.0});
  REQUIRE(bound.has_value());
  for (double t : {2.0, 3.0, 10.0})
    for (double x : {1.0, 1.5, 2.0})
      for (double y : {1.0, 3.0, 4.0}) CHECK(eval_finite(s, 1000, t, x, y) <= *bound + 1e-15);
}
