#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <vector>

#include "sirg/errors.hpp"
#include "sirg/weights.hpp"

using namespace sirg;

TEST_CASE("constant weights") {
  Rng rng = make_rng(1);
  const auto w = sample_weights(law::Constant{1.0}, 5, rng);
  CHECK(w.size() == 5);
  CHECK(w.total() == doctest::Approx(5.0));
  CHECK_THROWS_AS(sample_weights(law::Constant{1.0}, 0, rng), ParameterError);
}

TEST_CASE("Pareto tail probability") {
  Rng rng = make_rng(2);
  const std::size_t n = 100000;
  const auto w = sample_weights(law::Pareto{2.0}, n, rng);
  const auto above = std::count_if(w.values().begin(), w.values().end(), [](double x) { return x > 2; });
  const double p = static_cast<double>(above) / n;
  CHECK(std::abs(p - 0.25) <= 4 * std::sqrt(0.25 * 0.75 / n));
  CHECK(*std::min_element(w.values().begin(), w.values().end()) >= 1.0);
  CHECK(cdf(law::Pareto{2.0}, 2.0) == doctest::Approx(0.75));
}

TEST_CASE("uniform weights mean") {
  Rng rng = make_rng(3);
  const std::size_t n = 20000;
  const auto w = sample_weights(law::Uniform01{}, n, rng);
  CHECK(std::abs(w.total() / n - 0.5) <= 4 * std::sqrt(1.0 / 12 / n));
}

TEST_CASE("Kolmogorov distance to the law is small") {
  const std::size_t n = 20000;
  const std::vector<WeightLaw> laws{law::Uniform01{}, law::Pareto{1.5}, law::PowerLawTail{2.5, 1, 1},
                                    law::HrgRadial{0.8, 1.0, 0.0}};
  for (const auto& l : laws) {
    Rng rng = make_rng(4);
    const auto w = sample_weights(l, n, rng);
    CHECK(empirical_cdf_distance(w.values(), l) <= 1.63 / std::sqrt(static_cast<double>(n)));
  }
}

TEST_CASE("quantile grid inverts the CDF") {
  const std::size_t n = 1000;
  for (const WeightLaw& l : std::vector<WeightLaw>{law::Pareto{2.0}, law::Uniform01{}, law::HrgRadial{0.75, 1.0, hrg_radius(500, 1.0)}}) {
    std::vector<double> grid;
    for (std::size_t i = 0; i < n; ++i) grid.push_back(quantile(l, (i + 0.5) / n));
    CHECK(empirical_cdf_distance(grid, l) <= 1.0 / n + 1e-12);
  }
  CHECK_THROWS_AS(quantile(law::Pareto{2.0}, 1.5), ParameterError);
}

TEST_CASE("weight law validation") {
  CHECK_THROWS_AS(validate(law::Pareto{0.0}), ParameterError);
  CHECK_THROWS_AS(validate(law::PowerLawTail{2.0, 1, 1}), ParameterError);
  CHECK_THROWS_AS(validate(law::Empirical{}), ParameterError);
  CHECK_THROWS_AS(validate(law::HrgRadial{0.5, 1, 0}), ParameterError);
  CHECK_THROWS_AS(mean(law::Pareto{1.0}), ParameterError);
  CHECK(mean(law::Pareto{3.0}) == doctest::Approx(1.5));
  CHECK_NOTHROW(validate(law::HrgRadial{0.75, 1, 0}));
}

TEST_CASE("empirical sequence") {
  const auto path = std::filesystem::temp_directory_path() / "sirg_weights_test.txt";
  {
    std::ofstream f(path);
    f << "# weights\n2.5\n\n1\n4\n";
  }
  const auto values = load_weight_sequence(path);
  std::filesystem::remove(path);
  REQUIRE(values == std::vector<double>{2.5, 1, 4});
  Rng rng = make_rng(5);
  const auto w = sample_weights(law::Empirical{values}, 2, rng);
  CHECK(w.total() == doctest::Approx(3.5));
  CHECK_THROWS_AS(sample_weights(law::Empirical{values}, 4, rng), ParameterError);
  CHECK_THROWS_AS(load_weight_sequence("/nonexistent/sirg_weights"), ParseError);
}

TEST_CASE("hyperbolic radial law") {
  const double radius = hrg_radius(100, 1.0);
  CHECK(radius == doctest::Approx(9.2103).epsilon(1e-4));
  CHECK(hrg_radial_inverse_cdf(0.0, 0.75, radius) == 0.0);
  CHECK(hrg_radial_inverse_cdf(1.0, 0.75, radius) == doctest::Approx(radius));
  for (double u : {1e-9, 0.01, 0.3, 0.5, 0.9, 0.999999}) {
    const double r = hrg_radial_inverse_cdf(u, 0.75, radius);
    CHECK(hrg_radial_cdf(r, 0.75, radius) == doctest::Approx(u).epsilon(1e-9));
  }
  const double big = hrg_radius(100000000, 1.0);
  CHECK(hrg_radial_cdf(hrg_radial_inverse_cdf(0.4, 2.0, big), 2.0, big) == doctest::Approx(0.4));
  CHECK_THROWS_AS(hrg_radius(0, 1.0), ParameterError);

  SUBCASE("transform to the torus coordinates") {
    const auto at_centre = hrg_transform(0.0, std::numbers::pi, radius);
    CHECK(at_centre.x == doctest::Approx(0.5));
    CHECK(at_centre.w == doctest::Approx(100.0));
    const auto rim = hrg_transform(radius, 0.0, radius);
    CHECK(rim.x == 0.0);
    CHECK(rim.w == doctest::Approx(1.0));
    CHECK_THROWS_AS(hrg_transform(radius + 1, 0.0, radius), ParameterError);
    CHECK_THROWS_AS(hrg_transform(1.0, 4.0, radius), ParameterError);
  }
  SUBCASE("finite-n weight law approaches its Pareto limit") {
    const law::HrgRadial limit{0.75, 1.0, 0.0};
    const law::HrgRadial finite{0.75, 1.0, hrg_radius(1000000, 1.0)};
    for (double x : {1.5, 3.0, 10.0}) CHECK(cdf(finite, x) == doctest::Approx(cdf(limit, x)).epsilon(1e-3));
  }
}

TEST_CASE("same seed, same weights") {
  Rng a = make_rng(9), b = make_rng(9);
  CHECK(sample_weights(law::Pareto{2.5}, 1000, a) == sample_weights(law::Pareto{2.5}, 1000, b));
}
