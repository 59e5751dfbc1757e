#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "sirg/errors.hpp"
#include "sirg/geometry.hpp"
#include "sirg/running_stats.hpp"

using namespace sirg;

TEST_CASE("uniform box sampling") {
  SUBCASE("degenerate box is rejected") {
    Rng rng = make_rng(1);
    CHECK_THROWS_AS(sample_uniform_box(1, BoxSpec{1, 0.0}, rng), ParameterError);
    CHECK_THROWS_AS(sample_uniform_box(0, BoxSpec{1, 1.0}, rng), ParameterError);
  }
  SUBCASE("coordinate means near the centre") {
    Rng rng = make_rng(2);
    const std::size_t n = 10000;
    const BoxSpec box{2, 100.0};
    const auto pts = sample_uniform_box(n, box, rng);
    REQUIRE(pts.size() == n);
    for (int k = 0; k < 2; ++k) {
      double sum = 0;
      for (std::size_t i = 0; i < n; ++i) sum += pts.point(i)[k];
      CHECK(std::abs(sum / n) <= 3 * box.side / std::sqrt(12.0 * n));
    }
    for (std::size_t i = 0; i < n; ++i) CHECK(box.contains(pts.point(i)));
  }
  SUBCASE("same seed, same points") {
    Rng a = make_rng(3), b = make_rng(3);
    CHECK(sample_uniform_box(500, BoxSpec{3, 7.0}, a) == sample_uniform_box(500, BoxSpec{3, 7.0}, b));
  }
  SUBCASE("blown-up box has unit density") {
    CHECK(BoxSpec::blown_up(10000, 2).side == doctest::Approx(100.0));
    CHECK(BoxSpec::blown_up(1000, 1).volume() == doctest::Approx(1000.0));
  }
}

TEST_CASE("Poisson ball sampling") {
  SUBCASE("radius zero is empty") {
    Rng rng = make_rng(4);
    for (int i = 0; i < 20; ++i) CHECK(sample_poisson_ball(1.0, 0.0, 2, rng).size() == 0);
  }
  SUBCASE("mean count matches the ball volume") {
    Rng rng = make_rng(5);
    const int draws = 10000;
    RunningStats one, two;
    for (int i = 0; i < draws; ++i) {
      one.add(static_cast<double>(sample_poisson_ball(1.0, 1.0, 1, rng).size()));
      two.add(static_cast<double>(sample_poisson_ball(1.0, 1.0, 2, rng).size()));
    }
    CHECK(std::abs(one.mean() - 2.0) <= 3 * std::sqrt(2.0 / draws));
    CHECK(std::abs(two.mean() - std::numbers::pi) <= 3 * std::sqrt(std::numbers::pi / draws));
  }
  SUBCASE("points stay inside and fill sub-balls at the right rate") {
    Rng rng = make_rng(6);
    const int draws = 10000;
    RunningStats inner;
    for (int i = 0; i < draws; ++i) {
      const auto pts = sample_poisson_ball(1.5, 2.0, 2, rng);
      std::size_t hits = 0;
      for (std::size_t k = 0; k < pts.size(); ++k) {
        const auto p = pts.point(k);
        const double r = std::hypot(p[0], p[1]);
        CHECK(r < 2.0);
        hits += r < 1.0;
      }
      inner.add(static_cast<double>(hits));
    }
    const double expected = 1.5 * std::numbers::pi;
    CHECK(std::abs(inner.mean() - expected) <= 3 * std::sqrt(expected / draws));
  }
}

TEST_CASE("distances") {
  const std::vector<double> o{0, 0}, q{3, 4};
  CHECK(distance(o, o) == 0);
  CHECK(distance(o, q) == doctest::Approx(5.0));
  const std::vector<double> a{4}, b{-4};
  CHECK(distance(a, b, Euclidean{}) == doctest::Approx(8.0));
  CHECK(distance(a, b, Torus{10.0}) == doctest::Approx(2.0));
  CHECK_THROWS(distance(std::vector<double>{1, 2}, std::vector<double>{1}));

  SUBCASE("torus never exceeds euclidean or half the diagonal") {
    Rng rng = make_rng(7);
    const BoxSpec box{3, 10.0};
    const auto pts = sample_uniform_box(300, box, rng);
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      const double t = distance(pts.point(i), pts.point(i + 1), Torus{10.0});
      const double e = distance(pts.point(i), pts.point(i + 1));
      CHECK(t <= e + 1e-12);
      CHECK(t <= std::sqrt(3.0) * 5.0 + 1e-12);
    }
  }
}

TEST_CASE("ball volumes") {
  CHECK(ball_volume(1, 1.0) == doctest::Approx(2.0));
  CHECK(ball_volume(2, 1.0) == doctest::Approx(std::numbers::pi));
  CHECK(ball_volume(3, 2.0) == doctest::Approx(32 * std::numbers::pi / 3));
  for (int d = 1; d <= 6; ++d) {
    CHECK(ball_volume(d, 1.7) == doctest::Approx(ball_volume(d, 1.0) * std::pow(1.7, d)));
    CHECK(unit_sphere_area(d) == doctest::Approx(d * ball_volume(d, 1.0)));
  }
  CHECK(ball_volume(4, 0.0) == 0.0);
}
