#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "sirg/errors.hpp"
#include "sirg/generator.hpp"
#include "sirg/running_stats.hpp"

using namespace sirg;

namespace {

FiniteModel model_of(KernelModel k, WeightLaw w = law::Constant{1.0}, bool torus = false,
                     SamplingMode mode = SamplingMode::kExact) {
  FiniteModel m;
  m.kernel.model = std::move(k);
  m.weights = std::move(w);
  m.torus = torus;
  m.mode = mode;
  return m;
}

KernelSpec spec_of(KernelModel m) {
  KernelSpec s;
  s.model = std::move(m);
  return s;
}

}  // namespace

TEST_CASE("degenerate kernels") {
  for (auto mode : {SamplingMode::kExact, SamplingMode::kGrid}) {
    const auto empty = generate_finite(200, model_of(kernel::Constant{0.0}, law::Constant{1.0}, false, mode), 1);
    CHECK(empty.size() == 200);
    CHECK(empty.edge_count() == 0);
    const auto full = generate_finite(60, model_of(kernel::Constant{1.0}, law::Constant{1.0}, false, mode), 1);
    CHECK(full.edge_count() == 60 * 59 / 2);
  }
  CHECK_THROWS_AS(generate_finite(0, model_of(kernel::Threshold{1.0}), 1), ParameterError);
}

TEST_CASE("threshold mean degree on the torus") {
  const std::size_t n = 10000;
  const auto g = generate_finite(n, model_of(kernel::Threshold{1.0}, law::Constant{1.0}, true), 3);
  const double mean_degree = 2.0 * g.edge_count() / n;
  // degree ~ Bin(n-1, 2/n); edges are dependent only through shared endpoints
  CHECK(std::abs(mean_degree - 2.0 * (n - 1) / n) <= 4 * std::sqrt(2.0 * 2.0 / n));
  for (const auto& [i, j] : g.edges())
    CHECK(distance(g.locations().point(i), g.locations().point(j), Torus{static_cast<double>(n)}) <= 1.0);
}

TEST_CASE("grid and exact agree on weight-free indicators") {
  Rng rng = make_rng(5);
  const BoxSpec box = BoxSpec::blown_up(3000, 2);
  const auto pts = sample_uniform_box(3000, box, rng);
  const WeightVector w(std::vector<double>(3000, 1.0));
  const auto spec = spec_of(kernel::Threshold{1.3});
  const auto exact = connect(pts, w, spec, Euclidean{}, SamplingMode::kExact, 17);
  const auto grid = connect(pts, w, spec, Euclidean{}, SamplingMode::kGrid, 17);
  CHECK(exact.edges() == grid.edges());
  CHECK(exact.edge_count() > 0);
}

TEST_CASE("determinism across runs and worker counts") {
  const auto m = model_of(kernel::Csfp{1.0, 3.0}, law::Pareto{2.0}, false, SamplingMode::kGrid);
  const auto a = generate_finite(4000, m, 99, 1);
  const auto b = generate_finite(4000, m, 99, 1);
  const auto c = generate_finite(4000, m, 99, 3);
  CHECK(a.edges() == b.edges());
  CHECK(a.edges() == c.edges());
  CHECK(a.locations() == c.locations());
  CHECK(a.weights() == c.weights());
  const auto other = generate_finite(4000, m, 100, 1);
  CHECK(a.edges() != other.edges());
}

TEST_CASE("limit ball") {
  SUBCASE("zero kernel leaves everything isolated") {
    const auto g = sample_limit_ball(spec_of(kernel::Constant{0.0}), law::Constant{1.0}, 3.0, 1, 1.0, 4);
    CHECK(g.edge_count() == 0);
    CHECK(g.size() >= 1);
    CHECK(g.meta().root == Vertex{0});
  }
  SUBCASE("threshold root degree is Poisson(2)") {
    const int draws = 10000;
    RunningStats deg;
    for (int s = 0; s < draws; ++s) {
      const LimitBall ball(spec_of(kernel::Threshold{1.0}), law::Constant{1.0}, 2.0, 1, 1.0, derive_seed(8, {static_cast<std::uint64_t>(s)}));
      deg.add(static_cast<double>(ball.neighbors(0).size()));
    }
    CHECK(std::abs(deg.mean() - 2.0) <= 3 * std::sqrt(2.0 / draws));
    CHECK(std::abs(deg.variance() - 2.0) <= 0.15);
  }
  SUBCASE("CSFP root degree matches the integrated kernel") {
    const double radius = 50.0;
    // 2 * int_0^r (1 - exp(-t^-3)) dt by the midpoint rule
    const int steps = 200000;
    double expected = 0;
    for (int i = 0; i < steps; ++i) {
      const double t = (i + 0.5) * radius / steps;
      expected += -std::expm1(-1.0 / (t * t * t));
    }
    expected *= 2 * radius / steps;
    const int draws = 4000;
    RunningStats deg;
    for (int s = 0; s < draws; ++s) {
      const LimitBall ball(spec_of(kernel::Csfp{1.0, 3.0}), law::Constant{1.0}, radius, 1, 1.0, derive_seed(9, {static_cast<std::uint64_t>(s)}));
      deg.add(static_cast<double>(ball.neighbors(0).size()));
    }
    CHECK(std::abs(deg.mean() - expected) <= 3 * deg.std_error());
  }
  SUBCASE("lazy adjacency matches the materialized graph") {
    const LimitBall ball(spec_of(kernel::Csfp{1.0, 3.0}), law::Pareto{2.0}, 6.0, 2, 1.0, 10);
    const auto g = ball.materialize();
    REQUIRE(g.size() == ball.size());
    for (std::size_t u = 0; u < g.size(); ++u)
      for (std::size_t v = u + 1; v < g.size(); ++v) CHECK(g.has_edge(u, v) == ball.adjacent(u, v));
    const LimitBall again(spec_of(kernel::Csfp{1.0, 3.0}), law::Pareto{2.0}, 6.0, 2, 1.0, 10);
    CHECK(again.materialize().edges() == g.edges());
  }
}

TEST_CASE("hyperbolic random graphs") {
  SUBCASE("two points at the centre are joined") {
    HyperbolicCoords coords{{0.0, 0.0}, {0.0, 1.0}, hrg_radius(2, 1.0)};
    const auto g = connect_hrg_native(coords, HrgModel{1.0, 1.0, std::nullopt}, 1);
    CHECK(g.edge_count() == 1);
  }
  SUBCASE("points on the rim at opposite angles are not") {
    const double r = hrg_radius(2, 1.0);
    HyperbolicCoords coords{{r, r}, {0.0, std::numbers::pi}, r};
    CHECK(connect_hrg_native(coords, HrgModel{1.0, 1.0, std::nullopt}, 1).edge_count() == 0);
  }
  SUBCASE("native and transformed routes agree") {
    for (auto t_h : {std::optional<double>{}, std::optional<double>{0.5}}) {
      const HrgModel m{0.8, 1.0, t_h};
      const auto native = generate_hrg_native(800, m, 21);
      REQUIRE(native.hyperbolic().has_value());
      CHECK(connect_hrg_transformed(native, m).edges() == native.edges());
      CHECK(native.edges() == generate_hrg_native(800, m, 21).edges());
    }
  }
  CHECK_THROWS_AS(validate(HrgModel{0.4, 1.0, std::nullopt}), ParameterError);
  CHECK_THROWS_AS(validate(HrgModel{1.0, 1.0, 1.5}), ParameterError);
}
