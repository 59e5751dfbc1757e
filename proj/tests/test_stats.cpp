#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "sirg/errors.hpp"
#include "sirg/stats.hpp"

using namespace sirg;

namespace {

SpatialGraph graph_of(std::size_t n, std::vector<Edge> e) { return SpatialGraph(n, e); }

SpatialGraph complete(std::size_t n) {
  std::vector<Edge> e;
  for (Vertex i = 0; i < n; ++i)
    for (Vertex j = i + 1; j < n; ++j) e.emplace_back(i, j);
  return graph_of(n, e);
}

KernelSpec spec_of(KernelModel m) {
  KernelSpec s;
  s.model = std::move(m);
  return s;
}

}  // namespace

TEST_CASE("degree histograms") {
  const auto tri = degree_histogram(complete(3));
  CHECK(tri.counts.at(2) == 3);
  CHECK(tri.mean == doctest::Approx(2.0));
  const auto empty = degree_histogram(graph_of(4, {}));
  CHECK(empty.counts.at(0) == 4);
  CHECK(empty.mean == 0.0);
  const auto star = degree_histogram(graph_of(4, {{0, 1}, {0, 2}, {0, 3}}));
  CHECK(star.counts.at(3) == 1);
  CHECK(star.counts.at(1) == 3);
  CHECK(star.mean == doctest::Approx(1.5));
  CHECK(star.second_factorial == doctest::Approx(6.0 / 4));

  DegreeHistogram merged = tri;
  merged.merge(star);
  CHECK(merged.n == 7);
  CHECK(merged.mean == doctest::Approx(12.0 / 7));
  const auto pmf = merged.pmf();
  double sum = 0;
  for (double p : pmf) sum += p;
  CHECK(sum == doctest::Approx(1.0));
}

TEST_CASE("mixing parameter") {
  Rng rng = make_rng(1);
  const QuadratureSpec quad;
  CHECK(mixing_parameter(spec_of(kernel::Threshold{1.3}), 2.0, law::Pareto{2.0}, 1, quad, rng).value ==
        doctest::Approx(2.6));
  CHECK(mixing_parameter(spec_of(kernel::Girg{2.0, 1}), 1.0, law::Constant{1.0}, 1, quad, rng).value ==
        doctest::Approx(4.0).epsilon(1e-5));
  CHECK(mixing_parameter(spec_of(kernel::Constant{0.0}), 1.0, law::Constant{1.0}, 2, quad, rng).value == 0.0);
  CHECK(mixing_parameter(spec_of(kernel::Threshold{1.0}), 1.0, law::Constant{1.0}, 2, quad, rng).value ==
        doctest::Approx(std::numbers::pi));

  SUBCASE("CSFP closed form") {
    // s_0 Gamma(1 - 1/alpha) (lambda w0)^{1/alpha} E[W^{1/alpha}], E[W^{1/3}] = 1.2 for Pareto(2)
    for (double w0 : {1.0, 8.0}) {
      const double expected = 2 * std::tgamma(2.0 / 3) * std::cbrt(w0) * 1.2;
      const auto est = mixing_parameter(spec_of(kernel::Csfp{1.0, 3.0}), w0, law::Pareto{2.0}, 1, quad, rng);
      CHECK(est.value == doctest::Approx(expected).epsilon(1e-2));
    }
  }
  SUBCASE("divergent integrals are refused") {
    CHECK_THROWS_AS(mixing_parameter(spec_of(kernel::Csfp{1.0, 1.0}), 1.0, law::Constant{1.0}, 1, quad, rng),
                    ParameterError);
    CHECK_THROWS_AS(mixing_parameter(spec_of(kernel::Csfp{1.0, 1.5}), 1.0, law::Constant{1.0}, 2, quad, rng),
                    ParameterError);
  }
}

TEST_CASE("mixed Poisson law") {
  Rng rng = make_rng(2);
  const QuadratureSpec quad;
  for (std::size_t k = 0; k < 8; ++k) {
    const double exact = std::exp(-2.0) * std::pow(2.0, k) / std::tgamma(k + 1.0);
    CHECK(std::abs(mixed_poisson_pmf(spec_of(kernel::Threshold{1.0}), law::Pareto{2.0}, 1, k, 20, quad, rng).value -
                   exact) <= 1e-8);
  }
  CHECK(mixed_poisson_pmf(spec_of(kernel::Constant{0.0}), law::Constant{1.0}, 1, 0, 5, quad, rng).value == 1.0);
  CHECK(mixed_poisson_pmf(spec_of(kernel::Constant{0.0}), law::Constant{1.0}, 1, 3, 5, quad, rng).value == 0.0);

  const auto table = mixed_poisson_table(spec_of(kernel::Threshold{0.7}), law::Constant{1.0}, 1, 40, 4, quad, rng);
  double mass = 0;
  for (const auto& p : table) mass += p.value;
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));

  CHECK(poisson_pmf(0.0, 0) == 1.0);
  CHECK(poisson_pmf(3.0, 2) == doctest::Approx(4.5 * std::exp(-3.0)));
  CHECK(binomial_pmf(4, 0.5, 2) == doctest::Approx(0.375));
  CHECK_THROWS_AS(poisson_pmf(-1.0, 0), ParameterError);
}

TEST_CASE("degree tail expectation") {
  const std::vector<SpatialGraph> tri{complete(3)};
  const std::vector<std::size_t> m{0, 1, 2};
  const auto t = degree_tail_expectation(tri, m);
  CHECK(t[0] == doctest::Approx(2.0));
  CHECK(t[1] == doctest::Approx(2.0));
  CHECK(t[2] == 0.0);
  const std::vector<SpatialGraph> star{graph_of(4, {{0, 1}, {0, 2}, {0, 3}})};
  CHECK(degree_tail_expectation(star, m)[1] == doctest::Approx(0.75));
  CHECK_THROWS_AS(degree_tail_expectation(std::vector<SpatialGraph>{}, m), ParameterError);
}

TEST_CASE("wedges, triangles and clustering") {
  const auto k3 = wedge_triangle_counts(complete(3));
  CHECK(k3.wedges == 6);
  CHECK(k3.triangles == 6);
  const auto p3 = graph_of(3, {{0, 1}, {1, 2}});
  CHECK(wedge_triangle_counts(p3).wedges == 2);
  CHECK(wedge_triangle_counts(p3).triangles == 0);
  const auto k4 = wedge_triangle_counts(complete(4));
  CHECK(k4.wedges == 24);
  CHECK(k4.triangles == 24);

  CHECK(global_clustering(complete(3)) == 1.0);
  CHECK(global_clustering(p3) == 0.0);
  CHECK(local_clustering(complete(3)) == 1.0);
  CHECK(clustering_function(complete(3), 2) == 1.0);
  const auto star = graph_of(4, {{0, 1}, {0, 2}, {0, 3}});
  CHECK(local_clustering(star) == 0.0);

  const auto diamond = graph_of(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}});
  CHECK(wedge_triangle_counts(diamond).triangles == 12);
  CHECK(wedge_triangle_counts(diamond).wedges == 16);
  CHECK(global_clustering(diamond) == doctest::Approx(0.75));
  // degree-3 vertices sit in 2 of 3 possible triangles, degree-2 vertices in 1 of 1
  CHECK(local_clustering(diamond) == doctest::Approx(5.0 / 6));
  CHECK(clustering_function(diamond, 3) == doctest::Approx(2.0 / 3));
  CHECK(clustering_function(diamond, 2) == 1.0);

  const auto vt = vertex_triangles(diamond);
  CHECK(vt == std::vector<std::uint64_t>{4, 4, 2, 2});

  const std::vector<std::size_t> ks{2, 3};
  const auto rep = clustering_report(diamond, ks);
  CHECK(rep.global == doctest::Approx(0.75));
  CHECK(rep.by_degree.at(3) == doctest::Approx(2.0 / 3));
}

TEST_CASE("limit clustering") {
  const auto zero = limit_clustering_estimates(spec_of(kernel::Constant{0.0}), law::Constant{1.0}, 2.0, 200, 1, 1.0, 3);
  CHECK(zero.triangles.mean() == 0.0);
  CHECK(zero.wedges.mean() == 0.0);
  CHECK(zero.local.mean() == 0.0);

  const std::size_t replicas = 20000;
  const auto thr = limit_clustering_estimates(spec_of(kernel::Threshold{1.0}), law::Constant{1.0}, 2.0, replicas, 1, 1.0, 4);
  CHECK(thr.replicas == replicas);
  // E[Delta_0] = int int 1{|z1 - z2| <= 1} over [-1,1]^2 = 3; E[D(D-1)] = 2^2
  CHECK(std::abs(thr.triangles.mean() - 3.0) <= 3 * thr.triangles.std_error());
  CHECK(std::abs(thr.wedges.mean() - 4.0) <= 3 * thr.wedges.std_error());
  CHECK(std::abs(thr.global_ratio() - 0.75) <= 3 * thr.global_ratio_std_error());
  const auto [cc2, sparse] = thr.clustering_at(2);
  CHECK_FALSE(sparse);
  CHECK(cc2.value >= 0.0);
  CHECK(cc2.value <= 1.0);
}

TEST_CASE("distances") {
  Rng rng = make_rng(5);
  for (auto d : typical_distances(complete(5), 50, rng)) CHECK(d == 1);
  for (auto d : typical_distances(graph_of(5, {}), 50, rng)) CHECK(d == kInfiniteDistance);
  const auto path = graph_of(4, {{0, 1}, {1, 2}, {2, 3}});
  CHECK(graph_distance(path, 0, 3) == 3);
  CHECK(graph_distance(path, 2, 2) == 0);
  CHECK_THROWS_AS(graph_distance(path, 0, 9), ParameterError);
  CHECK_THROWS_AS(typical_distances(graph_of(1, {}), 5, rng), ParameterError);

  CHECK(critical_distance_constant(2.0, 1) == doctest::Approx(1 / std::log(2.0)));
  CHECK(critical_distance_constant(2.0, 1) == doctest::Approx(1.4427).epsilon(1e-4));
  CHECK_THROWS_AS(critical_distance_constant(1.0, 1), ParameterError);

  const std::vector<std::uint32_t> inf(10, kInfiniteDistance);
  CHECK(distance_threshold_fraction(inf, 10000, 1.0, 3.0, 1).fraction == 1.0);
  CHECK(distance_threshold_fraction(inf, 10000, 1.0, 3.0, 1).finite_fraction == 0.0);
  const std::vector<std::uint32_t> threes(10, 3);
  const auto f = distance_threshold_fraction(threes, 10000, 1.0, 3.0, 1);
  CHECK(f.threshold == doctest::Approx(std::log(std::log(10000.0))));
  CHECK(f.fraction == 1.0);
  const std::vector<std::uint32_t> ones(10, 1);
  CHECK(distance_threshold_fraction(ones, 10000, 1.0, 3.0, 1).fraction == 0.0);
}

TEST_CASE("total variation") {
  const std::vector<double> a{0.5, 0.5}, b{1.0, 0.0}, c{0.0, 0.0, 1.0};
  CHECK(tv_distance(a, a) == 0.0);
  CHECK(tv_distance(a, b) == doctest::Approx(0.5));
  CHECK(tv_distance(b, c) == doctest::Approx(1.0));
  CHECK(tv_distance(a, b) == tv_distance(b, a));
  CHECK(tv_distance(a, c) <= tv_distance(a, b) + tv_distance(b, c) + 1e-15);

  NeighborhoodHistogram h1(BallMode::kGraph, 1), h2(BallMode::kGraph, 1), h3(BallMode::kGraph, 2);
  h1.add(canonical_code(RootedGraph(1)));
  h1.add(canonical_code(RootedGraph(2)));
  h2.add(canonical_code(RootedGraph(1)), 4);
  CHECK(tv_distance(h1, h2) == doctest::Approx(0.5));
  CHECK(tv_distance(h1, h1) == 0.0);
  CHECK_THROWS_AS(tv_distance(h1, h3), ValidationError);

  const auto tri = degree_histogram(complete(3));
  const std::vector<double> ref{0.0, 0.0, 0.5};
  CHECK(tv_distance(tri, ref) == doctest::Approx(0.5));
  CHECK(tv_distance(tri, degree_histogram(graph_of(3, {}))) == 1.0);
}
