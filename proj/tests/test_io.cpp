#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

#include "sirg/errors.hpp"
#include "sirg/generator.hpp"
#include "sirg/io.hpp"

using namespace sirg;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("sirg_io_" + std::to_string(std::rand()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void check_same(const SpatialGraph& a, const SpatialGraph& b) {
  CHECK(a.size() == b.size());
  CHECK(a.edges() == b.edges());
  CHECK(a.locations() == b.locations());
  CHECK(a.weights() == b.weights());
  CHECK(a.meta().seed == b.meta().seed);
  CHECK(a.meta().kernel_id == b.meta().kernel_id);
  CHECK(a.meta().root == b.meta().root);
  CHECK(a.hyperbolic() == b.hyperbolic());
}

ResultRecord record(double value, double se) {
  return {"degree-law", "0123456789abcdef", 7, 1000, "tv", value, se, "1970-01-01T00:00:00Z"};
}

}  // namespace

TEST_CASE("graph round trips") {
  TempDir dir;
  SUBCASE("empty graph") {
    const SpatialGraph g(5, std::vector<Edge>{});
    write_graph(g, dir.path / "empty");
    check_same(g, read_graph(dir.path / "empty"));
  }
  SUBCASE("triangle with planar locations") {
    PointCloud pts;
    pts.dimension = 2;
    pts.domain = BoxSpec{2, 10.0};
    pts.coords = {0.0, 0.0, 1.0 / 3, 0.1, -2.5, 1e-300};
    const std::vector<Edge> e{{0, 1}, {1, 2}, {0, 2}};
    const SpatialGraph g(pts, WeightVector({1.0, 2.0, std::sqrt(2.0)}), e);
    for (auto fmt : {VertexFormat::kCsv, VertexFormat::kBinary}) {
      write_graph(g, dir.path / "tri", fmt);
      check_same(g, read_graph(dir.path / "tri"));
      fs::remove(dir.path / "tri.vertices.csv");
      fs::remove(dir.path / "tri.vertices.bin");
    }
  }
  SUBCASE("generated graphs keep their metadata") {
    FiniteModel m;
    m.kernel.model = kernel::Csfp{1.0, 3.0};
    m.weights = law::Pareto{2.0};
    m.torus = true;
    const auto g = generate_finite(300, m, 5);
    write_graph(g, dir.path / "csfp", VertexFormat::kBinary);
    check_same(g, read_graph(dir.path / "csfp"));
    const auto h = generate_hrg_native(200, HrgModel{0.8, 1.0, 0.5}, 6);
    write_graph(h, dir.path / "hrg");
    check_same(h, read_graph(dir.path / "hrg"));
  }
}

TEST_CASE("malformed graph files") {
  TempDir dir;
  const std::vector<Edge> e{{0, 1}, {1, 2}};
  write_graph(SpatialGraph(3, e), dir.path / "g");
  const auto edges = dir.path / "g.edges";

  SUBCASE("edge index out of range") {
    std::ofstream(edges) << "0 1\n1 7\n";
    try {
      read_graph(dir.path / "g");
      FAIL("expected a parse error");
    } catch (const ParseError& err) {
      CHECK(err.line() == 2);
    }
  }
  SUBCASE("garbage in an edge line") {
    std::ofstream(edges) << "0 1\nx y\n";
    CHECK_THROWS_AS(read_graph(dir.path / "g"), ParseError);
  }
  SUBCASE("edge count mismatch") {
    std::ofstream(edges) << "0 1\n";
    CHECK_THROWS_AS(read_graph(dir.path / "g"), ValidationError);
  }
  SUBCASE("missing files") {
    CHECK_THROWS(read_graph(dir.path / "nope"));
  }
}

TEST_CASE("result files") {
  TempDir dir;
  const std::vector<ResultRecord> none;
  write_results(none, dir.path / "empty.csv", ResultFormat::kCsv);
  CHECK(slurp(dir.path / "empty.csv") == std::string(kResultHeader) + "\n");

  const std::vector<ResultRecord> one{record(0.1, 0.002)};
  write_results(one, dir.path / "one.csv", ResultFormat::kCsv);
  const auto text = slurp(dir.path / "one.csv");
  CHECK(std::count(text.begin(), text.end(), '\n') == 2);

  std::vector<ResultRecord> many{record(1.0 / 3, 1e-17), record(-0.0, 0.0),
                                 record(std::numeric_limits<double>::infinity(), 0.5)};
  many[1].statistic = "cc_k=3";
  many[2].experiment = "with,comma \"quoted\"";
  for (auto fmt : {ResultFormat::kCsv, ResultFormat::kJson}) {
    const auto path = dir.path / (fmt == ResultFormat::kCsv ? "many.csv" : "many.json");
    write_results(many, path, fmt);
    CHECK(read_results(path, fmt) == many);
    CHECK(parse_results(format_results(many, fmt), fmt) == many);
  }
  CHECK_THROWS_AS(parse_results("not,a,header\n", ResultFormat::kCsv), ParseError);
}

TEST_CASE("number formatting round trips") {
  for (double v : {0.1, 1.0 / 3, 1e-300, 123456789.123456789, -2.5e17, 0.0})
    CHECK(parse_double(format_double(v)) == v);
  CHECK_THROWS_AS(parse_double("1.5x"), ParseError);
  CHECK_THROWS_AS(parse_double(""), ParseError);
}

TEST_CASE("config digest") {
  const std::map<std::string, std::string> a{{"kernel", "csfp"}, {"kernel.alpha", "3"}};
  const auto d = config_digest(a);
  CHECK(d.size() == 16);
  CHECK(d == config_digest(a));
  auto b = a;
  b["kernel.alpha"] = "3.5";
  CHECK(config_digest(b) != d);
  CHECK(config_digest({}) == "cbf29ce484222325");
}

TEST_CASE("timestamps") {
  ::setenv("SOURCE_DATE_EPOCH", "86400", 1);
  CHECK(result_timestamp() == "1970-01-02T00:00:00Z");
  ::unsetenv("SOURCE_DATE_EPOCH");
  CHECK(result_timestamp() == "1970-01-01T00:00:00Z");
  CHECK(result_timestamp(true).size() == 20);
}

TEST_CASE("histogram json") {
  NeighborhoodHistogram h(BallMode::kEuclidean, 1, 2.5);
  h.add(canonical_code(RootedGraph(1)), 3);
  RootedGraph edge(2);
  edge.add_edge(0, 1);
  h.add(canonical_code(edge), 5);
  h.add(CanonicalCode::oversized());
  const auto back = histogram_from_json(histogram_to_json(h));
  CHECK(back == h);
  CHECK(histogram_to_json(h)["total"] == 9);
}
