#include "sirg/io.hpp"

#include <bit>
#include <charconv>
#include <cstdlib>
#include <cstring>
#include <ctime>
#include <fstream>
#include <sstream>

#include "sirg/errors.hpp"

namespace sirg {

namespace fs = std::filesystem;

namespace {

constexpr int kFormatVersion = 1;

fs::path with_suffix(const fs::path& base, const char* suffix) {
  return fs::path(base.string() + suffix);
}

std::ofstream open_out(const fs::path& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

std::ifstream open_in(const fs::path& path, bool binary = false) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw ParseError("cannot open " + path.string());
  return in;
}

std::uint64_t parse_uint(const std::string& text, const std::string& what, std::size_t line) {
  std::uint64_t v = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end) throw ParseError("bad " + what + " '" + text + "'", line);
  return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string metric_text(const Metric& m) {
  if (const auto* t = std::get_if<Torus>(&m)) return "torus:" + format_double(t->side);
  return "euclidean";
}

Metric parse_metric(const std::string& text) {
  if (text == "euclidean") return Euclidean{};
  if (text.rfind("torus:", 0) == 0) return Torus{parse_double(text.substr(6))};
  throw ParseError("bad metric '" + text + "'");
}

std::string domain_text(const Domain& d) {
  if (const auto* b = std::get_if<BoxSpec>(&d)) return "box:" + format_double(b->side);
  return "ball:" + format_double(std::get<BallSpec>(d).radius);
}

Domain parse_domain(const std::string& text, int dimension) {
  if (text.rfind("box:", 0) == 0) return BoxSpec{dimension, parse_double(text.substr(4))};
  if (text.rfind("ball:", 0) == 0) return BallSpec{dimension, parse_double(text.substr(5))};
  throw ParseError("bad domain '" + text + "'");
}

void put_le(std::ostream& out, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((bits >> (8 * i)) & 0xFF);
  out.write(buf, 8);
}

double get_le(std::istream& in) {
  unsigned char buf[8];
  if (!in.read(reinterpret_cast<char*>(buf), 8)) throw ParseError("vertex block truncated");
  std::uint64_t bits = 0;
  for (int i = 7; i >= 0; --i) bits = (bits << 8) | buf[i];
  return std::bit_cast<double>(bits);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> parse_csv_line(const std::string& line, std::size_t line_no) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else {
      field += c;
    }
  }
  if (quoted) throw ParseError("unterminated quote", line_no);
  out.push_back(std::move(field));
  return out;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  if (ec != std::errc{}) throw std::runtime_error("format_double failed");
  return std::string(buf, ptr);
}

double parse_double(const std::string& text) {
  double v = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end) throw ParseError("bad number '" + text + "'");
  return v;
}

// ---------------------------------------------------------------------------
// Graphs

void write_graph(const SpatialGraph& g, const fs::path& base, VertexFormat format) {
  const auto edges = g.edges();
  {
    auto out = open_out(with_suffix(base, ".edges"));
    for (auto [i, j] : edges) out << i << ' ' << j << '\n';
    if (!out) throw std::runtime_error("write failed for " + base.string() + ".edges");
  }
  const bool spatial = g.has_locations();
  const auto& hyp = g.hyperbolic();
  const int d = g.locations().dimension;
  {
    auto out = open_out(with_suffix(base, ".meta"));
    out << "format_version=" << kFormatVersion << '\n';
    out << "n=" << g.size() << '\n';
    out << "edges=" << edges.size() << '\n';
    out << "d=" << d << '\n';
    out << "seed=" << g.meta().seed << '\n';
    out << "kernel=" << g.meta().kernel_id << '\n';
    out << "metric=" << metric_text(g.meta().metric) << '\n';
    out << "domain=" << domain_text(g.locations().domain) << '\n';
    out << "mode=" << g.meta().mode << '\n';
    out << "root=" << (g.meta().root ? std::to_string(*g.meta().root) : "none") << '\n';
    out << "vertex_format="
        << (!spatial ? "none" : format == VertexFormat::kCsv ? "csv" : "binary") << '\n';
    out << "hyperbolic=" << (hyp ? format_double(hyp->disk_radius) : "none") << '\n';
  }
  if (!spatial) return;
  const std::size_t n = g.size();
  if (format == VertexFormat::kCsv) {
    auto out = open_out(with_suffix(base, ".vertices.csv"));
    for (int k = 0; k < d; ++k) out << 'x' << k << ',';
    out << 'w';
    if (hyp) out << ",r,theta";
    out << '\n';
    for (std::size_t i = 0; i < n; ++i) {
      for (double x : g.locations().point(i)) out << format_double(x) << ',';
      out << format_double(g.weights()[i]);
      if (hyp) out << ',' << format_double(hyp->radius[i]) << ',' << format_double(hyp->angle[i]);
      out << '\n';
    }
  } else {
    auto out = open_out(with_suffix(base, ".vertices.bin"), true);
    for (std::size_t i = 0; i < n; ++i) {
      for (double x : g.locations().point(i)) put_le(out, x);
      put_le(out, g.weights()[i]);
      if (hyp) {
        put_le(out, hyp->radius[i]);
        put_le(out, hyp->angle[i]);
      }
    }
  }
}

SpatialGraph read_graph(const fs::path& base) {
  std::map<std::string, std::string> meta;
  {
    auto in = open_in(with_suffix(base, ".meta"));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty() || line[0] == '#') continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ParseError("meta line without '='", line_no);
      meta[line.substr(0, eq)] = line.substr(eq + 1);
    }
  }
  auto need = [&](const char* key) -> const std::string& {
    auto it = meta.find(key);
    if (it == meta.end()) throw ParseError(std::string("meta is missing '") + key + "'");
    return it->second;
  };
  if (parse_uint(need("format_version"), "format_version", 0) != kFormatVersion)
    throw ParseError("unsupported graph format version");
  const std::size_t n = parse_uint(need("n"), "n", 0);
  const std::size_t declared_edges = parse_uint(need("edges"), "edges", 0);
  const int d = static_cast<int>(parse_uint(need("d"), "d", 0));

  std::vector<Edge> edges;
  {
    auto in = open_in(with_suffix(base, ".edges"));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const auto fields = split(line, ' ');
      if (fields.size() != 2) throw ParseError("edge line must hold two indices", line_no);
      const auto i = parse_uint(fields[0], "vertex index", line_no);
      const auto j = parse_uint(fields[1], "vertex index", line_no);
      if (i >= n || j >= n) throw ParseError("edge index out of range for n = " + std::to_string(n), line_no);
      if (i >= j) throw ParseError("edge must satisfy i < j", line_no);
      if (!edges.empty() && Edge{static_cast<Vertex>(i), static_cast<Vertex>(j)} <= edges.back())
        throw ParseError("edges must be sorted and unique", line_no);
      edges.emplace_back(static_cast<Vertex>(i), static_cast<Vertex>(j));
    }
  }
  if (edges.size() != declared_edges)
    throw ValidationError("edge count " + std::to_string(edges.size()) + " does not match header " +
                          std::to_string(declared_edges));

  GraphMeta gm;
  gm.seed = parse_uint(need("seed"), "seed", 0);
  gm.kernel_id = need("kernel");
  gm.metric = parse_metric(need("metric"));
  gm.mode = need("mode");
  if (need("root") != "none") gm.root = static_cast<Vertex>(parse_uint(need("root"), "root", 0));

  const std::string& vf = need("vertex_format");
  const std::string& hyp_text = need("hyperbolic");
  const bool hyp = hyp_text != "none";
  if (vf == "none") {
    if (gm.root && *gm.root >= n) throw ValidationError("root out of range");
    SpatialGraph g(n, edges);
    g.meta() = gm;
    return g;
  }
  PointCloud pts{d, {}, parse_domain(need("domain"), d)};
  pts.coords.reserve(n * static_cast<std::size_t>(d));
  std::vector<double> w;
  w.reserve(n);
  HyperbolicCoords hc;
  if (hyp) hc.disk_radius = parse_double(hyp_text);
  const std::size_t columns = static_cast<std::size_t>(d) + 1 + (hyp ? 2 : 0);
  auto take_row = [&](const std::vector<double>& row) {
    pts.coords.insert(pts.coords.end(), row.begin(), row.begin() + d);
    w.push_back(row[static_cast<std::size_t>(d)]);
    if (hyp) {
      hc.radius.push_back(row[static_cast<std::size_t>(d) + 1]);
      hc.angle.push_back(row[static_cast<std::size_t>(d) + 2]);
    }
  };
  if (vf == "csv") {
    auto in = open_in(with_suffix(base, ".vertices.csv"));
    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(in, line)) throw ParseError("vertex file is empty");
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const auto fields = split(line, ',');
      if (fields.size() != columns) throw ParseError("wrong number of vertex columns", line_no);
      std::vector<double> row;
      for (const auto& f : fields) {
        try {
          row.push_back(parse_double(f));
        } catch (const ParseError& e) {
          throw ParseError(e.what(), line_no);
        }
      }
      take_row(row);
    }
  } else if (vf == "binary") {
    auto in = open_in(with_suffix(base, ".vertices.bin"), true);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> row(columns);
      for (double& x : row) x = get_le(in);
      take_row(row);
    }
    if (in.peek() != std::char_traits<char>::eof()) throw ValidationError("vertex block has extra bytes");
  } else {
    throw ParseError("unknown vertex_format '" + vf + "'");
  }
  if (w.size() != n)
    throw ValidationError("vertex count " + std::to_string(w.size()) + " does not match n = " +
                          std::to_string(n));
  SpatialGraph g(std::move(pts), WeightVector(std::move(w)), edges, gm);
  if (hyp) g.set_hyperbolic(std::move(hc));
  return g;
}

// ---------------------------------------------------------------------------
// Results

std::string format_results(std::span<const ResultRecord> records, ResultFormat format) {
  if (format == ResultFormat::kJson) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : records) {
      arr.push_back({{"experiment", r.experiment},
                     {"config_digest", r.config_digest},
                     {"seed", r.seed},
                     {"n", r.n},
                     {"statistic", r.statistic},
                     {"value", format_double(r.value)},
                     {"stderr", format_double(r.std_error)},
                     {"timestamp", r.timestamp}});
    }
    return arr.dump(2) + "\n";
  }
  std::string out = std::string(kResultHeader) + "\n";
  for (const auto& r : records) {
    out += csv_field(r.experiment) + ',' + csv_field(r.config_digest) + ',' + std::to_string(r.seed) +
           ',' + std::to_string(r.n) + ',' + csv_field(r.statistic) + ',' + format_double(r.value) +
           ',' + format_double(r.std_error) + ',' + csv_field(r.timestamp) + '\n';
  }
  return out;
}

std::vector<ResultRecord> parse_results(const std::string& text, ResultFormat format) {
  std::vector<ResultRecord> out;
  if (format == ResultFormat::kJson) {
    nlohmann::json arr;
    try {
      arr = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("results JSON: ") + e.what());
    }
    if (!arr.is_array()) throw ParseError("results JSON must be an array");
    for (const auto& j : arr) {
      ResultRecord r;
      r.experiment = j.at("experiment").get<std::string>();
      r.config_digest = j.at("config_digest").get<std::string>();
      r.seed = j.at("seed").get<std::uint64_t>();
      r.n = j.at("n").get<std::uint64_t>();
      r.statistic = j.at("statistic").get<std::string>();
      r.value = parse_double(j.at("value").get<std::string>());
      r.std_error = parse_double(j.at("stderr").get<std::string>());
      r.timestamp = j.at("timestamp").get<std::string>();
      out.push_back(std::move(r));
    }
    return out;
  }
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line) || line != kResultHeader) throw ParseError("results CSV header mismatch", 1);
  ++line_no;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = parse_csv_line(line, line_no);
    if (f.size() != 8) throw ParseError("results CSV row needs 8 columns", line_no);
    try {
      out.push_back({f[0], f[1], parse_uint(f[2], "seed", line_no), parse_uint(f[3], "n", line_no),
                     f[4], parse_double(f[5]), parse_double(f[6]), f[7]});
    } catch (const ParseError& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return out;
}

void write_results(std::span<const ResultRecord> records, const fs::path& path, ResultFormat format) {
  auto out = open_out(path, true);
  out << format_results(records, format);
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::vector<ResultRecord> read_results(const fs::path& path, ResultFormat format) {
  auto in = open_in(path, true);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_results(buf.str(), format);
}

std::string config_digest(const std::map<std::string, std::string>& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& [k, v] : config) {  // std::map iterates in key order
    for (char c : k + "=" + v + "\n") {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string result_timestamp(bool wallclock) {
  std::time_t t = 0;
  if (const char* env = std::getenv("SOURCE_DATE_EPOCH"); env && *env) {
    t = static_cast<std::time_t>(std::strtoll(env, nullptr, 10));
  } else if (wallclock) {
    t = std::time(nullptr);
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// ---------------------------------------------------------------------------
// Histograms

nlohmann::json histogram_to_json(const NeighborhoodHistogram& h) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& [code, count] : h.counts()) {
    entries.push_back({{"code", code.hex()},
                       {"count", count},
                       {"proportion", h.proportion(code)},
                       {"oversized", code.is_oversized()}});
  }
  return {{"mode", to_string(h.mode())},
          {"K", h.k()},
          {"radius", h.radius()},
          {"total", h.total()},
          {"entries", entries}};
}

NeighborhoodHistogram histogram_from_json(const nlohmann::json& j) {
  const auto mode_text = j.at("mode").get<std::string>();
  BallMode mode;
  if (mode_text == "graph") mode = BallMode::kGraph;
  else if (mode_text == "euclidean") mode = BallMode::kEuclidean;
  else throw ParseError("histogram: unknown mode '" + mode_text + "'");
  NeighborhoodHistogram h(mode, j.at("K").get<std::size_t>(), j.at("radius").get<double>());
  for (const auto& e : j.at("entries"))
    h.add(CanonicalCode::from_hex(e.at("code").get<std::string>()), e.at("count").get<std::uint64_t>());
  if (h.total() != j.at("total").get<std::uint64_t>()) throw ValidationError("histogram: total mismatch");
  return h;
}

}  // namespace sirg
