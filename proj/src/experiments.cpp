#include "sirg/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "sirg/errors.hpp"
#include "sirg/parallel.hpp"

namespace sirg {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

class Reader {
 public:
  explicit Reader(const std::map<std::string, std::string>& raw) : raw_(raw) {}

  bool has(const std::string& key) const { return raw_.count(key) > 0; }

  std::string text(const std::string& key, const std::string& fallback) {
    used_.insert(key);
    auto it = raw_.find(key);
    return it == raw_.end() ? fallback : it->second;
  }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return used(key), fallback;
    return to_number(key, text(key, ""));
  }

  std::optional<double> maybe_number(const std::string& key) {
    if (!has(key)) return used(key), std::nullopt;
    return to_number(key, text(key, ""));
  }

  std::uint64_t integer(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return used(key), fallback;
    return to_integer(key, text(key, ""));
  }

  bool flag(const std::string& key, bool fallback) {
    if (!has(key)) return used(key), fallback;
    const auto v = text(key, "");
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ValidationError("config key '" + key + "' expects true or false, got '" + v + "'");
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) {
    if (!has(key)) return used(key), fallback;
    std::vector<double> out;
    for (const auto& item : items(key)) out.push_back(to_number(key, item));
    return out;
  }

  std::vector<std::size_t> integers(const std::string& key, std::vector<std::size_t> fallback) {
    if (!has(key)) return used(key), fallback;
    std::vector<std::size_t> out;
    for (const auto& item : items(key)) out.push_back(to_integer(key, item));
    return out;
  }

  void reject_unknown() const {
    for (const auto& [key, value] : raw_)
      if (!used_.count(key)) throw ValidationError("unknown config key '" + key + "'");
  }

 private:
  void used(const std::string& key) { used_.insert(key); }

  std::vector<std::string> items(const std::string& key) {
    std::vector<std::string> out;
    std::istringstream in(text(key, ""));
    std::string item;
    while (std::getline(in, item, ',')) out.push_back(trim(item));
    if (out.empty()) throw ValidationError("config key '" + key + "' expects a non-empty list");
    return out;
  }

  static double to_number(const std::string& key, const std::string& v) {
    try {
      return parse_double(v);
    } catch (const ParseError&) {
      throw ValidationError("config key '" + key + "' expects a number, got '" + v + "'");
    }
  }

  static std::uint64_t to_integer(const std::string& key, const std::string& v) {
    const double x = to_number(key, v);
    if (!(x >= 0) || x != std::floor(x) || x > 1.8e19)
      throw ValidationError("config key '" + key + "' expects a nonnegative integer, got '" + v + "'");
    return static_cast<std::uint64_t>(x);
  }

  const std::map<std::string, std::string>& raw_;
  std::set<std::string> used_;
};

KernelSpec read_kernel(Reader& r, int d, ExperimentConfig& cfg) {
  KernelSpec spec;
  const auto name = r.text("kernel", "threshold");
  if (name == "constant") {
    spec.model = kernel::Constant{r.number("kernel.p", 0.0)};
  } else if (name == "threshold") {
    spec.model = kernel::Threshold{r.number("kernel.r0", 1.0)};
  } else if (name == "product") {
    spec.model = kernel::Product::power(r.number("kernel.a", 2.0), r.number("kernel.b", 1.0),
                                        r.number("kernel.c", 1.0), r.number("kernel.beta_p", 1.0));
  } else if (name == "girg") {
    spec.model = kernel::Girg{r.number("kernel.alpha", 2.0), d};
  } else if (name == "csfp") {
    spec.model = kernel::Csfp{r.number("kernel.lambda", 1.0), r.number("kernel.alpha", 3.0)};
  } else if (name == "wdrcm") {
    spec.model = kernel::Wdrcm{r.number("kernel.eta", 2.0), r.number("kernel.gamma", 1.0), d};
  } else if (name == "thrg" || name == "phrg") {
    HrgModel hrg{r.number("kernel.alpha_h", 1.0), r.number("kernel.nu", 1.0), std::nullopt};
    if (name == "phrg") hrg.t_h = r.number("kernel.t_h", 0.5);
    try {
      validate(hrg);
    } catch (const ParameterError& e) {
      throw ValidationError(e.what());
    }
    spec = hrg_kernel(hrg);
    cfg.hrg = hrg;
  } else {
    throw ValidationError("unknown kernel '" + name + "'");
  }
  spec.tail_exponent = r.maybe_number("kernel.tail_exponent");
  spec.tail_prefactor = r.number("kernel.tail_prefactor", 1.0);
  return spec;
}

WeightLaw read_law(Reader& r, const ExperimentConfig& cfg) {
  if (cfg.hrg) {
    if (r.has("weights")) throw ValidationError("hyperbolic kernels fix their own weight law");
    return law::HrgRadial{cfg.hrg->alpha_h, cfg.hrg->nu, 0.0};
  }
  const auto name = r.text("weights", "constant");
  if (name == "constant") return law::Constant{r.number("weights.value", 1.0)};
  if (name == "uniform") return law::Uniform01{};
  if (name == "pareto") return law::Pareto{r.number("weights.beta", 2.0)};
  if (name == "power_law")
    return law::PowerLawTail{r.number("weights.beta_g", 2.5), r.number("weights.c_g", 1.0),
                             r.number("weights.big_c_g", 1.0)};
  if (name == "empirical") {
    const auto path = r.text("weights.path", "");
    if (path.empty()) throw ValidationError("empirical weights need weights.path");
    return law::Empirical{load_weight_sequence(path)};
  }
  throw ValidationError("unknown weight law '" + name + "'");
}

class Recorder {
 public:
  Recorder(std::string experiment, const ExperimentConfig& cfg, const RunOptions& opts,
           std::vector<ResultRecord>& out)
      : experiment_(std::move(experiment)),
        digest_(cfg.digest()),
        timestamp_(result_timestamp(opts.wallclock)),
        seed_(cfg.seed),
        out_(out) {}

  void add(std::uint64_t n, const std::string& statistic, double value, double std_error = 0.0) {
    out_.push_back({experiment_, digest_, seed_, n, statistic, value, std_error, timestamp_});
  }

 private:
  std::string experiment_, digest_, timestamp_;
  std::uint64_t seed_;
  std::vector<ResultRecord>& out_;
};

std::string param(const std::string& name, double v) { return name + "=" + format_double(v); }

double joint(double a, double b) { return std::sqrt(a * a + b * b); }

void gate_limit(const ExperimentConfig& cfg, ExperimentResult& res) {
  const double alpha = cfg.alpha();
  if (alpha > cfg.dimension) return;
  const std::string msg = "kernel tail exponent " + format_double(alpha) + " does not exceed d = " +
                          std::to_string(cfg.dimension);
  if (!cfg.override_gates) throw ValidationError(msg + " (set gates.override=true to run anyway)");
  res.warnings.push_back(msg + "; gate overridden");
}

std::vector<std::size_t> pick_roots(const ExperimentConfig& cfg, std::size_t n, std::size_t replica) {
  std::vector<std::size_t> roots;
  if (cfg.roots == 0 || n == 0) {
    roots.resize(n);
    for (std::size_t i = 0; i < n; ++i) roots[i] = i;
    return roots;
  }
  auto rng = make_rng(cfg.seed, {static_cast<std::uint64_t>(Stream::kRoots), n, replica});
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  roots.resize(cfg.roots);
  for (auto& v : roots) v = pick(rng);
  return roots;
}

// TV between two count maps, the first optionally reduced by a third.
using CodeCounts = std::map<CanonicalCode, std::uint64_t>;

double tv_counts(const CodeCounts& a, std::uint64_t total_a, const CodeCounts* minus_a,
                 std::uint64_t minus_total, const CodeCounts& b, std::uint64_t total_b,
                 const CodeCounts* minus_b = nullptr, std::uint64_t minus_total_b = 0) {
  const double ta = static_cast<double>(total_a - minus_total);
  const double tb = static_cast<double>(total_b - minus_total_b);
  auto count = [](const CodeCounts& m, const CodeCounts* minus, const CanonicalCode& c) {
    auto it = m.find(c);
    std::uint64_t v = it == m.end() ? 0 : it->second;
    if (minus) {
      auto jt = minus->find(c);
      if (jt != minus->end()) v -= jt->second;
    }
    return static_cast<double>(v);
  };
  double sum = 0.0;
  for (const auto& [code, c] : a) {
    const double pa = ta > 0 ? count(a, minus_a, code) / ta : 0.0;
    const double pb = tb > 0 ? count(b, minus_b, code) / tb : 0.0;
    sum += std::abs(pa - pb);
  }
  for (const auto& [code, c] : b) {
    if (a.count(code)) continue;
    sum += tb > 0 ? count(b, minus_b, code) / tb : 0.0;
  }
  return std::min(1.0, sum / 2);
}

NeighborhoodHistogram empty_histogram(const ExperimentConfig& cfg) {
  return cfg.ball == BallMode::kGraph ? NeighborhoodHistogram(BallMode::kGraph, cfg.k)
                                      : NeighborhoodHistogram(BallMode::kEuclidean, 0, cfg.ball_radius);
}

NeighborhoodHistogram limit_block(const ExperimentConfig& cfg, std::size_t block, std::size_t reps) {
  const double mw = limit_mean_weight(cfg.kernel, cfg.law);
  const auto seed = derive_seed(cfg.seed, {static_cast<std::uint64_t>(Stream::kLimit), block});
  if (cfg.ball == BallMode::kGraph)
    return limit_neighborhood_distribution(cfg.kernel, cfg.law, cfg.k, cfg.resolved_limit_radius(),
                                           reps, cfg.dimension, mw, seed, cfg.workers, cfg.cap);
  std::vector<CanonicalCode> codes(reps);
  parallel_for(reps, cfg.workers, [&](std::size_t rep) {
    const auto sub = derive_seed(seed, {static_cast<std::uint64_t>(Stream::kReplica), rep});
    const auto g = sample_limit_ball(cfg.kernel, cfg.law, cfg.ball_radius, cfg.dimension, mw, sub);
    codes[rep] = canonical_code(euclidean_ball_subgraph(g, 0, cfg.ball_radius, cfg.cap));
  });
  auto hist = empty_histogram(cfg);
  for (const auto& c : codes) hist.add(c);
  return hist;
}

constexpr std::size_t kLimitBlocks = 20;

std::vector<double> pmf_of(const DegreeHistogram& h) { return h.pmf(); }

DegreeHistogram without(const std::vector<DegreeHistogram>& parts, std::size_t skip) {
  DegreeHistogram out;
  for (std::size_t i = 0; i < parts.size(); ++i)
    if (i != skip) out.merge(parts[i]);
  return out;
}

void trend_checks(ExperimentResult& res, const std::string& what, const std::vector<std::size_t>& ns,
                  const std::vector<double>& v, const std::vector<double>& se, bool decreasing) {
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    const bool ok = decreasing ? not_increasing(v[i], se[i], v[i + 1], se[i + 1])
                               : not_decreasing(v[i], se[i], v[i + 1], se[i + 1]);
    std::ostringstream detail;
    detail << what << "(n=" << ns[i] << ") = " << v[i] << " +/- " << se[i] << ", " << what
           << "(n=" << ns[i + 1] << ") = " << v[i + 1] << " +/- " << se[i + 1];
    res.checks.push_back({what + (decreasing ? " nonincreasing " : " nondecreasing ") +
                              std::to_string(ns[i]) + "->" + std::to_string(ns[i + 1]),
                          ok, detail.str()});
  }
}

}  // namespace

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected key = value", line_no);
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) throw ParseError("empty key", line_no);
    if (!out.emplace(key, trim(line.substr(eq + 1))).second)
      throw ParseError("duplicate key '" + key + "'", line_no);
  }
  return out;
}

std::map<std::string, std::string> load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

ExperimentConfig make_config(const std::map<std::string, std::string>& raw) {
  ExperimentConfig cfg;
  Reader r(raw);
  cfg.dimension = static_cast<int>(r.integer("d", 1));
  if (cfg.dimension < 1 || cfg.dimension > 8) throw ValidationError("d must be in 1..8");
  cfg.kernel = read_kernel(r, cfg.dimension, cfg);
  cfg.law = read_law(r, cfg);
  if (cfg.hrg && cfg.dimension != 1) throw ValidationError("hyperbolic kernels live in d = 1");
  try {
    validate(cfg.kernel);
    validate(cfg.law);
  } catch (const ParameterError& e) {
    throw ValidationError(e.what());
  }

  cfg.torus = r.flag("torus", false);
  const auto mode = r.text("mode", "exact");
  if (mode == "exact") cfg.mode = SamplingMode::kExact;
  else if (mode == "grid") cfg.mode = SamplingMode::kGrid;
  else throw ValidationError("mode must be exact or grid");

  cfg.n_grid = r.integers("n_grid", cfg.n_grid);
  for (auto n : cfg.n_grid)
    if (n < 2) throw ValidationError("n_grid entries must be >= 2");
  cfg.replicas = r.integer("replicas", cfg.replicas);
  if (cfg.replicas < 1) throw ValidationError("replicas must be >= 1");
  cfg.roots = r.integer("roots", cfg.roots);
  cfg.limit_replicas = r.integer("limit.replicas", cfg.limit_replicas);
  if (cfg.limit_replicas < 2) throw ValidationError("limit.replicas must be >= 2");
  cfg.limit_radius = r.maybe_number("limit.radius");
  if (cfg.limit_radius && !(*cfg.limit_radius > 0)) throw ValidationError("limit.radius must be > 0");

  const auto ball = r.text("ball", "graph");
  if (ball == "graph") cfg.ball = BallMode::kGraph;
  else if (ball == "euclidean") cfg.ball = BallMode::kEuclidean;
  else throw ValidationError("ball must be graph or euclidean");
  cfg.k = r.integer("K", cfg.k);
  if (cfg.k < 1) throw ValidationError("K must be >= 1");
  cfg.ball_radius = r.number("ball.radius", cfg.ball_radius);
  if (!(cfg.ball_radius > 0)) throw ValidationError("ball.radius must be > 0");
  cfg.cap = r.integer("ball.cap", cfg.cap);
  if (cfg.cap < 1 || cfg.cap > RootedGraph::kMaxVertices) throw ValidationError("ball.cap must be in 1..64");

  cfg.coupling_a = r.number("coupling.a", cfg.coupling_a);
  cfg.coupling_m = r.number("coupling.m", cfg.coupling_m);
  cfg.coupling_m_grid = r.numbers("coupling.m_grid", cfg.coupling_m_grid);
  cfg.coupling_roots = r.integer("coupling.roots", cfg.coupling_roots);
  if (!(cfg.coupling_a > 1) || !(cfg.coupling_m > 1)) throw ValidationError("coupling needs a > 1 and m > 1");

  cfg.c_list = r.numbers("distances.C", cfg.c_list);
  cfg.pairs = r.integer("distances.pairs", cfg.pairs);
  if (cfg.pairs < 1) throw ValidationError("distances.pairs must be >= 1");

  cfg.clustering_k = r.integers("clustering.k", cfg.clustering_k);
  cfg.moment_thresholds = r.integers("degree.thresholds", cfg.moment_thresholds);
  cfg.w0_samples = r.integer("degree.w0_samples", cfg.w0_samples);
  if (cfg.w0_samples < 1) throw ValidationError("degree.w0_samples must be >= 1");
  cfg.quadrature.inner_samples = r.integer("degree.inner_samples", cfg.quadrature.inner_samples);
  if (cfg.quadrature.inner_samples < 1) throw ValidationError("degree.inner_samples must be >= 1");

  cfg.tail_t_grid = r.numbers("tail.t_grid", cfg.tail_t_grid);
  cfg.tail_epsilon = r.number("tail.epsilon", cfg.tail_epsilon);
  cfg.tail_samples = r.integer("tail.samples", cfg.tail_samples);
  cfg.tail_t0 = r.number("tail.t0", cfg.tail_t0);

  cfg.assert_final_tv = r.maybe_number("assert.final_tv");
  cfg.assert_final_exceedance = r.maybe_number("assert.final_exceedance");

  cfg.seed = r.integer("seed", cfg.seed);
  cfg.workers = static_cast<unsigned>(std::max<std::uint64_t>(1, r.integer("workers", 1)));
  cfg.override_gates = r.flag("gates.override", false);
  const auto vf = r.text("vertex_format", "csv");
  if (vf == "csv") cfg.vertex_format = VertexFormat::kCsv;
  else if (vf == "binary") cfg.vertex_format = VertexFormat::kBinary;
  else throw ValidationError("vertex_format must be csv or binary");

  r.reject_unknown();
  cfg.raw = raw;
  cfg.raw.erase("workers");
  return cfg;
}

std::string ExperimentConfig::digest() const {
  auto keys = raw;
  keys.erase("seed");
  return config_digest(keys);
}

FiniteModel ExperimentConfig::finite_model() const {
  return FiniteModel{kernel, law, dimension, torus, mode};
}

double ExperimentConfig::alpha() const {
  const auto a = tail_exponent(kernel);
  if (!a) throw ValidationError("kernel " + kernel_id(kernel) + " needs kernel.tail_exponent");
  return *a;
}

double ExperimentConfig::resolved_limit_radius() const {
  if (limit_radius) return *limit_radius;
  return coupling_radius(coupling_a, coupling_m, k);
}

SpatialGraph generate_replica(const ExperimentConfig& config, std::size_t n, std::size_t replica) {
  const auto seed = derive_seed(config.seed, {static_cast<std::uint64_t>(Stream::kReplica), n, replica});
  if (config.hrg) return generate_hrg_native(n, *config.hrg, seed);
  return generate_finite(n, config.finite_model(), seed, 1);
}

bool ExperimentResult::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

bool not_increasing(double a, double se_a, double b, double se_b, double sigmas) {
  return b <= a + sigmas * joint(se_a, se_b);
}

bool not_decreasing(double a, double se_a, double b, double se_b, double sigmas) {
  return b >= a - sigmas * joint(se_a, se_b);
}

double jackknife_std_error(const std::vector<double>& leave_one_out) {
  const std::size_t m = leave_one_out.size();
  if (m < 2) return 0.0;
  double mean = 0.0;
  for (double v : leave_one_out) mean += v;
  mean /= static_cast<double>(m);
  double ss = 0.0;
  for (double v : leave_one_out) ss += (v - mean) * (v - mean);
  return std::sqrt(ss * static_cast<double>(m - 1) / static_cast<double>(m));
}

// ---------------------------------------------------------------------------

ExperimentResult run_neighborhood_convergence(const ExperimentConfig& cfg, const RunOptions& opts) {
  ExperimentResult res;
  gate_limit(cfg, res);
  Recorder rec("neighborhoods", cfg, opts, res.records);

  const std::size_t blocks = std::min(kLimitBlocks, cfg.limit_replicas);
  std::vector<NeighborhoodHistogram> limit_parts;
  auto limit = empty_histogram(cfg);
  for (std::size_t b = 0; b < blocks; ++b) {
    const std::size_t reps = cfg.limit_replicas * (b + 1) / blocks - cfg.limit_replicas * b / blocks;
    limit_parts.push_back(limit_block(cfg, b, reps));
    limit.merge(limit_parts.back());
  }
  const CanonicalCode isolated = canonical_code(RootedGraph(1, 0));
  rec.add(0, "limit_radius", cfg.ball == BallMode::kGraph ? cfg.resolved_limit_radius() : cfg.ball_radius);
  rec.add(0, "limit_codes", static_cast<double>(limit.counts().size()));
  rec.add(0, "limit_oversized", limit.proportion(CanonicalCode::oversized()));
  if (cfg.ball == BallMode::kGraph) rec.add(0, "limit_isolated", limit.proportion(isolated));

  std::vector<double> tvs, tv_se, spreads;
  nlohmann::json hist_json = {{"limit", histogram_to_json(limit)}, {"empirical", nlohmann::json::object()}};
  for (std::size_t n : cfg.n_grid) {
    std::vector<NeighborhoodHistogram> parts(cfg.replicas, empty_histogram(cfg));
    std::vector<double> isolated_frac(cfg.replicas);
    parallel_for(cfg.replicas, cfg.workers, [&](std::size_t r) {
      const auto g = generate_replica(cfg, n, r);
      for (std::size_t v : pick_roots(cfg, n, r)) {
        const auto h = cfg.ball == BallMode::kGraph ? graph_ball(g, v, cfg.k, cfg.cap)
                                                    : euclidean_ball_subgraph(g, v, cfg.ball_radius, cfg.cap);
        parts[r].add(canonical_code(h));
      }
      std::size_t zero = 0;
      for (std::size_t v = 0; v < g.size(); ++v) zero += g.degree(v) == 0;
      isolated_frac[r] = static_cast<double>(zero) / static_cast<double>(g.size());
    });
    auto pooled = empty_histogram(cfg);
    for (const auto& p : parts) pooled.merge(p);
    const double tv = tv_distance(pooled, limit);

    std::vector<double> emp_loo, lim_loo_n;
    if (parts.size() > 1)
      for (const auto& p : parts)
        emp_loo.push_back(tv_counts(pooled.counts(), pooled.total(), &p.counts(), p.total(),
                                    limit.counts(), limit.total()));
    for (const auto& part : limit_parts)
      lim_loo_n.push_back(tv_counts(pooled.counts(), pooled.total(), nullptr, 0, limit.counts(),
                                    limit.total(), &part.counts(), part.total()));
    const double emp_se = jackknife_std_error(emp_loo);
    const double se = joint(emp_se, jackknife_std_error(lim_loo_n));

    RunningStats iso;
    for (double f : isolated_frac) iso.add(f);
    tvs.push_back(tv);
    tv_se.push_back(emp_se);
    spreads.push_back(iso.stddev());
    rec.add(n, "tv", tv, se);
    rec.add(n, "isolated_mean", iso.mean(), iso.std_error());
    rec.add(n, "isolated_spread", iso.stddev());
    rec.add(n, "oversized", pooled.proportion(CanonicalCode::oversized()));
    rec.add(n, "codes", static_cast<double>(pooled.counts().size()));
    hist_json["empirical"][std::to_string(n)] = histogram_to_json(pooled);
  }
  res.artifacts["neighborhood_histograms"] = hist_json;

  // The reference side is shared by every n, so trends use the empirical spread only.
  trend_checks(res, "tv", cfg.n_grid, tvs, tv_se, true);
  if (spreads.size() > 1)
    res.checks.push_back({"isolated spread shrinks", spreads.back() <= spreads.front(),
                          "stddev " + format_double(spreads.front()) + " -> " + format_double(spreads.back())});
  if (cfg.assert_final_tv)
    res.checks.push_back({"final tv <= " + format_double(*cfg.assert_final_tv),
                          tvs.back() <= *cfg.assert_final_tv, "tv = " + format_double(tvs.back())});
  return res;
}

ExperimentResult run_degree_law(const ExperimentConfig& cfg, const RunOptions& opts) {
  ExperimentResult res;
  gate_limit(cfg, res);
  Recorder rec("degree-law", cfg, opts, res.records);

  std::vector<std::vector<DegreeHistogram>> per_n;
  std::size_t max_degree = 0;
  for (std::size_t n : cfg.n_grid) {
    std::vector<DegreeHistogram> parts(cfg.replicas);
    parallel_for(cfg.replicas, cfg.workers, [&](std::size_t r) {
      const auto g = generate_replica(cfg, n, r);
      for (std::size_t v : pick_roots(cfg, n, r)) parts[r].add(g.degree(v));
    });
    for (const auto& p : parts) max_degree = std::max(max_degree, p.counts.size());
    per_n.push_back(std::move(parts));
  }

  auto oracle_rng = make_rng(cfg.seed, Stream::kOracle);
  const auto table = mixed_poisson_table(cfg.kernel, cfg.law, cfg.dimension, max_degree + 20,
                                         cfg.w0_samples, cfg.quadrature, oracle_rng, cfg.workers);
  std::vector<double> oracle;
  double oracle_se = 0.0, mass = 0.0;
  for (std::size_t k = 0; k < table.size(); ++k) {
    oracle.push_back(table[k].value);
    oracle_se += table[k].std_error / 2;
    mass += table[k].value;
    rec.add(0, "oracle_pmf_k=" + std::to_string(k), table[k].value, table[k].std_error);
  }
  rec.add(0, "oracle_mass", mass);

  std::vector<double> tvs, tv_se;
  for (std::size_t i = 0; i < cfg.n_grid.size(); ++i) {
    const std::size_t n = cfg.n_grid[i];
    const auto& parts = per_n[i];
    const auto pooled = without(parts, parts.size());
    const double tv = tv_distance(pooled, oracle);
    std::vector<double> loo;
    if (parts.size() > 1)
      for (std::size_t r = 0; r < parts.size(); ++r) loo.push_back(tv_distance(without(parts, r), oracle));
    const double emp_se = jackknife_std_error(loo);
    const double se = joint(emp_se, oracle_se);
    tvs.push_back(tv);
    tv_se.push_back(emp_se);
    rec.add(n, "tv", tv, se);
    rec.add(n, "mean_degree", pooled.mean);
    const auto pmf = pmf_of(pooled);
    for (std::size_t m : cfg.moment_thresholds) {
      double tail = 0.0;
      for (std::size_t k = m + 1; k < pmf.size(); ++k) tail += static_cast<double>(k) * pmf[k];
      rec.add(n, "tail_moment_M=" + std::to_string(m), tail);
    }
  }
  // The reference side is shared by every n, so trends use the empirical spread only.
  trend_checks(res, "tv", cfg.n_grid, tvs, tv_se, true);
  if (cfg.assert_final_tv)
    res.checks.push_back({"final tv <= " + format_double(*cfg.assert_final_tv),
                          tvs.back() <= *cfg.assert_final_tv, "tv = " + format_double(tvs.back())});
  return res;
}

ExperimentResult run_clustering(const ExperimentConfig& cfg, const RunOptions& opts) {
  ExperimentResult res;
  gate_limit(cfg, res);
  Recorder rec("clustering", cfg, opts, res.records);
  bool global_ok = cfg.alpha() > 2 * cfg.dimension;
  if (!global_ok) {
    if (cfg.override_gates) {
      res.warnings.push_back("global clustering needs alpha > 2d; gate overridden");
      global_ok = true;
    } else {
      res.warnings.push_back("global clustering skipped: alpha does not exceed 2d");
    }
  }

  const auto limit = limit_clustering_estimates(
      cfg.kernel, cfg.law, cfg.resolved_limit_radius(), cfg.limit_replicas, cfg.dimension,
      limit_mean_weight(cfg.kernel, cfg.law),
      derive_seed(cfg.seed, {static_cast<std::uint64_t>(Stream::kLimit)}), cfg.workers);
  rec.add(0, "limit_triangles", limit.triangles.mean(), limit.triangles.std_error());
  rec.add(0, "limit_wedges", limit.wedges.mean(), limit.wedges.std_error());
  rec.add(0, "limit_lcc", limit.local.mean(), limit.local.std_error());
  if (global_ok) rec.add(0, "limit_gcc", limit.global_ratio(), limit.global_ratio_std_error());
  for (std::size_t k : cfg.clustering_k) {
    const auto [est, low] = limit.clustering_at(k);
    rec.add(0, "limit_cc_k=" + std::to_string(k), est.value, est.std_error);
    if (low) res.warnings.push_back("limit CC at k = " + std::to_string(k) + " has fewer than 30 hits");
  }

  RunningStats last_gcc, last_lcc;
  std::map<std::size_t, RunningStats> last_cck;
  for (std::size_t n : cfg.n_grid) {
    std::vector<ClusteringReport> reports(cfg.replicas);
    parallel_for(cfg.replicas, cfg.workers, [&](std::size_t r) {
      reports[r] = clustering_report(generate_replica(cfg, n, r), cfg.clustering_k);
    });
    RunningStats gcc, lcc;
    std::map<std::size_t, RunningStats> cck;
    for (const auto& rep : reports) {
      gcc.add(rep.global);
      lcc.add(rep.local);
      for (auto [k, v] : rep.by_degree) cck[k].add(v);
    }
    if (global_ok) rec.add(n, "gcc", gcc.mean(), gcc.std_error());
    rec.add(n, "lcc", lcc.mean(), lcc.std_error());
    for (std::size_t k : cfg.clustering_k) rec.add(n, "cc_k=" + std::to_string(k), cck[k].mean(), cck[k].std_error());
    last_gcc = gcc;
    last_lcc = lcc;
    last_cck = cck;
  }

  auto within = [&](const std::string& name, double a, double sa, double b, double sb) {
    const double band = 3 * joint(sa, sb);
    std::ostringstream detail;
    detail << "finite " << a << " +/- " << sa << ", limit " << b << " +/- " << sb;
    res.checks.push_back({name + " within 3 sigma of limit", std::abs(a - b) <= band, detail.str()});
  };
  within("lcc", last_lcc.mean(), last_lcc.std_error(), limit.local.mean(), limit.local.std_error());
  if (global_ok)
    within("gcc", last_gcc.mean(), last_gcc.std_error(), limit.global_ratio(), limit.global_ratio_std_error());
  return res;
}

ExperimentResult run_distances(const ExperimentConfig& cfg, const RunOptions& opts) {
  ExperimentResult res;
  gate_limit(cfg, res);
  Recorder rec("distances", cfg, opts, res.records);
  const double alpha = cfg.alpha();
  const double critical = critical_distance_constant(alpha, cfg.dimension);
  rec.add(0, "critical_constant", critical);
  for (auto n : cfg.n_grid)
    if (n < 16) throw ValidationError("distances need n >= 16");

  std::map<double, std::vector<double>> frac, frac_se;
  for (std::size_t n : cfg.n_grid) {
    std::vector<std::vector<std::uint32_t>> per(cfg.replicas);
    parallel_for(cfg.replicas, cfg.workers, [&](std::size_t r) {
      const auto g = generate_replica(cfg, n, r);
      auto rng = make_rng(cfg.seed, {static_cast<std::uint64_t>(Stream::kPairs), n, r});
      per[r] = typical_distances(g, cfg.pairs, rng);
    });
    std::vector<std::uint32_t> samples;
    for (const auto& p : per) samples.insert(samples.end(), p.begin(), p.end());
    RunningStats finite_mean;
    for (auto d : samples)
      if (d != kInfiniteDistance) finite_mean.add(d);
    for (double c : cfg.c_list) {
      const auto f = distance_threshold_fraction(samples, n, c, alpha, cfg.dimension);
      rec.add(n, param("exceedance_C", c), f.fraction, f.std_error);
      frac[c].push_back(f.fraction);
      frac_se[c].push_back(f.std_error);
      if (c == cfg.c_list.front()) {
        rec.add(n, "finite_fraction", f.finite_fraction);
        rec.add(n, "mean_finite_distance", finite_mean.mean(), finite_mean.std_error());
      }
    }
  }
  for (double c : cfg.c_list) {
    if (c >= critical) {
      res.warnings.push_back(param("C", c) + " is not below the critical constant; reported only");
      continue;
    }
    trend_checks(res, param("exceedance_C", c), cfg.n_grid, frac[c], frac_se[c], false);
    if (cfg.assert_final_exceedance)
      res.checks.push_back({param("final exceedance_C", c) + " >= " + format_double(*cfg.assert_final_exceedance),
                            frac[c].back() >= *cfg.assert_final_exceedance,
                            "fraction = " + format_double(frac[c].back())});
  }
  return res;
}

ExperimentResult run_coupling(const ExperimentConfig& cfg, const RunOptions& opts) {
  ExperimentResult res;
  gate_limit(cfg, res);
  Recorder rec("coupling", cfg, opts, res.records);
  std::vector<double> radii;
  for (double m : cfg.coupling_m_grid) {
    radii.push_back(coupling_radius(cfg.coupling_a, m, cfg.k));
    rec.add(0, param("radius_m", m), radii.back());
  }
  for (std::size_t n : cfg.n_grid) {
    std::vector<std::vector<std::uint64_t>> fails(cfg.replicas, std::vector<std::uint64_t>(radii.size(), 0));
    std::vector<std::uint64_t> trials(cfg.replicas, 0);
    parallel_for(cfg.replicas, cfg.workers, [&](std::size_t r) {
      const auto g = generate_replica(cfg, n, r);
      auto rng = make_rng(cfg.seed, {static_cast<std::uint64_t>(Stream::kRoots), n, r});
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      for (std::size_t s = 0; s < cfg.coupling_roots; ++s) {
        const std::size_t root = pick(rng);
        for (std::size_t j = 0; j < radii.size(); ++j)
          fails[r][j] += coupling_check_radius(g, root, radii[j], cfg.k) ? 0 : 1;
        ++trials[r];
      }
    });
    std::uint64_t total = 0;
    for (auto t : trials) total += t;
    std::vector<double> rate, se;
    for (std::size_t j = 0; j < radii.size(); ++j) {
      std::uint64_t f = 0;
      for (const auto& row : fails) f += row[j];
      const double p = total ? static_cast<double>(f) / static_cast<double>(total) : 0.0;
      rate.push_back(p);
      se.push_back(total ? std::sqrt(p * (1 - p) / static_cast<double>(total)) : 0.0);
      rec.add(n, param("failure_rate_m", cfg.coupling_m_grid[j]), p, se.back());
    }
    for (std::size_t j = 0; j + 1 < rate.size(); ++j) {
      std::ostringstream detail;
      detail << "n=" << n << ": " << rate[j] << " +/- " << se[j] << " -> " << rate[j + 1] << " +/- " << se[j + 1];
      res.checks.push_back({"failure rate nonincreasing in m (" + format_double(cfg.coupling_m_grid[j]) + "->" +
                                format_double(cfg.coupling_m_grid[j + 1]) + ", n=" + std::to_string(n) + ")",
                            not_increasing(rate[j], se[j], rate[j + 1], se[j + 1]), detail.str()});
    }
  }
  return res;
}

ExperimentResult run_verify_kernel(const ExperimentConfig& cfg, const RunOptions& opts) {
  ExperimentResult res;
  Recorder rec("verify-kernel", cfg, opts, res.records);
  auto rng = make_rng(cfg.seed, Stream::kOracle);
  const auto report = verify_tail_bound(cfg.kernel, cfg.law, cfg.tail_t_grid, cfg.tail_epsilon,
                                        cfg.tail_samples, rng, cfg.tail_t0);
  rec.add(0, "tail_exponent", report.exponent);
  rec.add(0, "tail_prefactor", report.prefactor);
  for (const auto& p : report.points) {
    rec.add(0, param("tail_estimate_t", p.t), p.estimate, p.std_error);
    rec.add(0, param("tail_bound_t", p.t), p.bound);
    std::ostringstream detail;
    detail << "estimate " << p.estimate << " +/- " << p.std_error << ", bound " << p.bound;
    res.checks.push_back({param("tail bound t", p.t), p.passed, detail.str()});
  }
  return res;
}

}  // namespace sirg
