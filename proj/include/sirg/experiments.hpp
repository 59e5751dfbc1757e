#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sirg/generator.hpp"
#include "sirg/io.hpp"
#include "sirg/kernels.hpp"
#include "sirg/neighborhoods.hpp"
#include "sirg/stats.hpp"
#include "sirg/weights.hpp"

namespace sirg {

/// Flat key=value document. '#' starts a comment; blank lines are ignored.
std::map<std::string, std::string> parse_config_text(const std::string& text);
std::map<std::string, std::string> load_config_file(const std::filesystem::path& path);

struct ExperimentConfig {
  std::map<std::string, std::string> raw;  // as read, minus run-only keys (workers)

  KernelSpec kernel;
  WeightLaw law = law::Constant{1.0};
  std::optional<HrgModel> hrg;  // set for thrg / phrg: graphs come from the native sampler
  int dimension = 1;
  bool torus = false;
  SamplingMode mode = SamplingMode::kExact;

  std::vector<std::size_t> n_grid{100, 1000, 10000};
  std::size_t replicas = 50;
  std::size_t roots = 0;  // root samples per graph; 0 uses every vertex
  std::size_t limit_replicas = 10000;
  std::optional<double> limit_radius;  // default coupling_radius(a, m, K)

  BallMode ball = BallMode::kGraph;
  std::size_t k = 1;
  double ball_radius = 1.0;  // euclidean ball mode only
  std::size_t cap = kDefaultBallCap;

  double coupling_a = 2.0;
  double coupling_m = 3.0;
  std::vector<double> coupling_m_grid{2, 3, 4};
  std::size_t coupling_roots = 200;

  std::vector<double> c_list{1.2};
  std::size_t pairs = 200;

  std::vector<std::size_t> clustering_k{2, 3, 4};
  std::vector<std::size_t> moment_thresholds{5, 10, 20, 50};
  std::size_t w0_samples = 400;
  QuadratureSpec quadrature;

  std::vector<double> tail_t_grid{10, 30, 100};
  double tail_epsilon = 0.5;
  std::size_t tail_samples = 100000;
  double tail_t0 = 0.0;

  std::optional<double> assert_final_tv;
  std::optional<double> assert_final_exceedance;

  std::uint64_t seed = 1;
  unsigned workers = 1;
  bool override_gates = false;
  VertexFormat vertex_format = VertexFormat::kCsv;

  std::string digest() const;
  FiniteModel finite_model() const;
  /// Resolved alpha of the kernel (declared, else model default).
  double alpha() const;
  double resolved_limit_radius() const;
};

/// Builds and validates a config. Unknown keys, malformed values and invalid
/// model parameters raise ValidationError.
ExperimentConfig make_config(const std::map<std::string, std::string>& raw);

/// One finite graph of the configured model; replica r at size n.
SpatialGraph generate_replica(const ExperimentConfig& config, std::size_t n, std::size_t replica);

struct Check {
  std::string name;
  bool passed = true;
  std::string detail;
};

struct ExperimentResult {
  std::vector<ResultRecord> records;
  std::vector<Check> checks;
  std::vector<std::string> warnings;
  /// Extra JSON artifacts, keyed by file stem.
  std::map<std::string, nlohmann::json> artifacts;

  bool passed() const;
};

struct RunOptions {
  bool wallclock = false;
};

ExperimentResult run_neighborhood_convergence(const ExperimentConfig& config, const RunOptions& opts = {});
ExperimentResult run_degree_law(const ExperimentConfig& config, const RunOptions& opts = {});
ExperimentResult run_clustering(const ExperimentConfig& config, const RunOptions& opts = {});
ExperimentResult run_distances(const ExperimentConfig& config, const RunOptions& opts = {});
ExperimentResult run_coupling(const ExperimentConfig& config, const RunOptions& opts = {});
ExperimentResult run_verify_kernel(const ExperimentConfig& config, const RunOptions& opts = {});

/// True when b does not exceed a by more than `sigmas` joint standard errors.
bool not_increasing(double a, double se_a, double b, double se_b, double sigmas = 2.0);
bool not_decreasing(double a, double se_a, double b, double se_b, double sigmas = 2.0);

/// Jackknife standard error of a statistic over leave-one-out values.
double jackknife_std_error(const std::vector<double>& leave_one_out);

}  // namespace sirg
