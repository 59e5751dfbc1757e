#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "sirg/graph.hpp"
#include "sirg/neighborhoods.hpp"

namespace sirg {

enum class VertexFormat { kCsv, kBinary };

/// Writes `base`.edges (one "i j" per line, i < j, sorted), `base`.meta
/// (key=value header) and, when the graph has spatial data,
/// `base`.vertices.csv or `base`.vertices.bin (little-endian doubles).
void write_graph(const SpatialGraph& g, const std::filesystem::path& base,
                 VertexFormat format = VertexFormat::kCsv);
SpatialGraph read_graph(const std::filesystem::path& base);

struct ResultRecord {
  std::string experiment;
  std::string config_digest;
  std::uint64_t seed = 0;
  std::uint64_t n = 0;
  std::string statistic;
  double value = 0.0;
  double std_error = 0.0;
  std::string timestamp;
  friend bool operator==(const ResultRecord&, const ResultRecord&) = default;
};

enum class ResultFormat { kCsv, kJson };

inline constexpr const char* kResultHeader =
    "experiment,config_digest,seed,n,statistic,value,stderr,timestamp";

std::string format_results(std::span<const ResultRecord> records, ResultFormat format);
std::vector<ResultRecord> parse_results(const std::string& text, ResultFormat format);
void write_results(std::span<const ResultRecord> records, const std::filesystem::path& path,
                   ResultFormat format);
std::vector<ResultRecord> read_results(const std::filesystem::path& path, ResultFormat format);

/// 17 significant digits; parses back to the identical double.
std::string format_double(double value);
double parse_double(const std::string& text);

/// FNV-1a over the sorted key=value lines, as 16 hex digits.
std::string config_digest(const std::map<std::string, std::string>& config);

/// ISO-8601 UTC stamp for result rows. Uses SOURCE_DATE_EPOCH when set, the
/// wall clock when asked to, and the epoch otherwise, so reruns are byte-identical.
std::string result_timestamp(bool wallclock = false);

nlohmann::json histogram_to_json(const NeighborhoodHistogram& h);
NeighborhoodHistogram histogram_from_json(const nlohmann::json& j);

}  // namespace sirg
