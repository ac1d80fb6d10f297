#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "entrogd/cli/commands.hpp"

namespace entrogd::cli {

/// An external general-purpose compressor, run at its maximum level.
struct ExternalTool {
  std::string name;
  std::string program;
  std::vector<std::string> args;  // read stdin, write stdout
};

/// bzip2, lz4, snappy (snzip), zlib (pigz -z) and zstd.
std::vector<ExternalTool> default_tools();
std::optional<ExternalTool> find_tool(const std::string& name);
bool tool_available(const ExternalTool& tool);

/// Compressed size of `input` in bytes, or empty when the tool is missing or fails.
std::optional<std::uint64_t> run_external(const ExternalTool& tool, const std::filesystem::path& input,
                                          const std::filesystem::path& workdir);

/// Row-major binary dump of a table at its column precisions (the input the
/// external compressors see).
void write_binary(const Table& table, const std::filesystem::path& path);

struct BenchConfig {
  std::vector<std::filesystem::path> datasets;
  std::vector<std::string> tools;  // empty: default_tools()
  bool include_greedy = true;
  std::filesystem::path workdir;   // empty: a temporary directory
  RunConfig run;
};

/// Per-dataset CR for every method plus box-plot summaries per method.
Json cmd_bench(const BenchConfig& config);

struct ScalingConfig {
  std::size_t rows = 20000;
  std::vector<std::size_t> dims{4, 8, 16, 32};
  unsigned repeats = 5;  // best-of timing
  unsigned tau = 10;
  std::uint64_t seed = 0;
  bool include_greedy = true;
};

struct ScalingPoint {
  std::size_t d = 0;
  double entropy_seconds = 0.0;
  double greedy_seconds = 0.0;
  std::size_t entropy_bases = 0;
  std::size_t greedy_bases = 0;
};

struct ScalingResult {
  std::vector<ScalingPoint> points;
  double entropy_slope = 0.0;
  double greedy_slope = 0.0;
};

/// Configuration time against d on latent-cluster tables, with log-log slopes.
ScalingResult run_scaling(const ScalingConfig& config);
Json scaling_report(const ScalingConfig& config, const ScalingResult& result);

/// Least-squares slope of log(y) on log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct BoxStats {
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
};
BoxStats box_stats(std::vector<double> values);

}  // namespace entrogd::cli
