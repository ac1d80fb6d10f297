#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "entrogd/analytics.hpp"
#include "entrogd/codec.hpp"
#include "entrogd/cli/csv.hpp"

namespace entrogd::cli {

using Json = nlohmann::ordered_json;

struct RunConfig {
  std::filesystem::path input;
  std::filesystem::path output;
  std::filesystem::path original;  // verify: the reference CSV
  std::vector<std::string> kinds;  // auto | int | float, per column
  Precision float_precision = Precision::Bits64;
  bool allow_raw_bits = true;

  std::optional<std::size_t> m_max;
  unsigned tau = 10;
  std::optional<std::vector<double>> importance;
  bool exact_truncation = false;
  Strategy strategy = Strategy::Entropy;

  std::size_t k = 5;
  unsigned repeats = 3;
  unsigned inits = 10;
  std::uint64_t seed = 0;
  AnalyticsMode mode = AnalyticsMode::Condensed;
  std::size_t silhouette_sample = 10000;
  std::filesystem::path plot_dir;  // analyze: optional plot data output
};

Json config_echo(const RunConfig& config);
CsvOptions csv_options(const RunConfig& config);
CompressConfig compress_config(const RunConfig& config);

/// Stats for an in-memory compression, shared by compress and bench.
Json compress_report(const Table& table, const Compressed& compressed);

/// Reads config.input (CSV), writes the archive to config.output.
Json cmd_compress(const RunConfig& config);
/// Reads config.input (archive), writes the CSV to config.output.
Json cmd_decompress(const RunConfig& config);

/// Result of comparing an archive against a reference CSV. Integrity errors in
/// the archive propagate as IntegrityError.
struct VerifyResult {
  bool pass = false;
  std::optional<CellMismatch> mismatch;
  Json report;
};
VerifyResult cmd_verify(const RunConfig& config);

/// config.input may be an archive or a CSV; a CSV is compressed in memory
/// first so configuration time can be reported.
Json cmd_analyze(const RunConfig& config);

/// Archive layout and size model.
Json cmd_stats(const RunConfig& config);

/// Exit codes used by the egd binary.
inline constexpr int kExitOk = 0;
inline constexpr int kExitMismatch = 1;
inline constexpr int kExitIntegrity = 2;
inline constexpr int kExitUsage = 3;
inline constexpr int kExitError = 4;

}  // namespace entrogd::cli
