#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "entrogd/archive.hpp"
#include "entrogd/bitmatrix.hpp"
#include "entrogd/selection.hpp"

namespace entrogd {

enum class Strategy : std::uint8_t {
  Entropy = 0,  // condensed samples + entropy-ordered base bits
  Greedy = 1,   // size-greedy baseline, no condensed samples
};

struct CompressConfig {
  std::optional<std::size_t> m_max;  // default_m_max(n) when unset
  unsigned tau = 10;
  std::optional<std::vector<double>> importance;
  bool exact_truncation = false;
  Strategy strategy = Strategy::Entropy;
  QuantizeOptions quantize;
};

/// Decoded params section.
struct ArchiveParams {
  std::uint64_t n = 0;
  std::uint64_t m = 0;
  std::uint64_t n_b = 0;
  std::uint32_t chunk_width = 0;
  std::uint32_t tau = 0;
  std::uint64_t m_max = 0;
  Strategy strategy = Strategy::Entropy;
  bool exact_truncation = false;
  std::vector<ColumnParams> columns;
  std::vector<std::string> names;
  std::optional<std::vector<double>> importance;
  BitSelection base_bits;      // ascending positions
  BitSelection analytic_bits;  // ascending positions

  std::size_t d() const { return columns.size(); }
  /// Uncompressed size of the n original rows at their declared precision.
  std::uint64_t original_size_bytes() const;
};

struct CompressStats {
  SizeModel model;
  std::uint64_t size_bits = 0;  // compressed_size(model)
  SelectionResult selection;
  CondensedSampleSet condensed;
  std::size_t m_max = 0;
  double configuration_seconds = 0.0;
};

struct Compressed {
  Archive archive;
  CompressStats stats;
};

Compressed compress(const Table& table, const CompressConfig& config = {});

ArchiveParams read_params(const Archive& archive);

/// Size model recomputed from stored fields; S_params counts the params and
/// condensed sections.
SizeModel stored_size_model(const Archive& archive);

/// All n + m chunks, original rows first.
QuantizedMatrix decode_extended(const Archive& archive);

/// The original n rows, bit-exact.
Table decompress(const Archive& archive);

/// Reads only the params, weights and condensed sections.
CondensedSampleSet extract_condensed(const Archive& archive);

struct BaseCentroids {
  std::size_t d = 0;
  std::vector<double> centroids;       // n_b x d, original domain
  std::vector<std::uint64_t> counts;   // original rows per base
};

/// Midpoint of each base's attainable range (deviation bits all zero vs all
/// one), weighted by how many original rows use the base. Bases referenced
/// only by condensed rows are omitted.
BaseCentroids base_centroids(const Archive& archive);

}  // namespace entrogd
