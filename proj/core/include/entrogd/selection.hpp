#pragma once

// Base-bit selection: condensed sample generation for analytics, entropy-guided
// bit selection for compression, the compressed-size model both are scored
// with, and a size-greedy baseline.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "entrogd/basetree.hpp"
#include "entrogd/bitmatrix.hpp"

namespace entrogd {

/// Ordered set of chunk positions assigned to the base.
struct BitSelection {
  std::vector<BitPos> positions;  // in selection order
  std::size_t chunk_width = 0;

  std::size_t base_width() const { return positions.size(); }
  std::size_t deviation_width() const { return chunk_width - positions.size(); }
  bool contains(BitPos pos) const;
  std::vector<BitPos> sorted() const;
  /// Per-column mask of base bits, in each column's value space.
  std::vector<std::uint64_t> column_masks(const QuantizedMatrix& matrix) const;
};

/// Field widths entering the compressed-size formula. All sizes are in bits.
struct SizeModel {
  std::uint64_t n = 0;         // original rows
  std::uint64_t m = 0;         // appended condensed rows
  std::uint64_t n_b = 1;       // unique bases
  std::uint64_t l_b = 0;       // base width
  std::uint64_t l_d = 0;       // deviation width
  std::uint64_t l_w = 0;       // weight width, ceil(log2 n)
  std::uint64_t l_id = 0;      // base-ID width, ceil(log2 n_b)
  std::uint64_t s_params = 0;  // auxiliary metadata

  static SizeModel make(std::uint64_t n, std::uint64_t m, std::uint64_t n_b, std::uint64_t chunk_width,
                        std::uint64_t base_width, std::uint64_t params_bits);
  bool operator==(const SizeModel&) const = default;
};

/// S = n_b*l_b + (n+m)*(l_d + l_id) + m*l_w + S_params.
std::uint64_t compressed_size(const SizeModel& model);

/// ceil(log2 n), but 1 when n == 1 so a weight field always exists.
unsigned weight_width(std::uint64_t n);

__extension__ typedef unsigned __int128 WideSum;

/// Weighted summary rows for analytics on compressed data.
struct CondensedSampleSet {
  std::size_t d = 0;
  std::vector<double> samples;         // m x d, row-major, original domain
  std::vector<std::uint64_t> weights;  // member counts; sum to n
  BitSelection analytic_bits;

  // Quantized-domain detail, only present on freshly generated sets.
  std::vector<WideSum> quantized_sums;      // m x d, exact member sums of stored values
  std::vector<std::uint64_t> requantized;   // m x d, sums / weights rounded half-to-even
  // Leaf count just before the last bit the generation loop committed; empty
  // when the loop committed no bit.
  std::optional<std::size_t> count_before_last_bit;
  std::size_t count_before_truncation = 0;

  std::size_t size() const { return weights.size(); }
  std::uint64_t total_weight() const;
  const double* sample(std::size_t j) const { return samples.data() + j * d; }
};

struct CondensedOptions {
  std::size_t m_max = 16;
  /// Per-column importance; columns are visited in descending importance.
  std::optional<std::vector<double>> importance;
  /// Merge smallest-weight samples into their nearest neighbour until m == m_max.
  bool exact_truncation = false;
};

/// min(4096, max(16, n / 100)).
std::size_t default_m_max(std::size_t n);

CondensedSampleSet generate_condensed_samples(const QuantizedMatrix& matrix, const CondensedOptions& options);
CondensedSampleSet generate_condensed_samples(const QuantizedMatrix& matrix, const BitStats& stats,
                                              const CondensedOptions& options);

struct SelectionStep {
  BitPos pos = 0;
  double entropy = 0.0;
  std::size_t n_b = 0;
  std::uint64_t size = 0;
  bool improved = false;
};

struct SelectionResult {
  BitSelection best;
  std::uint64_t best_size = 0;
  SizeModel best_model;
  std::size_t initial_bits = 0;   // bits selected before the search loop started
  std::uint64_t initial_size = 0;
  std::vector<SelectionStep> trace;
};

/// Entropy-guided selection over `tree`'s matrix (the extended matrix: n
/// original rows followed by m condensed rows). `stats` must describe the
/// original n rows. The tree must be fresh; on return it holds the best selection.
SelectionResult select_compression_bits(BaseTree& tree, const BitStats& stats, std::size_t m, unsigned tau,
                                        std::uint64_t params_bits);
SelectionResult select_compression_bits(const QuantizedMatrix& extended, const BitStats& stats, std::size_t m,
                                        unsigned tau, std::uint64_t params_bits = 0);

/// Size-greedy baseline: each round scores promoting the most significant
/// non-base bit of every column and commits the smallest S. Stops after `tau`
/// consecutive non-improving commits (tau = 1: as soon as no candidate
/// improves) and rolls back to the best selection.
SelectionResult greedy_select_bits(BaseTree& tree, unsigned tau, std::size_t m, std::uint64_t params_bits);
SelectionResult greedy_select_bits(const QuantizedMatrix& matrix, unsigned tau, std::size_t m = 0,
                                   std::uint64_t params_bits = 0);

}  // namespace entrogd
