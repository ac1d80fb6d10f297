#pragma once

// Tabular data <-> fixed-width binary chunks, plus per-bit-position statistics.
//
// A row of d columns is rendered as one chunk of l_c bits: columns are
// concatenated in input order, most significant bit first within each column.
// Bit positions are 0-based: position 0 is the MSB of column 0.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace entrogd {

using BitPos = std::uint32_t;

enum class ColumnKind : std::uint8_t { Integer = 0, Float = 1 };

enum class Precision : std::uint8_t { Bits32 = 32, Bits64 = 64 };

/// How a column's values are mapped to unsigned integers.
enum class Encoding : std::uint8_t {
  Offset = 0,   // integers, shifted by the column minimum
  Scaled = 1,   // floats multiplied by 10^decimal_scale, then shifted
  RawBits = 2,  // IEEE-754 bit patterns, shifted by the smallest pattern
};

struct ColumnParams {
  ColumnKind kind = ColumnKind::Integer;
  Encoding encoding = Encoding::Offset;
  Precision precision = Precision::Bits64;
  int decimal_scale = 0;
  // Subtracted (mod 2^64) before encoding. For RawBits this is a bit pattern.
  std::int64_t offset = 0;
  unsigned bit_width = 1;

  /// Value of one least-significant unit in the original domain. 0 for RawBits,
  /// where a unit has no fixed magnitude.
  double quantum() const;

  /// Maps a (possibly fractional) quantized value back to the original domain.
  /// Exact for integral inputs of Offset/Scaled columns.
  double to_domain(long double quantized) const;

  bool operator==(const ColumnParams&) const = default;
};

/// One column of raw input. Integer columns populate `ints`, float columns `reals`.
struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::Integer;
  Precision precision = Precision::Bits64;
  std::vector<std::int64_t> ints;
  std::vector<double> reals;

  static Column integers(std::string name, std::vector<std::int64_t> values,
                         Precision precision = Precision::Bits64);
  static Column floats(std::string name, std::vector<double> values,
                       Precision precision = Precision::Bits64);

  std::size_t size() const { return kind == ColumnKind::Integer ? ints.size() : reals.size(); }
  double as_double(std::size_t row) const;
};

struct CellMismatch {
  std::size_t row;
  std::size_t column;
  std::string detail;
};

/// A rectangular table of numeric columns.
class Table {
 public:
  Table() = default;
  explicit Table(std::vector<Column> columns);

  std::size_t rows() const { return columns_.empty() ? 0 : columns_.front().size(); }
  std::size_t cols() const { return columns_.size(); }
  const Column& column(std::size_t c) const { return columns_.at(c); }
  const std::vector<Column>& columns() const { return columns_; }
  double as_double(std::size_t row, std::size_t col) const { return columns_[col].as_double(row); }

  /// Row-major copy of all values as doubles.
  std::vector<double> to_row_major() const;

  /// Uncompressed size: every value stored at its column's precision.
  std::size_t original_size_bytes() const;

 private:
  std::vector<Column> columns_;
};

/// Bit-exact comparison (floats compared by bit pattern, so -0.0 != 0.0).
/// Returns the first differing cell, or a mismatch at (0, 0) for a shape difference.
std::optional<CellMismatch> first_mismatch(const Table& expected, const Table& actual);
bool bit_equal(const Table& a, const Table& b);

struct QuantizeOptions {
  int max_decimal_scale = 9;
  // When no scale in [0, max_decimal_scale] reproduces a float column exactly,
  // store raw IEEE-754 patterns instead of failing.
  bool allow_raw_bits = true;
};

/// The binary chunk view of a dataset. Values are held column-major; each
/// value of column c fits in params(c).bit_width bits.
class QuantizedMatrix {
 public:
  QuantizedMatrix() = default;
  QuantizedMatrix(std::vector<ColumnParams> params, std::vector<std::vector<std::uint64_t>> columns,
                  std::vector<std::string> names = {});

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return params_.size(); }
  std::size_t chunk_width() const { return position_column_.size(); }

  const ColumnParams& params(std::size_t c) const { return params_[c]; }
  const std::vector<ColumnParams>& params() const { return params_; }
  const std::vector<std::string>& names() const { return names_; }

  std::span<const std::uint64_t> column(std::size_t c) const { return columns_[c]; }
  std::uint64_t value(std::size_t row, std::size_t c) const { return columns_[c][row]; }

  /// Column owning a chunk position, and the position's shift within that column's value.
  std::uint32_t column_of(BitPos pos) const { return position_column_[pos]; }
  unsigned shift_of(BitPos pos) const { return position_shift_[pos]; }
  /// First chunk position belonging to column c.
  BitPos first_position(std::size_t c) const { return column_start_[c]; }

  bool bit(std::size_t row, BitPos pos) const {
    return (columns_[position_column_[pos]][row] >> position_shift_[pos]) & 1u;
  }

  /// The chunk of one row packed MSB-first into ceil(l_c / 8) bytes.
  std::vector<std::uint8_t> chunk_bytes(std::size_t row) const;

  /// Copy with extra rows appended. `extra` is row-major, cols() values per row.
  QuantizedMatrix with_rows_appended(std::span<const std::uint64_t> extra) const;

 private:
  void index_positions();

  std::size_t rows_ = 0;
  std::vector<ColumnParams> params_;
  std::vector<std::vector<std::uint64_t>> columns_;
  std::vector<std::string> names_;
  std::vector<std::uint32_t> position_column_;
  std::vector<std::uint8_t> position_shift_;
  std::vector<BitPos> column_start_;
};

QuantizedMatrix quantize_dataset(const Table& table, const QuantizeOptions& options = {});

/// Inverse of quantize_dataset. Throws IntegrityError when a stored value does
/// not fit its column's bit width.
Table dequantize(const QuantizedMatrix& matrix);

/// Minimum number of bits to hold `value` (at least 1).
unsigned bits_needed(std::uint64_t value);

struct BitStat {
  std::uint64_t ones = 0;
  double probability = 0.0;
  double entropy = 0.0;
  bool constant = true;
  std::uint32_t column = 0;
};

struct BitStats {
  std::size_t rows = 0;
  std::vector<BitStat> positions;

  std::vector<BitPos> constant_positions() const;
};

/// Binary entropy -p log2 p - (1-p) log2 (1-p), with H(0) = H(1) = 0.
double binary_entropy(double p);

BitStats bit_stats(const QuantizedMatrix& matrix);

}  // namespace entrogd
