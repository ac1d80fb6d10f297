#include "entrogd/bitmatrix.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <limits>
#include <string>

#include "entrogd/error.hpp"

namespace entrogd {

namespace {

constexpr std::array<double, 19> kPow10 = {1e0,  1e1,  1e2,  1e3,  1e4,  1e5,  1e6,
                                           1e7,  1e8,  1e9,  1e10, 1e11, 1e12, 1e13,
                                           1e14, 1e15, 1e16, 1e17, 1e18};

// Largest magnitude for which every integer is exactly representable as a double.
constexpr double kExactIntegerLimit = 9007199254740992.0;  // 2^53

std::uint64_t raw_pattern(double v, Precision precision) {
  if (precision == Precision::Bits32) return std::bit_cast<std::uint32_t>(static_cast<float>(v));
  return std::bit_cast<std::uint64_t>(v);
}

double from_raw_pattern(std::uint64_t pattern, Precision precision) {
  if (precision == Precision::Bits32)
    return static_cast<double>(std::bit_cast<float>(static_cast<std::uint32_t>(pattern)));
  return std::bit_cast<double>(pattern);
}

double scaled_to_double(std::int64_t q, int scale, Precision precision) {
  const double v = static_cast<double>(q) / kPow10[static_cast<std::size_t>(scale)];
  return precision == Precision::Bits32 ? static_cast<double>(static_cast<float>(v)) : v;
}

bool same_bits(double a, double b) {
  return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}

// Smallest k such that every value survives v -> round(v * 10^k) -> q / 10^k bit-exactly.
std::optional<int> find_decimal_scale(const std::vector<double>& values, Precision precision,
                                      int max_scale, std::vector<std::int64_t>& scaled) {
  scaled.resize(values.size());
  for (int k = 0; k <= max_scale; ++k) {
    const double factor = kPow10[static_cast<std::size_t>(k)];
    bool ok = true;
    for (std::size_t r = 0; r < values.size() && ok; ++r) {
      const double x = std::nearbyint(values[r] * factor);
      if (!(std::fabs(x) < kExactIntegerLimit)) {
        ok = false;
        break;
      }
      const auto q = static_cast<std::int64_t>(x);
      ok = same_bits(scaled_to_double(q, k, precision), values[r]);
      scaled[r] = q;
    }
    if (ok) return k;
  }
  return std::nullopt;
}

std::uint64_t width_mask(unsigned width) {
  return width >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << width) - 1;
}

}  // namespace

double ColumnParams::quantum() const {
  switch (encoding) {
    case Encoding::Offset:
      return 1.0;
    case Encoding::Scaled:
      return 1.0 / kPow10[static_cast<std::size_t>(decimal_scale)];
    case Encoding::RawBits:
      return 0.0;
  }
  return 0.0;
}

double ColumnParams::to_domain(long double quantized) const {
  switch (encoding) {
    case Encoding::Offset:
      return static_cast<double>(static_cast<long double>(offset) + quantized);
    case Encoding::Scaled:
      return static_cast<double>((static_cast<long double>(offset) + quantized) /
                                 static_cast<long double>(kPow10[static_cast<std::size_t>(decimal_scale)]));
    case Encoding::RawBits: {
      // Stored patterns use all 64 bits; llround would overflow past 2^63.
      const long double r = std::nearbyintl(quantized);
      const auto stored = r <= 0 ? std::uint64_t{0} : static_cast<std::uint64_t>(r);
      return from_raw_pattern(static_cast<std::uint64_t>(offset) + stored, precision);
    }
  }
  return 0.0;
}

Column Column::integers(std::string name, std::vector<std::int64_t> values, Precision precision) {
  Column c;
  c.name = std::move(name);
  c.kind = ColumnKind::Integer;
  c.precision = precision;
  c.ints = std::move(values);
  return c;
}

Column Column::floats(std::string name, std::vector<double> values, Precision precision) {
  Column c;
  c.name = std::move(name);
  c.kind = ColumnKind::Float;
  c.precision = precision;
  c.reals = std::move(values);
  return c;
}

double Column::as_double(std::size_t row) const {
  return kind == ColumnKind::Integer ? static_cast<double>(ints[row]) : reals[row];
}

Table::Table(std::vector<Column> columns) : columns_(std::move(columns)) {
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    const Column& col = columns_[c];
    const bool consistent = col.kind == ColumnKind::Integer ? col.reals.empty() : col.ints.empty();
    if (!consistent)
      throw InvalidArgument("column " + std::to_string(c) + " holds values of the wrong kind");
    if (col.size() != columns_.front().size())
      throw InvalidArgument("table is not rectangular: column " + std::to_string(c) + " has " +
                            std::to_string(col.size()) + " rows, expected " +
                            std::to_string(columns_.front().size()));
  }
}

std::vector<double> Table::to_row_major() const {
  const std::size_t n = rows(), d = cols();
  std::vector<double> out(n * d);
  for (std::size_t c = 0; c < d; ++c)
    for (std::size_t r = 0; r < n; ++r) out[r * d + c] = columns_[c].as_double(r);
  return out;
}

std::size_t Table::original_size_bytes() const {
  std::size_t total = 0;
  for (const Column& c : columns_) total += c.size() * (static_cast<std::size_t>(c.precision) / 8);
  return total;
}

namespace {

std::string cell_text(const Column& col, std::size_t row) {
  if (col.kind == ColumnKind::Integer) return std::to_string(col.ints[row]);
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, col.reals[row]);
  return std::string(buf, res.ptr);
}

}  // namespace

std::optional<CellMismatch> first_mismatch(const Table& expected, const Table& actual) {
  if (expected.rows() != actual.rows() || expected.cols() != actual.cols())
    return CellMismatch{0, 0,
                        "shape " + std::to_string(expected.rows()) + "x" + std::to_string(expected.cols()) +
                            " vs " + std::to_string(actual.rows()) + "x" + std::to_string(actual.cols())};
  for (std::size_t r = 0; r < expected.rows(); ++r) {
    for (std::size_t c = 0; c < expected.cols(); ++c) {
      const Column& a = expected.column(c);
      const Column& b = actual.column(c);
      if (a.kind != b.kind) return CellMismatch{r, c, "column kinds differ"};
      const bool equal = a.kind == ColumnKind::Integer ? a.ints[r] == b.ints[r] : same_bits(a.reals[r], b.reals[r]);
      if (!equal) {
        return CellMismatch{r, c, cell_text(a, r) + " vs " + cell_text(b, r)};
      }
    }
  }
  return std::nullopt;
}

bool bit_equal(const Table& a, const Table& b) { return !first_mismatch(a, b).has_value(); }

unsigned bits_needed(std::uint64_t value) {
  return value == 0 ? 1u : static_cast<unsigned>(64 - std::countl_zero(value));
}

QuantizedMatrix::QuantizedMatrix(std::vector<ColumnParams> params,
                                 std::vector<std::vector<std::uint64_t>> columns,
                                 std::vector<std::string> names)
    : params_(std::move(params)), columns_(std::move(columns)), names_(std::move(names)) {
  if (params_.size() != columns_.size())
    throw InvalidArgument("QuantizedMatrix: params and column counts differ");
  if (names_.empty()) {
    for (std::size_t c = 0; c < params_.size(); ++c) names_.push_back("c" + std::to_string(c));
  } else if (names_.size() != params_.size()) {
    throw InvalidArgument("QuantizedMatrix: name and column counts differ");
  }
  rows_ = columns_.empty() ? 0 : columns_.front().size();
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    const unsigned width = params_[c].bit_width;
    if (width < 1 || width > 64)
      throw IntegrityError("params", "column " + std::to_string(c) + " has bit width " + std::to_string(width));
    if (columns_[c].size() != rows_) throw InvalidArgument("QuantizedMatrix: ragged columns");
    const std::uint64_t mask = width_mask(width);
    for (std::size_t r = 0; r < rows_; ++r) {
      if ((columns_[c][r] & ~mask) != 0)
        throw IntegrityError("params", "value at row " + std::to_string(r) + ", column " + std::to_string(c) +
                                           " exceeds bit width " + std::to_string(width));
    }
  }
  index_positions();
}

void QuantizedMatrix::index_positions() {
  position_column_.clear();
  position_shift_.clear();
  column_start_.clear();
  for (std::size_t c = 0; c < params_.size(); ++c) {
    column_start_.push_back(static_cast<BitPos>(position_column_.size()));
    const unsigned width = params_[c].bit_width;
    for (unsigned b = 0; b < width; ++b) {
      position_column_.push_back(static_cast<std::uint32_t>(c));
      position_shift_.push_back(static_cast<std::uint8_t>(width - 1 - b));
    }
  }
}

std::vector<std::uint8_t> QuantizedMatrix::chunk_bytes(std::size_t row) const {
  std::vector<std::uint8_t> out((chunk_width() + 7) / 8, 0);
  for (BitPos p = 0; p < chunk_width(); ++p)
    if (bit(row, p)) out[p / 8] |= static_cast<std::uint8_t>(0x80u >> (p % 8));
  return out;
}

QuantizedMatrix QuantizedMatrix::with_rows_appended(std::span<const std::uint64_t> extra) const {
  const std::size_t d = cols();
  if (d == 0 || extra.size() % d != 0)
    throw InvalidArgument("with_rows_appended: value count is not a multiple of the column count");
  auto columns = columns_;
  const std::size_t m = extra.size() / d;
  for (std::size_t c = 0; c < d; ++c) {
    columns[c].reserve(rows_ + m);
    for (std::size_t j = 0; j < m; ++j) columns[c].push_back(extra[j * d + c]);
  }
  return QuantizedMatrix(params_, std::move(columns), names_);
}

QuantizedMatrix quantize_dataset(const Table& table, const QuantizeOptions& options) {
  if (table.cols() == 0 || table.rows() == 0) throw InvalidArgument("quantize_dataset: table is empty");
  if (options.max_decimal_scale < 0 || options.max_decimal_scale > 18)
    throw InvalidArgument("quantize_dataset: max_decimal_scale must be in [0, 18]");

  const std::size_t n = table.rows();
  std::vector<ColumnParams> params;
  std::vector<std::vector<std::uint64_t>> columns;
  std::vector<std::string> names;

  for (std::size_t c = 0; c < table.cols(); ++c) {
    const Column& col = table.column(c);
    ColumnParams p;
    p.kind = col.kind;
    p.precision = col.precision;
    std::vector<std::uint64_t> stored(n);

    if (col.kind == ColumnKind::Integer) {
      p.encoding = Encoding::Offset;
      for (std::size_t r = 0; r < n; ++r) {
        const std::int64_t v = col.ints[r];
        if (col.precision == Precision::Bits32 &&
            (v < std::numeric_limits<std::int32_t>::min() || v > std::numeric_limits<std::int32_t>::max()))
          throw QuantizationError("value " + std::to_string(v) + " at row " + std::to_string(r) + ", column " +
                                      std::to_string(c) + " does not fit 32-bit precision",
                                  r, c);
      }
      const std::int64_t lo = *std::min_element(col.ints.begin(), col.ints.end());
      p.offset = lo;
      for (std::size_t r = 0; r < n; ++r)
        stored[r] = static_cast<std::uint64_t>(col.ints[r]) - static_cast<std::uint64_t>(lo);
    } else {
      for (std::size_t r = 0; r < n; ++r) {
        const double v = col.reals[r];
        if (!std::isfinite(v))
          throw QuantizationError("non-finite value at row " + std::to_string(r) + ", column " + std::to_string(c),
                                  r, c);
        if (col.precision == Precision::Bits32 && !same_bits(static_cast<double>(static_cast<float>(v)), v))
          throw QuantizationError("value at row " + std::to_string(r) + ", column " + std::to_string(c) +
                                      " is not representable at 32-bit precision",
                                  r, c);
      }
      std::vector<std::int64_t> scaled;
      if (auto k = find_decimal_scale(col.reals, col.precision, options.max_decimal_scale, scaled)) {
        p.encoding = Encoding::Scaled;
        p.decimal_scale = *k;
        const std::int64_t lo = *std::min_element(scaled.begin(), scaled.end());
        p.offset = lo;
        for (std::size_t r = 0; r < n; ++r)
          stored[r] = static_cast<std::uint64_t>(scaled[r]) - static_cast<std::uint64_t>(lo);
      } else if (options.allow_raw_bits) {
        p.encoding = Encoding::RawBits;
        std::uint64_t lo = std::numeric_limits<std::uint64_t>::max();
        for (double v : col.reals) lo = std::min(lo, raw_pattern(v, col.precision));
        p.offset = static_cast<std::int64_t>(lo);
        for (std::size_t r = 0; r < n; ++r) stored[r] = raw_pattern(col.reals[r], col.precision) - lo;
      } else {
        throw QuantizationError("column " + std::to_string(c) + " (" + col.name +
                                    ") needs more than " + std::to_string(options.max_decimal_scale) +
                                    " decimal digits; enable raw-bits mode to store it losslessly",
                                0, c);
      }
    }

    p.bit_width = bits_needed(*std::max_element(stored.begin(), stored.end()));
    params.push_back(p);
    columns.push_back(std::move(stored));
    names.push_back(col.name.empty() ? "c" + std::to_string(c) : col.name);
  }
  return QuantizedMatrix(std::move(params), std::move(columns), std::move(names));
}

Table dequantize(const QuantizedMatrix& matrix) {
  std::vector<Column> out;
  for (std::size_t c = 0; c < matrix.cols(); ++c) {
    const ColumnParams& p = matrix.params(c);
    const auto values = matrix.column(c);
    const std::uint64_t mask = width_mask(p.bit_width);
    const auto base = static_cast<std::uint64_t>(p.offset);
    for (std::size_t r = 0; r < values.size(); ++r)
      if ((values[r] & ~mask) != 0)
        throw IntegrityError("params", "stored value at row " + std::to_string(r) + ", column " +
                                           std::to_string(c) + " exceeds bit width");

    const std::string& name = matrix.names()[c];
    if (p.kind == ColumnKind::Integer) {
      if (p.encoding != Encoding::Offset) throw IntegrityError("params", "integer column with float encoding");
      std::vector<std::int64_t> ints(values.size());
      for (std::size_t r = 0; r < values.size(); ++r) ints[r] = static_cast<std::int64_t>(base + values[r]);
      out.push_back(Column::integers(name, std::move(ints), p.precision));
      continue;
    }

    std::vector<double> reals(values.size());
    switch (p.encoding) {
      case Encoding::Scaled:
        if (p.decimal_scale < 0 || p.decimal_scale > 18) throw IntegrityError("params", "decimal scale out of range");
        for (std::size_t r = 0; r < values.size(); ++r)
          reals[r] = scaled_to_double(static_cast<std::int64_t>(base + values[r]), p.decimal_scale, p.precision);
        break;
      case Encoding::RawBits:
        for (std::size_t r = 0; r < values.size(); ++r) {
          const std::uint64_t pattern = base + values[r];
          if (p.precision == Precision::Bits32 && pattern > 0xffffffffu)
            throw IntegrityError("params", "32-bit raw pattern out of range");
          reals[r] = from_raw_pattern(pattern, p.precision);
        }
        break;
      case Encoding::Offset:
        throw IntegrityError("params", "float column with integer encoding");
    }
    out.push_back(Column::floats(name, std::move(reals), p.precision));
  }
  return Table(std::move(out));
}

double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

std::vector<BitPos> BitStats::constant_positions() const {
  std::vector<BitPos> out;
  for (std::size_t i = 0; i < positions.size(); ++i)
    if (positions[i].constant) out.push_back(static_cast<BitPos>(i));
  return out;
}

BitStats bit_stats(const QuantizedMatrix& matrix) {
  if (matrix.rows() == 0) throw InvalidArgument("bit_stats: matrix has no rows");
  BitStats stats;
  stats.rows = matrix.rows();
  stats.positions.resize(matrix.chunk_width());
  for (std::size_t c = 0; c < matrix.cols(); ++c) {
    const unsigned width = matrix.params(c).bit_width;
    const BitPos start = matrix.first_position(c);
    std::vector<std::uint64_t> ones_by_shift(width, 0);
    for (std::uint64_t v : matrix.column(c)) {
      while (v != 0) {
        ++ones_by_shift[static_cast<unsigned>(std::countr_zero(v))];
        v &= v - 1;
      }
    }
    for (unsigned b = 0; b < width; ++b) {
      BitStat& s = stats.positions[start + b];
      s.column = static_cast<std::uint32_t>(c);
      s.ones = ones_by_shift[width - 1 - b];
      s.probability = static_cast<double>(s.ones) / static_cast<double>(stats.rows);
      s.constant = s.ones == 0 || s.ones == stats.rows;
      s.entropy = s.constant ? 0.0 : binary_entropy(s.probability);
    }
  }
  return stats;
}

}  // namespace entrogd
