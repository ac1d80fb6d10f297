#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "entrogd/bitmatrix.hpp"
#include "entrogd/error.hpp"

namespace entrogd::cli {

/// A cell that could not be ingested. Rows are 1-based data rows (the header
/// is not counted); columns are 0-based with the header name attached.
class CsvError : public Error {
 public:
  CsvError(const std::string& what, std::size_t row, std::size_t column)
      : Error(what), row_(row), column_(column) {}
  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

enum class KindOverride { Auto, Integer, Float };

struct CsvOptions {
  /// Per-column kind; missing entries mean Auto (integer when every cell is an
  /// integer literal, float otherwise).
  std::vector<KindOverride> kinds;
  /// Float columns are parsed at this precision.
  Precision float_precision = Precision::Bits64;
  /// Per-column float precision; missing entries use float_precision.
  std::vector<Precision> precisions;
};

KindOverride parse_kind(const std::string& s);

Table read_csv(std::istream& in, const CsvOptions& options = {});
Table read_csv(const std::filesystem::path& path, const CsvOptions& options = {});

/// Floats are written in shortest round-trip form at their column precision.
void write_csv(std::ostream& out, const Table& table);
void write_csv(const std::filesystem::path& path, const Table& table);

/// Reads a CSV using the column kinds and precisions recorded for an archive,
/// so values compare bit-exactly against its decompressed table.
Table read_csv_like(const std::filesystem::path& path, const std::vector<ColumnParams>& columns);

}  // namespace entrogd::cli
