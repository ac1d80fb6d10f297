#include "entrogd/cli/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>

namespace entrogd::cli {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    auto comma = line.find(',', start);
    auto cell = trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (cell.size() >= 2 && cell.front() == '"' && cell.back() == '"') cell = cell.substr(1, cell.size() - 2);
    cells.emplace_back(cell);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

bool parse_int(std::string_view s, std::int64_t& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size() && !s.empty();
}

template <typename T>
bool parse_real(std::string_view s, T& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size() && !s.empty();
}

bool parse_float(std::string_view s, Precision precision, double& out) {
  if (precision == Precision::Bits32) {
    float f = 0.0f;
    if (!parse_real(s, f)) return false;
    out = f;
    return true;
  }
  return parse_real(s, out);
}

std::string describe(const std::vector<std::string>& header, std::size_t c) {
  return "column " + std::to_string(c) + " ('" + header[c] + "')";
}

}  // namespace

KindOverride parse_kind(const std::string& s) {
  if (s == "auto") return KindOverride::Auto;
  if (s == "int" || s == "integer") return KindOverride::Integer;
  if (s == "float" || s == "real") return KindOverride::Float;
  throw InvalidArgument("unknown column kind '" + s + "' (expected auto, int or float)");
}

Table read_csv(std::istream& in, const CsvOptions& options) {
  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (!trim(line).empty()) {
      header = split(line);
      break;
    }
  }
  if (header.empty()) throw CsvError("empty input: no header line", 0, 0);
  const std::size_t d = header.size();
  if (options.kinds.size() > d) {
    throw InvalidArgument(std::to_string(options.kinds.size()) + " column kinds given for " + std::to_string(d) +
                          " columns");
  }

  std::vector<std::vector<std::string>> cells(d);
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    auto parts = split(line);
    if (parts.size() != d) {
      throw CsvError("row " + std::to_string(row) + " has " + std::to_string(parts.size()) + " fields, expected " +
                         std::to_string(d),
                     row, std::min(parts.size(), d - 1));
    }
    for (std::size_t c = 0; c < d; ++c) cells[c].push_back(std::move(parts[c]));
  }

  std::vector<Column> columns;
  columns.reserve(d);
  for (std::size_t c = 0; c < d; ++c) {
    auto kind = c < options.kinds.size() ? options.kinds[c] : KindOverride::Auto;
    std::vector<std::int64_t> ints;
    bool integral = kind != KindOverride::Float;
    if (integral) {
      ints.reserve(cells[c].size());
      for (std::size_t r = 0; r < cells[c].size(); ++r) {
        std::int64_t v = 0;
        if (!parse_int(cells[c][r], v)) {
          if (kind == KindOverride::Integer) {
            throw CsvError("row " + std::to_string(r + 1) + ", " + describe(header, c) + ": '" + cells[c][r] +
                               "' is not an integer",
                           r + 1, c);
          }
          integral = false;
          break;
        }
        ints.push_back(v);
      }
    }
    if (integral) {
      bool narrow = true;
      for (auto v : ints) narrow = narrow && v >= INT32_MIN && v <= INT32_MAX;
      columns.push_back(Column::integers(header[c], std::move(ints), narrow ? Precision::Bits32 : Precision::Bits64));
      continue;
    }
    const Precision precision = c < options.precisions.size() ? options.precisions[c] : options.float_precision;
    std::vector<double> reals;
    reals.reserve(cells[c].size());
    for (std::size_t r = 0; r < cells[c].size(); ++r) {
      double v = 0.0;
      if (!parse_float(cells[c][r], precision, v)) {
        throw CsvError("row " + std::to_string(r + 1) + ", " + describe(header, c) + ": '" + cells[c][r] +
                           "' is not a number",
                       r + 1, c);
      }
      if (!std::isfinite(v)) {
        throw CsvError("row " + std::to_string(r + 1) + ", " + describe(header, c) + ": non-finite value '" +
                           cells[c][r] + "'",
                       r + 1, c);
      }
      reals.push_back(v);
    }
    columns.push_back(Column::floats(header[c], std::move(reals), precision));
  }
  return Table(std::move(columns));
}

Table read_csv(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return read_csv(in, options);
}

Table read_csv_like(const std::filesystem::path& path, const std::vector<ColumnParams>& columns) {
  CsvOptions options;
  for (const auto& p : columns) {
    options.kinds.push_back(p.kind == ColumnKind::Integer ? KindOverride::Integer : KindOverride::Float);
    options.precisions.push_back(p.precision);
  }
  Table raw = read_csv(path, options);
  if (raw.cols() != columns.size()) {
    throw CsvError("expected " + std::to_string(columns.size()) + " columns, found " + std::to_string(raw.cols()), 0,
                   0);
  }
  // Integer precision is inferred from the values, so restore the recorded one.
  std::vector<Column> fixed;
  for (std::size_t c = 0; c < raw.cols(); ++c) {
    Column col = raw.column(c);
    col.precision = columns[c].precision;
    fixed.push_back(std::move(col));
  }
  return Table(std::move(fixed));
}

void write_csv(std::ostream& out, const Table& table) {
  for (std::size_t c = 0; c < table.cols(); ++c) out << (c ? "," : "") << table.column(c).name;
  out << '\n';
  char buf[64];
  for (std::size_t r = 0; r < table.rows(); ++r) {
    for (std::size_t c = 0; c < table.cols(); ++c) {
      const auto& col = table.column(c);
      std::to_chars_result res;
      if (col.kind == ColumnKind::Integer) {
        res = std::to_chars(buf, buf + sizeof buf, col.ints[r]);
      } else if (col.precision == Precision::Bits32) {
        res = std::to_chars(buf, buf + sizeof buf, static_cast<float>(col.reals[r]));
      } else {
        res = std::to_chars(buf, buf + sizeof buf, col.reals[r]);
      }
      if (c) out << ',';
      out.write(buf, res.ptr - buf);
    }
    out << '\n';
  }
}

void write_csv(const std::filesystem::path& path, const Table& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  write_csv(out, table);
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace entrogd::cli
