#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace entrogd {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller supplied an argument outside an operation's domain.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A value could not be mapped onto a fixed-width unsigned integer.
class QuantizationError : public Error {
 public:
  QuantizationError(const std::string& what, std::size_t row, std::size_t column)
      : Error(what), row_(row), column_(column) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

/// Stored data is inconsistent with its own metadata (corrupt or truncated archive,
/// out-of-range base ID, value wider than its column, ...).
class IntegrityError : public Error {
 public:
  IntegrityError(std::string section, const std::string& what)
      : Error(section + ": " + what), section_(std::move(section)) {}

  const std::string& section() const noexcept { return section_; }

 private:
  std::string section_;
};

}  // namespace entrogd
