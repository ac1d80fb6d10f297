#pragma once

// Dense MSB-first bit streams and small bit-manipulation helpers.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace entrogd {

/// A fixed sequence of bits, compared lexicographically (bit 0 first).
class BitString {
 public:
  BitString() = default;

  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }
  bool get(std::size_t i) const { return (words_[i / 64] >> (63 - i % 64)) & 1u; }
  void push_back(bool bit);
  /// Appends the low `width` bits of `value`, most significant first.
  void append(std::uint64_t value, unsigned width);

  std::string to_string() const;

  friend bool operator==(const BitString&, const BitString&) = default;
  friend std::strong_ordering operator<=>(const BitString& a, const BitString& b);

 private:
  std::vector<std::uint64_t> words_;
  std::size_t size_ = 0;
};

/// Appends bit fields to a byte buffer, MSB-first within each byte.
class BitWriter {
 public:
  void write(std::uint64_t value, unsigned width);
  void write(const BitString& bits);
  std::size_t bit_count() const { return bits_; }
  /// Buffer padded with zero bits to a byte boundary.
  std::vector<std::uint8_t> finish() &&;

 private:
  std::vector<std::uint8_t> bytes_;
  std::size_t bits_ = 0;
};

/// Reads bit fields written by BitWriter. Reading past the end throws
/// IntegrityError naming `section`.
class BitReader {
 public:
  BitReader(std::span<const std::uint8_t> bytes, std::string section)
      : bytes_(bytes), section_(std::move(section)) {}

  std::uint64_t read(unsigned width);
  std::size_t position() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() * 8 - pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::string section_;
  std::size_t pos_ = 0;
};

/// Gathers the bits of `value` selected by `mask` into the low bits of the
/// result, preserving order (software PEXT).
std::uint64_t extract_bits(std::uint64_t value, std::uint64_t mask);

/// Inverse of extract_bits: scatters the low bits of `packed` into the
/// positions set in `mask` (software PDEP).
std::uint64_t deposit_bits(std::uint64_t packed, std::uint64_t mask);

/// ceil(log2(x)) for x >= 1; 0 for x == 1.
unsigned ceil_log2(std::uint64_t x);

}  // namespace entrogd
