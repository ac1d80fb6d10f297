#pragma once

// On-disk container. Layout:
//
//   header (88 bytes, fixed)
//     "EGD1" | u16 version | u16 flags | u16 section count (6) | u16 reserved
//     6 x { u64 byte length, u32 CRC-32 }  | u32 CRC-32 of the preceding 84 bytes
//   params | bases | ids | deviations | weights | condensed
//
// Multi-byte integers are little-endian. Bit-stream sections are MSB-first and
// padded with zero bits to a byte boundary.

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string_view>
#include <vector>

namespace entrogd {

enum class Section : std::uint8_t { Params = 0, Bases, Ids, Deviations, Weights, Condensed };

inline constexpr std::size_t kSectionCount = 6;
inline constexpr std::uint16_t kFormatVersion = 1;
inline constexpr std::size_t kHeaderSize = 88;

std::string_view section_name(Section s);

using SectionBytes = std::array<std::vector<std::uint8_t>, kSectionCount>;

/// A serialized archive. Sections are read on demand from memory or from a
/// file; every read is verified against the header's length and CRC, and the
/// number of bytes touched is tracked so callers can measure how much of the
/// archive an operation needed. Copies share the same underlying source.
class Archive {
 public:
  static Archive assemble(const SectionBytes& sections, std::uint16_t flags = 0);
  static Archive from_bytes(std::vector<std::uint8_t> bytes);
  /// Opens a file, reading and validating only the header.
  static Archive open(const std::filesystem::path& path);

  std::vector<std::uint8_t> read_section(Section s) const;
  /// Reads every section, throwing IntegrityError on the first bad one.
  void verify() const;

  std::uint16_t flags() const { return flags_; }
  std::uint64_t section_size(Section s) const { return lengths_[static_cast<std::size_t>(s)]; }
  std::uint64_t section_offset(Section s) const;
  std::uint64_t total_size() const;

  /// Bytes fetched from the source so far, header included.
  std::uint64_t bytes_read() const;
  void reset_bytes_read() const;

  std::vector<std::uint8_t> to_bytes() const;
  void save(const std::filesystem::path& path) const;

 private:
  struct Source;
  struct MemorySource;
  struct FileSource;
  Archive() = default;
  void load_header();

  std::shared_ptr<Source> source_;
  std::uint16_t flags_ = 0;
  std::array<std::uint64_t, kSectionCount> lengths_{};
  std::array<std::uint32_t, kSectionCount> crcs_{};
};

/// Little-endian field writer for the params section.
class ByteWriter {
 public:
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u16(std::uint16_t v) { put(v, 2); }
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void f64(double v);
  void raw(const std::uint8_t* data, std::size_t n) { bytes_.insert(bytes_.end(), data, data + n); }
  std::vector<std::uint8_t> finish() && { return std::move(bytes_); }
  std::size_t size() const { return bytes_.size(); }

 private:
  void put(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> bytes_;
};

/// Little-endian field reader; running off the end throws IntegrityError.
class ByteReader {
 public:
  ByteReader(const std::vector<std::uint8_t>& bytes, std::string_view section)
      : bytes_(bytes), section_(section) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(get(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(get(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  double f64();
  const std::uint8_t* raw(std::size_t n);
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::uint64_t get(int n);
  const std::vector<std::uint8_t>& bytes_;
  std::string_view section_;
  std::size_t pos_ = 0;
};

}  // namespace entrogd
