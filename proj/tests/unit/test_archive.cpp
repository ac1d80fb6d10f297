#include <cstring>
#include <filesystem>
#include <random>

#include <gtest/gtest.h>

#include "entrogd/archive.hpp"
#include "entrogd/bitio.hpp"
#include "entrogd/error.hpp"

using namespace entrogd;

namespace {

// Reflected CRC-32 (polynomial 0xEDB88320), bit by bit.
std::uint32_t crc32_slow(const std::uint8_t* p, std::size_t n) {
  std::uint32_t crc = 0xffffffffu;
  for (std::size_t i = 0; i < n; ++i) {
    crc ^= p[i];
    for (int k = 0; k < 8; ++k) crc = (crc >> 1) ^ (0xedb88320u & (0u - (crc & 1u)));
  }
  return ~crc;
}

std::uint64_t le(const std::vector<std::uint8_t>& b, std::size_t at, int n) {
  std::uint64_t v = 0;
  for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(b[at + i]) << (8 * i);
  return v;
}

SectionBytes sample_sections() {
  SectionBytes s;
  for (std::size_t i = 0; i < kSectionCount; ++i)
    for (std::size_t j = 0; j < 3 + i * 5; ++j) s[i].push_back(static_cast<std::uint8_t>(i * 31 + j));
  s[static_cast<std::size_t>(Section::Weights)].clear();  // empty sections are legal
  return s;
}

}  // namespace

TEST(BitIo, WriterPacksMsbFirstAndPads) {
  BitWriter w;
  w.write(0b101, 3);
  w.write(0b1, 1);
  w.write(0xff, 0);
  w.write(0b11, 2);
  EXPECT_EQ(w.bit_count(), 6u);
  auto bytes = std::move(w).finish();
  ASSERT_EQ(bytes.size(), 1u);
  EXPECT_EQ(bytes[0], 0b10111100);
}

TEST(BitIo, RandomFieldsRoundTrip) {
  std::mt19937_64 rng(1);
  std::vector<std::pair<std::uint64_t, unsigned>> fields;
  BitWriter w;
  for (int i = 0; i < 2000; ++i) {
    const unsigned width = static_cast<unsigned>(rng() % 65);
    const std::uint64_t v = width == 64 ? rng() : (rng() & ((std::uint64_t{1} << width) - 1));
    fields.emplace_back(v, width);
    w.write(v, width);
  }
  auto bytes = std::move(w).finish();
  BitReader r(bytes, "test");
  for (auto [v, width] : fields) EXPECT_EQ(r.read(width), v);
  EXPECT_LT(r.remaining(), 8u);
}

TEST(BitIo, ReadingPastTheEndNamesTheSection) {
  std::vector<std::uint8_t> bytes{0xaa};
  BitReader r(bytes, "deviations");
  r.read(6);
  try {
    r.read(3);
    FAIL();
  } catch (const IntegrityError& e) {
    EXPECT_EQ(e.section(), "deviations");
  }
}

TEST(BitIo, BitStringOrderingAndText) {
  BitString a, b;
  a.append(0b010, 3);
  b.append(0b011, 3);
  EXPECT_EQ(a.to_string(), "010");
  EXPECT_TRUE(a < b);
  BitString prefix;
  prefix.append(0b01, 2);
  EXPECT_TRUE(prefix < a);
  BitString wide;
  wide.append(~std::uint64_t{0}, 64);
  wide.push_back(false);
  EXPECT_EQ(wide.size(), 65u);
  EXPECT_TRUE(wide.get(63));
  EXPECT_FALSE(wide.get(64));
}

TEST(BitIo, ExtractDepositAreInverse) {
  std::mt19937_64 rng(2);
  EXPECT_EQ(extract_bits(0b110101, 0b101100), 0b101u);
  EXPECT_EQ(deposit_bits(0b101, 0b101100), 0b100100u);
  for (int i = 0; i < 1000; ++i) {
    const std::uint64_t v = rng(), mask = rng();
    EXPECT_EQ(deposit_bits(extract_bits(v, mask), mask), v & mask);
  }
  EXPECT_EQ(ceil_log2(1), 0u);
  EXPECT_EQ(ceil_log2(2), 1u);
  EXPECT_EQ(ceil_log2(5), 3u);
  EXPECT_EQ(ceil_log2(std::uint64_t{1} << 40), 40u);
}

TEST(Archive, HeaderLayout) {
  const auto sections = sample_sections();
  const auto bytes = Archive::assemble(sections, 0x0102).to_bytes();
  ASSERT_GE(bytes.size(), kHeaderSize);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "EGD1");
  EXPECT_EQ(le(bytes, 4, 2), kFormatVersion);
  EXPECT_EQ(le(bytes, 6, 2), 0x0102u);
  EXPECT_EQ(le(bytes, 8, 2), kSectionCount);
  std::size_t offset = kHeaderSize;
  for (std::size_t i = 0; i < kSectionCount; ++i) {
    const std::size_t entry = 12 + i * 12;
    EXPECT_EQ(le(bytes, entry, 8), sections[i].size());
    EXPECT_EQ(le(bytes, entry + 8, 4), crc32_slow(bytes.data() + offset, sections[i].size()));
    offset += sections[i].size();
  }
  EXPECT_EQ(offset, bytes.size());
  EXPECT_EQ(le(bytes, 84, 4), crc32_slow(bytes.data(), 84));
  const std::uint8_t check[] = {'1', '2', '3', '4', '5', '6', '7', '8', '9'};
  EXPECT_EQ(crc32_slow(check, 9), 0xcbf43926u);
}

TEST(Archive, SectionsRoundTripAndBytesAreCounted) {
  const auto sections = sample_sections();
  auto archive = Archive::from_bytes(Archive::assemble(sections).to_bytes());
  archive.reset_bytes_read();
  for (std::size_t i = 0; i < kSectionCount; ++i) EXPECT_EQ(archive.read_section(static_cast<Section>(i)), sections[i]);
  std::uint64_t payload = 0;
  for (const auto& s : sections) payload += s.size();
  EXPECT_EQ(archive.bytes_read(), payload);
  EXPECT_EQ(archive.total_size(), kHeaderSize + payload);
}

TEST(Archive, FileBackedReadsOnlyWhatIsAsked) {
  const auto sections = sample_sections();
  const auto path = std::filesystem::temp_directory_path() / "entrogd_archive_test.egd";
  Archive::assemble(sections).save(path);
  auto archive = Archive::open(path);
  archive.reset_bytes_read();
  EXPECT_EQ(archive.read_section(Section::Condensed), sections[5]);
  EXPECT_EQ(archive.bytes_read(), sections[5].size());
  EXPECT_EQ(archive.section_offset(Section::Condensed), archive.total_size() - sections[5].size());
  std::filesystem::remove(path);
}

TEST(Archive, EveryCorruptedByteIsDetected) {
  const auto bytes = Archive::assemble(sample_sections()).to_bytes();
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    auto bad = bytes;
    bad[i] ^= 0x10;
    bool detected = false;
    try {
      auto a = Archive::from_bytes(bad);
      for (std::size_t s = 0; s < kSectionCount; ++s) a.read_section(static_cast<Section>(s));
    } catch (const IntegrityError&) {
      detected = true;
    }
    EXPECT_TRUE(detected) << "byte " << i;
  }
}

TEST(Archive, TruncationAndBadMagicAreIntegrityErrors) {
  auto bytes = Archive::assemble(sample_sections()).to_bytes();
  auto truncated = bytes;
  truncated.pop_back();
  EXPECT_THROW(Archive::from_bytes(truncated), IntegrityError);
  EXPECT_THROW(Archive::from_bytes(std::vector<std::uint8_t>(10, 0)), IntegrityError);
  auto magic = bytes;
  magic[0] = 'X';
  EXPECT_THROW(Archive::from_bytes(magic), IntegrityError);
}

TEST(ByteIo, LittleEndianFields) {
  ByteWriter w;
  w.u16(0x0102);
  w.u32(0x03040506);
  w.u64(0x0708090a0b0c0d0eULL);
  w.f64(-2.5);
  auto bytes = std::move(w).finish();
  EXPECT_EQ(bytes[0], 0x02);
  EXPECT_EQ(bytes[2], 0x06);
  ByteReader r(bytes, "params");
  EXPECT_EQ(r.u16(), 0x0102u);
  EXPECT_EQ(r.u32(), 0x03040506u);
  EXPECT_EQ(r.u64(), 0x0708090a0b0c0d0eULL);
  EXPECT_EQ(r.f64(), -2.5);
  EXPECT_THROW(r.u8(), IntegrityError);
}
