#include "entrogd/bitio.hpp"

#include <algorithm>
#include <bit>

#include "entrogd/error.hpp"

namespace entrogd {

void BitString::push_back(bool bit) {
  if (size_ % 64 == 0) words_.push_back(0);
  if (bit) words_.back() |= std::uint64_t{1} << (63 - size_ % 64);
  ++size_;
}

void BitString::append(std::uint64_t value, unsigned width) {
  for (unsigned i = width; i-- > 0;) push_back((value >> i) & 1u);
}

std::string BitString::to_string() const {
  std::string s;
  s.reserve(size_);
  for (std::size_t i = 0; i < size_; ++i) s.push_back(get(i) ? '1' : '0');
  return s;
}

std::strong_ordering operator<=>(const BitString& a, const BitString& b) {
  // Unused trailing bits are always zero, so whole-word comparison is exact
  // when lengths match.
  if (a.size_ == b.size_) return a.words_ <=> b.words_;
  const std::size_t common = std::min(a.size_, b.size_);
  for (std::size_t i = 0; i < common; ++i)
    if (a.get(i) != b.get(i)) return a.get(i) ? std::strong_ordering::greater : std::strong_ordering::less;
  return a.size_ <=> b.size_;
}

void BitWriter::write(std::uint64_t value, unsigned width) {
  for (unsigned i = width; i-- > 0;) {
    if (bits_ % 8 == 0) bytes_.push_back(0);
    if ((value >> i) & 1u) bytes_.back() |= static_cast<std::uint8_t>(0x80u >> (bits_ % 8));
    ++bits_;
  }
}

void BitWriter::write(const BitString& bits) {
  for (std::size_t i = 0; i < bits.size(); ++i) write(bits.get(i) ? 1u : 0u, 1);
}

std::vector<std::uint8_t> BitWriter::finish() && { return std::move(bytes_); }

std::uint64_t BitReader::read(unsigned width) {
  if (width > 64) throw IntegrityError(section_, "field wider than 64 bits");
  if (width > remaining()) throw IntegrityError(section_, "truncated bit stream");
  std::uint64_t v = 0;
  for (unsigned i = 0; i < width; ++i, ++pos_) {
    const unsigned bit = (bytes_[pos_ / 8] >> (7 - pos_ % 8)) & 1u;
    v = (v << 1) | bit;
  }
  return v;
}

std::uint64_t extract_bits(std::uint64_t value, std::uint64_t mask) {
  std::uint64_t out = 0;
  unsigned k = 0;
  while (mask != 0) {
    const std::uint64_t low = mask & (~mask + 1);
    if (value & low) out |= std::uint64_t{1} << k;
    ++k;
    mask &= mask - 1;
  }
  return out;
}

std::uint64_t deposit_bits(std::uint64_t packed, std::uint64_t mask) {
  std::uint64_t out = 0;
  unsigned k = 0;
  while (mask != 0) {
    const std::uint64_t low = mask & (~mask + 1);
    if ((packed >> k) & 1u) out |= low;
    ++k;
    mask &= mask - 1;
  }
  return out;
}

unsigned ceil_log2(std::uint64_t x) {
  if (x <= 1) return 0;
  return static_cast<unsigned>(64 - std::countl_zero(x - 1));
}

}  // namespace entrogd
