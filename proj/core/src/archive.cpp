#include "entrogd/archive.hpp"

#include <zlib.h>

#include <algorithm>
#include <atomic>
#include <bit>
#include <fstream>
#include <mutex>
#include <string>

#include "entrogd/error.hpp"

namespace entrogd {

namespace {

constexpr std::array<char, 4> kMagic = {'E', 'G', 'D', '1'};
constexpr std::size_t kHeaderBodySize = kHeaderSize - 4;

std::uint32_t crc32_of(const std::uint8_t* data, std::size_t n) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed large buffers in pieces.
  while (n > 0) {
    const auto piece = static_cast<uInt>(std::min<std::size_t>(n, std::size_t{1} << 30));
    crc = crc32(crc, data, piece);
    data += piece;
    n -= piece;
  }
  return static_cast<std::uint32_t>(crc);
}

std::uint64_t load_le(const std::uint8_t* p, int n) {
  std::uint64_t v = 0;
  for (int i = n - 1; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

}  // namespace

std::string_view section_name(Section s) {
  switch (s) {
    case Section::Params:
      return "params";
    case Section::Bases:
      return "bases";
    case Section::Ids:
      return "ids";
    case Section::Deviations:
      return "deviations";
    case Section::Weights:
      return "weights";
    case Section::Condensed:
      return "condensed";
  }
  return "unknown";
}

struct Archive::Source {
  virtual ~Source() = default;
  virtual std::uint64_t size() const = 0;
  virtual void read(std::uint64_t offset, std::uint8_t* out, std::size_t n) = 0;

  void fetch(std::uint64_t offset, std::uint8_t* out, std::size_t n) {
    read(offset, out, n);
    touched.fetch_add(n, std::memory_order_relaxed);
  }

  std::atomic<std::uint64_t> touched{0};
};

struct Archive::MemorySource final : Archive::Source {
  explicit MemorySource(std::vector<std::uint8_t> b) : bytes(std::move(b)) {}
  std::uint64_t size() const override { return bytes.size(); }
  void read(std::uint64_t offset, std::uint8_t* out, std::size_t n) override {
    std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(offset), n, out);
  }
  std::vector<std::uint8_t> bytes;
};

struct Archive::FileSource final : Archive::Source {
  explicit FileSource(const std::filesystem::path& path) : stream(path, std::ios::binary) {
    if (!stream) throw Error("cannot open archive " + path.string());
    stream.seekg(0, std::ios::end);
    length = static_cast<std::uint64_t>(stream.tellg());
  }
  std::uint64_t size() const override { return length; }
  void read(std::uint64_t offset, std::uint8_t* out, std::size_t n) override {
    std::lock_guard lock(mutex);
    stream.clear();
    stream.seekg(static_cast<std::streamoff>(offset));
    stream.read(reinterpret_cast<char*>(out), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(stream.gcount()) != n) throw IntegrityError("file", "short read");
  }
  std::ifstream stream;
  std::uint64_t length = 0;
  std::mutex mutex;
};

Archive Archive::assemble(const SectionBytes& sections, std::uint16_t flags) {
  std::vector<std::uint8_t> out(kHeaderSize, 0);
  std::copy(kMagic.begin(), kMagic.end(), out.begin());
  auto store = [&](std::size_t at, std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out[at + static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(v >> (8 * i));
  };
  store(4, kFormatVersion, 2);
  store(6, flags, 2);
  store(8, kSectionCount, 2);
  store(10, 0, 2);
  for (std::size_t s = 0; s < kSectionCount; ++s) {
    store(12 + s * 12, sections[s].size(), 8);
    store(20 + s * 12, crc32_of(sections[s].data(), sections[s].size()), 4);
  }
  store(kHeaderBodySize, crc32_of(out.data(), kHeaderBodySize), 4);
  for (const auto& s : sections) out.insert(out.end(), s.begin(), s.end());
  return from_bytes(std::move(out));
}

Archive Archive::from_bytes(std::vector<std::uint8_t> bytes) {
  Archive a;
  a.source_ = std::make_shared<MemorySource>(std::move(bytes));
  a.load_header();
  return a;
}

Archive Archive::open(const std::filesystem::path& path) {
  Archive a;
  a.source_ = std::make_shared<FileSource>(path);
  a.load_header();
  return a;
}

void Archive::load_header() {
  if (source_->size() < kHeaderSize) throw IntegrityError("header", "archive shorter than its header");
  std::array<std::uint8_t, kHeaderSize> h{};
  source_->fetch(0, h.data(), h.size());
  if (!std::equal(kMagic.begin(), kMagic.end(), h.begin())) throw IntegrityError("header", "bad magic");
  if (load_le(h.data() + kHeaderBodySize, 4) != crc32_of(h.data(), kHeaderBodySize))
    throw IntegrityError("header", "checksum mismatch");
  const auto version = load_le(h.data() + 4, 2);
  if (version != kFormatVersion)
    throw IntegrityError("header", "unsupported format version " + std::to_string(version));
  if (load_le(h.data() + 8, 2) != kSectionCount) throw IntegrityError("header", "unexpected section count");
  flags_ = static_cast<std::uint16_t>(load_le(h.data() + 6, 2));

  std::uint64_t total = kHeaderSize;
  for (std::size_t s = 0; s < kSectionCount; ++s) {
    lengths_[s] = load_le(h.data() + 12 + s * 12, 8);
    crcs_[s] = static_cast<std::uint32_t>(load_le(h.data() + 20 + s * 12, 4));
    if (lengths_[s] > source_->size()) throw IntegrityError("header", "section length exceeds archive size");
    total += lengths_[s];
  }
  if (total != source_->size())
    throw IntegrityError("header", "section lengths sum to " + std::to_string(total) + " bytes, archive has " +
                                       std::to_string(source_->size()));
}

std::uint64_t Archive::section_offset(Section s) const {
  std::uint64_t offset = kHeaderSize;
  for (std::size_t i = 0; i < static_cast<std::size_t>(s); ++i) offset += lengths_[i];
  return offset;
}

std::uint64_t Archive::total_size() const { return source_->size(); }

std::vector<std::uint8_t> Archive::read_section(Section s) const {
  const auto index = static_cast<std::size_t>(s);
  std::vector<std::uint8_t> out(lengths_[index]);
  source_->fetch(section_offset(s), out.data(), out.size());
  if (crc32_of(out.data(), out.size()) != crcs_[index])
    throw IntegrityError(std::string(section_name(s)), "checksum mismatch");
  return out;
}

void Archive::verify() const {
  for (std::size_t i = 0; i < kSectionCount; ++i) (void)read_section(static_cast<Section>(i));
}

std::uint64_t Archive::bytes_read() const { return source_->touched.load(std::memory_order_relaxed); }

void Archive::reset_bytes_read() const { source_->touched.store(0, std::memory_order_relaxed); }

std::vector<std::uint8_t> Archive::to_bytes() const {
  std::vector<std::uint8_t> out(source_->size());
  source_->read(0, out.data(), out.size());
  return out;
}

void Archive::save(const std::filesystem::path& path) const {
  const auto bytes = to_bytes();
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot write archive " + path.string());
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw Error("failed writing archive " + path.string());
}

void ByteWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

double ByteReader::f64() { return std::bit_cast<double>(u64()); }

const std::uint8_t* ByteReader::raw(std::size_t n) {
  if (n > remaining()) throw IntegrityError(std::string(section_), "truncated section");
  const std::uint8_t* p = bytes_.data() + pos_;
  pos_ += n;
  return p;
}

std::uint64_t ByteReader::get(int n) {
  const std::uint8_t* p = raw(static_cast<std::size_t>(n));
  return load_le(p, n);
}

}  // namespace entrogd
