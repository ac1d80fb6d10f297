#include "entrogd/codec.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <string>

#include "entrogd/basetree.hpp"
#include "entrogd/bitio.hpp"
#include "entrogd/error.hpp"

namespace entrogd {

namespace {

constexpr std::uint8_t kFlagExactTruncation = 1u << 0;
constexpr std::uint8_t kFlagImportance = 1u << 1;

std::uint64_t bit_bytes(std::uint64_t bits) { return (bits + 7) / 8; }

std::uint64_t width_mask(unsigned width) {
  return width >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << width) - 1;
}

void write_bitmap(ByteWriter& w, const BitSelection& sel) {
  std::vector<std::uint8_t> bitmap(bit_bytes(sel.chunk_width), 0);
  for (BitPos p : sel.positions) bitmap[p / 8] |= static_cast<std::uint8_t>(0x80u >> (p % 8));
  w.raw(bitmap.data(), bitmap.size());
}

BitSelection read_bitmap(ByteReader& r, std::uint32_t chunk_width) {
  BitSelection sel;
  sel.chunk_width = chunk_width;
  const std::size_t n = bit_bytes(chunk_width);
  const std::uint8_t* bitmap = r.raw(n);
  for (std::uint32_t p = 0; p < n * 8; ++p) {
    if (!(bitmap[p / 8] & (0x80u >> (p % 8)))) continue;
    if (p >= chunk_width) throw IntegrityError("params", "selection bitmap has bits beyond the chunk width");
    sel.positions.push_back(p);
  }
  return sel;
}

std::vector<std::uint8_t> serialize_params(const ArchiveParams& p) {
  ByteWriter w;
  w.u64(p.n);
  w.u64(p.m);
  w.u64(p.n_b);
  w.u32(static_cast<std::uint32_t>(p.d()));
  w.u32(p.chunk_width);
  w.u32(p.tau);
  w.u64(p.m_max);
  w.u8(static_cast<std::uint8_t>(p.strategy));
  w.u8(static_cast<std::uint8_t>((p.exact_truncation ? kFlagExactTruncation : 0) |
                                 (p.importance ? kFlagImportance : 0)));
  for (std::size_t c = 0; c < p.d(); ++c) {
    const ColumnParams& col = p.columns[c];
    w.u8(static_cast<std::uint8_t>(col.kind));
    w.u8(static_cast<std::uint8_t>(col.encoding));
    w.u8(static_cast<std::uint8_t>(col.precision));
    w.u8(static_cast<std::uint8_t>(col.decimal_scale));
    w.u8(static_cast<std::uint8_t>(col.bit_width));
    w.u64(static_cast<std::uint64_t>(col.offset));
    const std::string& name = p.names[c];
    if (name.size() > 0xffff) throw InvalidArgument("column name too long: " + name.substr(0, 32) + "...");
    w.u16(static_cast<std::uint16_t>(name.size()));
    w.raw(reinterpret_cast<const std::uint8_t*>(name.data()), name.size());
  }
  if (p.importance)
    for (double x : *p.importance) w.f64(x);
  write_bitmap(w, p.base_bits);
  write_bitmap(w, p.analytic_bits);
  return std::move(w).finish();
}

ArchiveParams parse_params(const std::vector<std::uint8_t>& bytes) {
  ByteReader r(bytes, "params");
  ArchiveParams p;
  p.n = r.u64();
  p.m = r.u64();
  p.n_b = r.u64();
  const std::uint32_t d = r.u32();
  p.chunk_width = r.u32();
  p.tau = r.u32();
  p.m_max = r.u64();
  const std::uint8_t strategy = r.u8();
  if (strategy > static_cast<std::uint8_t>(Strategy::Greedy)) throw IntegrityError("params", "unknown strategy");
  p.strategy = static_cast<Strategy>(strategy);
  const std::uint8_t flags = r.u8();
  p.exact_truncation = flags & kFlagExactTruncation;

  if (p.n == 0 || d == 0) throw IntegrityError("params", "empty dataset");
  if (p.n_b == 0 || p.n_b > p.n + p.m) throw IntegrityError("params", "base count out of range");
  if (d > r.remaining()) throw IntegrityError("params", "column count exceeds section size");

  std::uint64_t width_sum = 0;
  for (std::uint32_t c = 0; c < d; ++c) {
    ColumnParams col;
    const std::uint8_t kind = r.u8();
    const std::uint8_t encoding = r.u8();
    const std::uint8_t precision = r.u8();
    col.decimal_scale = r.u8();
    col.bit_width = r.u8();
    col.offset = static_cast<std::int64_t>(r.u64());
    if (kind > 1 || encoding > 2 || (precision != 32 && precision != 64))
      throw IntegrityError("params", "bad descriptor for column " + std::to_string(c));
    if (col.bit_width < 1 || col.bit_width > 64 || col.decimal_scale > 18)
      throw IntegrityError("params", "bad width or scale for column " + std::to_string(c));
    col.kind = static_cast<ColumnKind>(kind);
    col.encoding = static_cast<Encoding>(encoding);
    col.precision = static_cast<Precision>(precision);
    width_sum += col.bit_width;
    const std::uint16_t len = r.u16();
    const std::uint8_t* name = r.raw(len);
    p.columns.push_back(col);
    p.names.emplace_back(reinterpret_cast<const char*>(name), len);
  }
  if (width_sum != p.chunk_width) throw IntegrityError("params", "column widths do not sum to the chunk width");
  if (flags & kFlagImportance) {
    std::vector<double> importance(d);
    for (double& x : importance) x = r.f64();
    p.importance = std::move(importance);
  }
  p.base_bits = read_bitmap(r, p.chunk_width);
  p.analytic_bits = read_bitmap(r, p.chunk_width);
  if (r.remaining() != 0) throw IntegrityError("params", "trailing bytes");
  return p;
}

void expect_length(const Archive& archive, Section s, std::uint64_t expected) {
  if (archive.section_size(s) != expected)
    throw IntegrityError(std::string(section_name(s)), "length " + std::to_string(archive.section_size(s)) +
                                                           " bytes, expected " + std::to_string(expected));
}

struct ColumnSplit {
  std::vector<std::uint64_t> base_mask;
  std::vector<std::uint64_t> deviation_mask;
  std::vector<unsigned> base_width;
  std::vector<unsigned> deviation_width;
};

ColumnSplit split_columns(const std::vector<ColumnParams>& columns, const std::vector<std::uint64_t>& masks) {
  ColumnSplit s;
  for (std::size_t c = 0; c < columns.size(); ++c) {
    const std::uint64_t full = width_mask(columns[c].bit_width);
    s.base_mask.push_back(masks[c] & full);
    s.deviation_mask.push_back(~masks[c] & full);
    s.base_width.push_back(static_cast<unsigned>(std::popcount(masks[c] & full)));
    s.deviation_width.push_back(static_cast<unsigned>(std::popcount(~masks[c] & full)));
  }
  return s;
}

std::vector<std::uint64_t> masks_for(const ArchiveParams& p) {
  std::vector<std::uint64_t> masks(p.d(), 0);
  std::vector<std::uint32_t> start(p.d(), 0);
  for (std::size_t c = 1; c < p.d(); ++c) start[c] = start[c - 1] + p.columns[c - 1].bit_width;
  for (BitPos pos : p.base_bits.positions) {
    const auto c = static_cast<std::size_t>(std::upper_bound(start.begin(), start.end(), pos) - start.begin() - 1);
    const unsigned shift = p.columns[c].bit_width - 1 - (pos - start[c]);
    masks[c] |= std::uint64_t{1} << shift;
  }
  return masks;
}

// Base values (deviation bits zero) from the base table, n_b x d.
std::vector<std::uint64_t> read_base_table(const Archive& archive, const ArchiveParams& p, const ColumnSplit& split) {
  const std::uint64_t l_b = p.base_bits.base_width();
  expect_length(archive, Section::Bases, bit_bytes(p.n_b * l_b));
  const auto bytes = archive.read_section(Section::Bases);
  BitReader reader(bytes, "bases");
  std::vector<std::uint64_t> bases(p.n_b * p.d());
  for (std::uint64_t j = 0; j < p.n_b; ++j)
    for (std::size_t c = 0; c < p.d(); ++c)
      bases[j * p.d() + c] = deposit_bits(reader.read(split.base_width[c]), split.base_mask[c]);
  return bases;
}

std::vector<std::uint64_t> read_ids(const Archive& archive, const ArchiveParams& p) {
  const std::uint64_t rows = p.n + p.m;
  const unsigned l_id = ceil_log2(p.n_b);
  expect_length(archive, Section::Ids, bit_bytes(rows * l_id));
  const auto bytes = archive.read_section(Section::Ids);
  BitReader reader(bytes, "ids");
  std::vector<std::uint64_t> ids(rows);
  std::vector<std::uint8_t> referenced(p.n_b, 0);
  for (std::uint64_t r = 0; r < rows; ++r) {
    ids[r] = reader.read(l_id);
    if (ids[r] >= p.n_b)
      throw IntegrityError("ids", "row " + std::to_string(r) + " references base " + std::to_string(ids[r]) +
                                      " of " + std::to_string(p.n_b));
    referenced[ids[r]] = 1;
  }
  if (std::find(referenced.begin(), referenced.end(), 0) != referenced.end())
    throw IntegrityError("ids", "base table holds an unreferenced base");
  return ids;
}

QuantizedMatrix build_matrix(const ArchiveParams& p, std::vector<std::vector<std::uint64_t>> columns) {
  try {
    return QuantizedMatrix(p.columns, std::move(columns), p.names);
  } catch (const InvalidArgument& e) {
    throw IntegrityError("params", e.what());
  }
}

}  // namespace

std::uint64_t ArchiveParams::original_size_bytes() const {
  std::uint64_t total = 0;
  for (const ColumnParams& c : columns) total += n * (static_cast<std::uint64_t>(c.precision) / 8);
  return total;
}

Compressed compress(const Table& table, const CompressConfig& config) {
  const QuantizedMatrix matrix = quantize_dataset(table, config.quantize);
  const std::size_t n = matrix.rows();
  const std::size_t d = matrix.cols();

  ArchiveParams params;
  params.n = n;
  params.chunk_width = static_cast<std::uint32_t>(matrix.chunk_width());
  params.tau = config.tau;
  params.m_max = config.m_max.value_or(default_m_max(n));
  params.strategy = config.strategy;
  params.exact_truncation = config.exact_truncation;
  params.columns = matrix.params();
  params.names = matrix.names();
  params.importance = config.importance;
  params.base_bits.chunk_width = matrix.chunk_width();
  params.analytic_bits.chunk_width = matrix.chunk_width();

  CompressStats stats;
  stats.m_max = params.m_max;

  const auto start = std::chrono::steady_clock::now();
  QuantizedMatrix extended;
  const QuantizedMatrix* target = &matrix;
  BitStats bits;
  if (config.strategy == Strategy::Entropy) {
    bits = bit_stats(matrix);
    CondensedOptions options;
    options.m_max = params.m_max;
    options.importance = config.importance;
    options.exact_truncation = config.exact_truncation;
    stats.condensed = generate_condensed_samples(matrix, bits, options);
    extended = matrix.with_rows_appended(stats.condensed.requantized);
    target = &extended;
    params.m = stats.condensed.size();
    params.analytic_bits = stats.condensed.analytic_bits;
  }

  // The params section has a fixed size once d, names and l_c are known.
  const std::uint64_t params_bytes = serialize_params(params).size();
  const std::uint64_t condensed_bytes = params.m * d * 8;
  const std::uint64_t params_bits = 8 * (params_bytes + condensed_bytes);

  BaseTree tree(*target);
  stats.selection = config.strategy == Strategy::Entropy
                        ? select_compression_bits(tree, bits, params.m, config.tau, params_bits)
                        : greedy_select_bits(tree, config.tau, 0, params_bits);
  stats.configuration_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const std::vector<Leaf> leaves = tree.leaves();
  params.n_b = leaves.size();
  params.base_bits.positions = stats.selection.best.sorted();
  stats.model = stats.selection.best_model;
  stats.size_bits = compressed_size(stats.model);
  if (stats.model.n_b != params.n_b) throw Error("internal: base count drifted after selection rollback");

  const std::uint64_t rows = n + params.m;
  std::vector<std::uint32_t> ids(rows);
  for (std::size_t j = 0; j < leaves.size(); ++j)
    for (std::uint32_t r : leaves[j].rows) ids[r] = static_cast<std::uint32_t>(j);

  const ColumnSplit split = split_columns(params.columns, params.base_bits.column_masks(*target));

  SectionBytes sections;
  sections[static_cast<std::size_t>(Section::Params)] = serialize_params(params);
  {
    BitWriter w;
    for (const Leaf& leaf : leaves) w.write(leaf.base);
    sections[static_cast<std::size_t>(Section::Bases)] = std::move(w).finish();
  }
  {
    BitWriter w;
    const unsigned l_id = ceil_log2(params.n_b);
    for (std::uint32_t id : ids) w.write(id, l_id);
    sections[static_cast<std::size_t>(Section::Ids)] = std::move(w).finish();
  }
  {
    BitWriter w;
    for (std::uint64_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < d; ++c)
        w.write(extract_bits(target->value(r, c), split.deviation_mask[c]), split.deviation_width[c]);
    sections[static_cast<std::size_t>(Section::Deviations)] = std::move(w).finish();
  }
  {
    BitWriter w;
    const unsigned l_w = weight_width(n);
    for (std::uint64_t weight : stats.condensed.weights) w.write(weight - 1, l_w);
    sections[static_cast<std::size_t>(Section::Weights)] = std::move(w).finish();
  }
  {
    ByteWriter w;
    for (double v : stats.condensed.samples) w.f64(v);
    sections[static_cast<std::size_t>(Section::Condensed)] = std::move(w).finish();
  }
  return Compressed{Archive::assemble(sections), std::move(stats)};
}

ArchiveParams read_params(const Archive& archive) { return parse_params(archive.read_section(Section::Params)); }

SizeModel stored_size_model(const Archive& archive) {
  const ArchiveParams p = read_params(archive);
  const std::uint64_t params_bits =
      8 * (archive.section_size(Section::Params) + archive.section_size(Section::Condensed));
  return SizeModel::make(p.n, p.m, p.n_b, p.chunk_width, p.base_bits.base_width(), params_bits);
}

QuantizedMatrix decode_extended(const Archive& archive) {
  const ArchiveParams p = read_params(archive);
  const ColumnSplit split = split_columns(p.columns, masks_for(p));
  const std::vector<std::uint64_t> bases = read_base_table(archive, p, split);
  const std::vector<std::uint64_t> ids = read_ids(archive, p);

  const std::uint64_t rows = p.n + p.m;
  expect_length(archive, Section::Deviations, bit_bytes(rows * p.base_bits.deviation_width()));
  const auto bytes = archive.read_section(Section::Deviations);
  BitReader reader(bytes, "deviations");

  std::vector<std::vector<std::uint64_t>> columns(p.d(), std::vector<std::uint64_t>(rows));
  for (std::uint64_t r = 0; r < rows; ++r) {
    const std::uint64_t* base = bases.data() + ids[r] * p.d();
    for (std::size_t c = 0; c < p.d(); ++c)
      columns[c][r] = base[c] | deposit_bits(reader.read(split.deviation_width[c]), split.deviation_mask[c]);
  }
  return build_matrix(p, std::move(columns));
}

Table decompress(const Archive& archive) {
  archive.verify();
  QuantizedMatrix extended = decode_extended(archive);
  const std::size_t n = extended.rows() - read_params(archive).m;
  std::vector<std::vector<std::uint64_t>> columns(extended.cols());
  for (std::size_t c = 0; c < extended.cols(); ++c) {
    const auto all = extended.column(c);
    columns[c].assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n));
  }
  return dequantize(QuantizedMatrix(extended.params(), std::move(columns), extended.names()));
}

CondensedSampleSet extract_condensed(const Archive& archive) {
  const ArchiveParams p = read_params(archive);
  const unsigned l_w = weight_width(p.n);
  expect_length(archive, Section::Weights, bit_bytes(p.m * l_w));
  expect_length(archive, Section::Condensed, p.m * p.d() * 8);

  CondensedSampleSet out;
  out.d = p.d();
  out.analytic_bits = p.analytic_bits;
  {
    const auto bytes = archive.read_section(Section::Weights);
    BitReader reader(bytes, "weights");
    out.weights.resize(p.m);
    for (auto& w : out.weights) w = reader.read(l_w) + 1;
  }
  if (out.total_weight() != p.n && p.m > 0)
    throw IntegrityError("weights", "weights sum to " + std::to_string(out.total_weight()) + ", expected " +
                                        std::to_string(p.n));
  {
    const auto bytes = archive.read_section(Section::Condensed);
    ByteReader reader(bytes, "condensed");
    out.samples.resize(p.m * p.d());
    for (double& v : out.samples) v = reader.f64();
  }
  return out;
}

BaseCentroids base_centroids(const Archive& archive) {
  const ArchiveParams p = read_params(archive);
  const ColumnSplit split = split_columns(p.columns, masks_for(p));
  const std::vector<std::uint64_t> bases = read_base_table(archive, p, split);
  const std::vector<std::uint64_t> ids = read_ids(archive, p);

  BaseCentroids out;
  out.d = p.d();
  out.counts.assign(p.n_b, 0);
  for (std::uint64_t r = 0; r < p.n; ++r) ++out.counts[ids[r]];
  out.centroids.resize(p.n_b * p.d());
  for (std::uint64_t j = 0; j < p.n_b; ++j) {
    for (std::size_t c = 0; c < p.d(); ++c) {
      const std::uint64_t low = bases[j * p.d() + c];
      const std::uint64_t high = low | split.deviation_mask[c];
      const long double mid = (static_cast<long double>(low) + static_cast<long double>(high)) / 2.0L;
      out.centroids[j * p.d() + c] = p.columns[c].to_domain(mid);
    }
  }
  // Bases used only by condensed rows carry no original-row weight.
  std::size_t kept = 0;
  for (std::uint64_t j = 0; j < p.n_b; ++j) {
    if (out.counts[j] == 0) continue;
    out.counts[kept] = out.counts[j];
    std::copy_n(out.centroids.begin() + static_cast<std::ptrdiff_t>(j * p.d()), p.d(),
                out.centroids.begin() + static_cast<std::ptrdiff_t>(kept * p.d()));
    ++kept;
  }
  out.counts.resize(kept);
  out.centroids.resize(kept * p.d());
  return out;
}

}  // namespace entrogd
