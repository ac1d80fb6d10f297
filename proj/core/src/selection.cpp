#include "entrogd/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "entrogd/bitio.hpp"
#include "entrogd/error.hpp"

namespace entrogd {

bool BitSelection::contains(BitPos pos) const {
  return std::find(positions.begin(), positions.end(), pos) != positions.end();
}

std::vector<BitPos> BitSelection::sorted() const {
  std::vector<BitPos> out = positions;
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::uint64_t> BitSelection::column_masks(const QuantizedMatrix& matrix) const {
  std::vector<std::uint64_t> masks(matrix.cols(), 0);
  for (BitPos p : positions) masks[matrix.column_of(p)] |= std::uint64_t{1} << matrix.shift_of(p);
  return masks;
}

unsigned weight_width(std::uint64_t n) { return n <= 1 ? 1u : ceil_log2(n); }

SizeModel SizeModel::make(std::uint64_t n, std::uint64_t m, std::uint64_t n_b, std::uint64_t chunk_width,
                          std::uint64_t base_width, std::uint64_t params_bits) {
  if (base_width > chunk_width) throw InvalidArgument("SizeModel: base wider than chunk");
  SizeModel s;
  s.n = n;
  s.m = m;
  s.n_b = n_b;
  s.l_b = base_width;
  s.l_d = chunk_width - base_width;
  s.l_w = weight_width(n);
  s.l_id = ceil_log2(n_b);
  s.s_params = params_bits;
  return s;
}

std::uint64_t compressed_size(const SizeModel& s) {
  return s.n_b * s.l_b + (s.n + s.m) * (s.l_d + s.l_id) + s.m * s.l_w + s.s_params;
}

std::uint64_t CondensedSampleSet::total_weight() const {
  return std::accumulate(weights.begin(), weights.end(), std::uint64_t{0});
}

std::size_t default_m_max(std::size_t n) { return std::min<std::size_t>(4096, std::max<std::size_t>(16, n / 100)); }

namespace {

struct Group {
  std::uint64_t count = 0;
  std::vector<WideSum> sums;          // stored-value sums per column
  std::vector<long double> raw_sums;  // original-domain sums, used by RawBits columns
};

std::uint64_t round_half_even(WideSum sum, std::uint64_t count) {
  const WideSum q = sum / count;
  const WideSum r = sum % count;
  WideSum out = q;
  if (2 * r > count || (2 * r == count && (q & 1) != 0)) ++out;
  return static_cast<std::uint64_t>(out);
}

double group_sample(const Group& g, const ColumnParams& p, std::size_t c) {
  if (p.encoding == Encoding::RawBits) return static_cast<double>(g.raw_sums[c] / static_cast<long double>(g.count));
  return p.to_domain(static_cast<long double>(g.sums[c]) / static_cast<long double>(g.count));
}

std::vector<std::size_t> column_visit_order(const QuantizedMatrix& matrix, const CondensedOptions& options) {
  std::vector<std::size_t> order(matrix.cols());
  std::iota(order.begin(), order.end(), 0);
  if (options.importance) {
    const auto& w = *options.importance;
    if (w.size() != matrix.cols())
      throw InvalidArgument("importance has " + std::to_string(w.size()) + " entries, expected " +
                            std::to_string(matrix.cols()));
    for (double x : w)
      if (!std::isfinite(x)) throw InvalidArgument("importance entries must be finite");
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return w[a] > w[b]; });
  }
  return order;
}

// Merge the smallest-weight sample into its nearest (L2) neighbour until at most m_max remain.
void truncate_groups(std::vector<Group>& groups, const QuantizedMatrix& matrix, std::size_t m_max) {
  const std::size_t d = matrix.cols();
  std::vector<double> pts(groups.size() * d);
  auto refresh = [&](std::size_t j) {
    for (std::size_t c = 0; c < d; ++c) pts[j * d + c] = group_sample(groups[j], matrix.params(c), c);
  };
  for (std::size_t j = 0; j < groups.size(); ++j) refresh(j);

  std::vector<char> alive(groups.size(), 1);
  std::size_t live = groups.size();
  while (live > m_max && live > 1) {
    std::size_t victim = groups.size();
    for (std::size_t j = 0; j < groups.size(); ++j)
      if (alive[j] && (victim == groups.size() || groups[j].count < groups[victim].count)) victim = j;

    std::size_t target = groups.size();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < groups.size(); ++j) {
      if (!alive[j] || j == victim) continue;
      double dist = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        const double diff = pts[j * d + c] - pts[victim * d + c];
        dist += diff * diff;
      }
      if (dist < best) {
        best = dist;
        target = j;
      }
    }

    Group& t = groups[target];
    const Group& v = groups[victim];
    t.count += v.count;
    for (std::size_t c = 0; c < d; ++c) {
      t.sums[c] += v.sums[c];
      t.raw_sums[c] += v.raw_sums[c];
    }
    refresh(target);
    alive[victim] = 0;
    --live;
  }

  std::vector<Group> kept;
  kept.reserve(live);
  for (std::size_t j = 0; j < groups.size(); ++j)
    if (alive[j]) kept.push_back(std::move(groups[j]));
  groups = std::move(kept);
}

}  // namespace

CondensedSampleSet generate_condensed_samples(const QuantizedMatrix& matrix, const CondensedOptions& options) {
  return generate_condensed_samples(matrix, bit_stats(matrix), options);
}

CondensedSampleSet generate_condensed_samples(const QuantizedMatrix& matrix, const BitStats& stats,
                                              const CondensedOptions& options) {
  if (options.m_max < 1) throw InvalidArgument("m_max must be at least 1");
  if (stats.positions.size() != matrix.chunk_width())
    throw InvalidArgument("bit statistics do not match the matrix");

  const std::size_t d = matrix.cols();
  const std::size_t chunk_width = matrix.chunk_width();
  BaseTree tree(matrix);

  const std::vector<BitPos> constants = stats.constant_positions();
  for (BitPos p : constants) tree.add_bit(p);

  CondensedSampleSet out;
  out.d = d;

  // Counter initialised as in the reference pseudocode: 1 with constant bits, else 0.
  std::size_t m = constants.empty() ? 0 : 1;
  const std::vector<std::size_t> visit = column_visit_order(matrix, options);
  std::vector<BitPos> cursor(d);
  for (std::size_t c = 0; c < d; ++c) cursor[c] = matrix.first_position(c);

  while (m < options.m_max && tree.selected_bits().size() < chunk_width) {
    // One leftmost remaining bit per dimension.
    std::vector<BitPos> round;
    for (std::size_t c : visit) {
      const BitPos end = matrix.first_position(c) + matrix.params(c).bit_width;
      while (cursor[c] < end && tree.is_selected(cursor[c])) ++cursor[c];
      if (cursor[c] < end) round.push_back(cursor[c]);
    }
    for (BitPos p : round) {
      out.count_before_last_bit = tree.leaf_count();
      m = tree.add_bit(p);
      if (m >= options.m_max) break;
    }
  }

  out.analytic_bits.positions = tree.selected_bits();
  out.analytic_bits.chunk_width = chunk_width;
  const std::vector<std::uint64_t> base_masks = out.analytic_bits.column_masks(matrix);

  std::vector<Group> groups;
  const std::vector<Leaf> leaves = tree.leaves();
  groups.reserve(leaves.size());
  for (const Leaf& leaf : leaves) {
    Group g;
    g.count = leaf.rows.size();
    g.sums.assign(d, 0);
    g.raw_sums.assign(d, 0.0L);
    for (std::size_t c = 0; c < d; ++c) {
      const auto values = matrix.column(c);
      const std::uint64_t base_value = values[leaf.rows.front()] & base_masks[c];
      WideSum deviation_sum = 0;
      for (std::uint32_t r : leaf.rows) deviation_sum += values[r] & ~base_masks[c];
      // s_j = b_j + mean(deviations), kept as an exact sum: c_j * b_j + sum(deviations).
      g.sums[c] = static_cast<WideSum>(base_value) * g.count + deviation_sum;
      if (matrix.params(c).encoding == Encoding::RawBits) {
        const ColumnParams& p = matrix.params(c);
        for (std::uint32_t r : leaf.rows) g.raw_sums[c] += p.to_domain(static_cast<long double>(values[r]));
      }
    }
    groups.push_back(std::move(g));
  }

  out.count_before_truncation = groups.size();
  if (options.exact_truncation && groups.size() > options.m_max) truncate_groups(groups, matrix, options.m_max);

  const std::size_t count = groups.size();
  out.samples.resize(count * d);
  out.weights.resize(count);
  out.quantized_sums.resize(count * d);
  out.requantized.resize(count * d);
  for (std::size_t j = 0; j < count; ++j) {
    const Group& g = groups[j];
    out.weights[j] = g.count;
    for (std::size_t c = 0; c < d; ++c) {
      out.samples[j * d + c] = group_sample(g, matrix.params(c), c);
      out.quantized_sums[j * d + c] = g.sums[c];
      out.requantized[j * d + c] = round_half_even(g.sums[c], g.count);
    }
  }
  return out;
}

SelectionResult select_compression_bits(const QuantizedMatrix& extended, const BitStats& stats, std::size_t m,
                                        unsigned tau, std::uint64_t params_bits) {
  BaseTree tree(extended);
  return select_compression_bits(tree, stats, m, tau, params_bits);
}

SelectionResult select_compression_bits(BaseTree& tree, const BitStats& stats, std::size_t m, unsigned tau,
                                        std::uint64_t params_bits) {
  const QuantizedMatrix& extended = tree.matrix();
  const std::size_t chunk_width = extended.chunk_width();
  if (tau < 1) throw InvalidArgument("tau must be at least 1");
  if (!tree.selected_bits().empty()) throw InvalidArgument("select_compression_bits needs a fresh BaseTree");
  if (stats.positions.size() != chunk_width) throw InvalidArgument("bit statistics do not match the matrix");
  if (extended.rows() < m || extended.rows() - m != stats.rows)
    throw InvalidArgument("extended matrix must hold the original rows plus m condensed rows");
  const std::uint64_t n = stats.rows;

  auto score = [&](std::size_t n_b, std::size_t l_b) {
    return SizeModel::make(n, m, n_b, chunk_width, l_b, params_bits);
  };

  // Constant bits of the extended matrix: constant in the original rows and
  // matched by every appended row.
  for (BitPos p = 0; p < chunk_width; ++p) {
    const BitStat& s = stats.positions[p];
    if (!s.constant) continue;
    const bool value = s.ones != 0;
    bool agrees = true;
    for (std::size_t r = stats.rows; r < extended.rows() && agrees; ++r) agrees = extended.bit(r, p) == value;
    if (agrees) tree.add_bit(p);
  }

  SelectionResult result;
  result.initial_bits = tree.selected_bits().size();
  result.best_model = score(tree.leaf_count(), result.initial_bits);
  result.best_size = compressed_size(result.best_model);
  result.initial_size = result.best_size;
  std::size_t best_len = result.initial_bits;

  std::vector<BitPos> order;
  order.reserve(chunk_width);
  for (BitPos p = 0; p < chunk_width; ++p)
    if (!tree.is_selected(p)) order.push_back(p);
  std::stable_sort(order.begin(), order.end(), [&](BitPos a, BitPos b) {
    return stats.positions[a].entropy < stats.positions[b].entropy;
  });

  unsigned plateau = 0;
  for (BitPos p : order) {
    const std::size_t n_b = tree.add_bit(p);
    const SizeModel model = score(n_b, tree.selected_bits().size());
    const std::uint64_t size = compressed_size(model);
    SelectionStep step{p, stats.positions[p].entropy, n_b, size, size < result.best_size};
    result.trace.push_back(step);
    if (step.improved) {
      result.best_size = size;
      result.best_model = model;
      best_len = tree.selected_bits().size();
      plateau = 0;
    } else {
      ++plateau;
    }
    if (plateau >= tau) break;
  }

  while (tree.selected_bits().size() > best_len) tree.remove_last_bit();
  result.best.positions = tree.selected_bits();
  result.best.chunk_width = chunk_width;
  return result;
}

SelectionResult greedy_select_bits(const QuantizedMatrix& matrix, unsigned tau, std::size_t m,
                                   std::uint64_t params_bits) {
  BaseTree tree(matrix);
  return greedy_select_bits(tree, tau, m, params_bits);
}

SelectionResult greedy_select_bits(BaseTree& tree, unsigned tau, std::size_t m, std::uint64_t params_bits) {
  const QuantizedMatrix& matrix = tree.matrix();
  if (tau < 1) throw InvalidArgument("tau must be at least 1");
  if (!tree.selected_bits().empty()) throw InvalidArgument("greedy_select_bits needs a fresh BaseTree");
  if (matrix.rows() < m) throw InvalidArgument("matrix has fewer rows than m");

  const std::size_t chunk_width = matrix.chunk_width();
  const std::uint64_t n = matrix.rows() - m;
  auto score = [&](std::size_t n_b, std::size_t l_b) {
    return SizeModel::make(n, m, n_b, chunk_width, l_b, params_bits);
  };

  SelectionResult result;
  result.best_model = score(1, 0);
  result.best_size = compressed_size(result.best_model);
  result.initial_size = result.best_size;
  std::size_t best_len = 0;

  std::vector<BitPos> next(matrix.cols());
  for (std::size_t c = 0; c < matrix.cols(); ++c) next[c] = matrix.first_position(c);

  unsigned plateau = 0;
  for (;;) {
    std::size_t best_column = matrix.cols();
    std::uint64_t candidate_size = 0;
    std::size_t candidate_nb = 0;
    for (std::size_t c = 0; c < matrix.cols(); ++c) {
      if (next[c] >= matrix.first_position(c) + matrix.params(c).bit_width) continue;
      const std::size_t n_b = tree.leaf_count_with(next[c]);
      const std::uint64_t size = compressed_size(score(n_b, tree.selected_bits().size() + 1));
      if (best_column == matrix.cols() || size < candidate_size) {
        best_column = c;
        candidate_size = size;
        candidate_nb = n_b;
      }
    }
    if (best_column == matrix.cols()) break;

    const BitPos p = next[best_column]++;
    tree.add_bit(p);
    SelectionStep step{p, 0.0, candidate_nb, candidate_size, candidate_size < result.best_size};
    result.trace.push_back(step);
    if (step.improved) {
      result.best_size = candidate_size;
      result.best_model = score(candidate_nb, tree.selected_bits().size());
      best_len = tree.selected_bits().size();
      plateau = 0;
    } else {
      ++plateau;
    }
    if (plateau >= tau) break;
  }

  while (tree.selected_bits().size() > best_len) tree.remove_last_bit();
  result.best.positions = tree.selected_bits();
  result.best.chunk_width = chunk_width;
  return result;
}

}  // namespace entrogd
