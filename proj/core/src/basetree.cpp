#include "entrogd/basetree.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "entrogd/error.hpp"

namespace entrogd {

BaseTree::BaseTree(const QuantizedMatrix& matrix)
    : matrix_(&matrix), order_(matrix.rows()), selected_flag_(matrix.chunk_width(), 0) {
  if (matrix.rows() == 0) throw InvalidArgument("BaseTree: matrix has no rows");
  std::iota(order_.begin(), order_.end(), 0u);
  leaf_begin_ = {0u, static_cast<std::uint32_t>(order_.size())};
  scratch_.resize(order_.size());
}

std::size_t BaseTree::add_bit(BitPos pos) {
  if (pos >= matrix_->chunk_width())
    throw InvalidArgument("add_bit: position " + std::to_string(pos) + " out of range");
  if (selected_flag_[pos]) throw InvalidArgument("add_bit: position " + std::to_string(pos) + " already selected");

  const auto values = matrix_->column(matrix_->column_of(pos));
  const unsigned shift = matrix_->shift_of(pos);
  auto bit_of = [&](std::uint32_t row) { return (values[row] >> shift) & 1u; };

  std::vector<std::uint32_t> next_begin;
  next_begin.reserve(leaf_begin_.size() + 1);
  std::vector<std::uint32_t> created;

  for (std::size_t leaf = 0; leaf + 1 < leaf_begin_.size(); ++leaf) {
    const std::uint32_t b = leaf_begin_[leaf];
    const std::uint32_t e = leaf_begin_[leaf + 1];
    next_begin.push_back(b);
    if (e - b < 2) continue;

    const auto first = bit_of(order_[b]);
    std::uint32_t split = b + 1;
    while (split < e && bit_of(order_[split]) == first) ++split;
    if (split == e) continue;

    // Stable partition of [b, e): zeros stay in place, ones go through scratch.
    // Rows before `split` all carry `first`, so only a ones-prefix moves. Both
    // destinations are written unconditionally; the bit decides which advances.
    std::uint32_t* ones = scratch_.data();
    std::uint32_t n_ones = 0;
    std::uint32_t out = b;
    std::uint32_t i = b;
    if (first) {
      n_ones = split - b;
      std::copy(order_.begin() + b, order_.begin() + split, ones);
    } else {
      out = split;
    }
    for (i = split; i < e; ++i) {
      const std::uint32_t row = order_[i];
      const auto one = static_cast<std::uint32_t>(bit_of(row));
      ones[n_ones] = row;
      order_[out] = row;
      n_ones += one;
      out += 1 - one;
    }
    std::copy(ones, ones + n_ones, order_.begin() + out);
    created.push_back(static_cast<std::uint32_t>(next_begin.size()));
    next_begin.push_back(out);
  }
  next_begin.push_back(static_cast<std::uint32_t>(order_.size()));

  leaf_begin_ = std::move(next_begin);
  undo_.push_back(std::move(created));
  selected_.push_back(pos);
  selected_flag_[pos] = 1;
  return leaf_count();
}

void BaseTree::remove_last_bit() {
  if (selected_.empty()) throw InvalidArgument("remove_last_bit: no selected bits");
  const std::vector<std::uint32_t>& created = undo_.back();

  std::vector<std::uint32_t> prev_begin;
  prev_begin.reserve(leaf_begin_.size() - created.size());
  std::size_t next_created = 0;
  for (std::size_t leaf = 0; leaf + 1 < leaf_begin_.size(); ++leaf) {
    if (next_created < created.size() && created[next_created] == leaf) {
      // Rejoin with the preceding leaf; both halves are ascending.
      ++next_created;
      const auto lo = order_.begin() + leaf_begin_[leaf - 1];
      const auto mid = order_.begin() + leaf_begin_[leaf];
      const auto hi = order_.begin() + leaf_begin_[leaf + 1];
      const auto left = std::copy(lo, mid, scratch_.begin());
      std::merge(scratch_.begin(), left, mid, hi, lo);
      continue;
    }
    prev_begin.push_back(leaf_begin_[leaf]);
  }
  prev_begin.push_back(static_cast<std::uint32_t>(order_.size()));

  leaf_begin_ = std::move(prev_begin);
  undo_.pop_back();
  selected_flag_[selected_.back()] = 0;
  selected_.pop_back();
}

std::size_t BaseTree::leaf_count_with(BitPos pos) const {
  if (pos >= matrix_->chunk_width())
    throw InvalidArgument("leaf_count_with: position " + std::to_string(pos) + " out of range");
  if (selected_flag_[pos]) return leaf_count();

  const auto values = matrix_->column(matrix_->column_of(pos));
  const unsigned shift = matrix_->shift_of(pos);
  std::size_t count = 0;
  for (std::size_t leaf = 0; leaf + 1 < leaf_begin_.size(); ++leaf) {
    const std::uint32_t b = leaf_begin_[leaf];
    const std::uint32_t e = leaf_begin_[leaf + 1];
    const auto first = (values[order_[b]] >> shift) & 1u;
    bool split = false;
    for (std::uint32_t i = b + 1; i < e && !split; ++i) split = ((values[order_[i]] >> shift) & 1u) != first;
    count += split ? 2 : 1;
  }
  return count;
}

std::vector<Leaf> BaseTree::leaves() const {
  std::vector<BitPos> positions = selected_;
  std::sort(positions.begin(), positions.end());

  std::vector<Leaf> out(leaf_count());
  for (std::size_t leaf = 0; leaf < out.size(); ++leaf) {
    const std::uint32_t b = leaf_begin_[leaf];
    const std::uint32_t e = leaf_begin_[leaf + 1];
    out[leaf].rows.assign(order_.begin() + b, order_.begin() + e);
    for (BitPos p : positions) out[leaf].base.push_back(bit(order_[b], p));
  }
  std::sort(out.begin(), out.end(), [](const Leaf& a, const Leaf& b) { return a.base < b.base; });
  return out;
}

}  // namespace entrogd
