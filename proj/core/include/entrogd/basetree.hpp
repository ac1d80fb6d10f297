#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "entrogd/bitio.hpp"
#include "entrogd/bitmatrix.hpp"

namespace entrogd {

/// One group of rows sharing identical values on every selected bit.
struct Leaf {
  /// Values of the selected bits, in ascending bit-position order.
  BitString base;
  /// Member rows, ascending.
  std::vector<std::uint32_t> rows;
};

/// Partition of a matrix's rows by their values on an incrementally growing
/// set of base bit positions. Each add_bit costs O(n); remove_last_bit undoes
/// the most recent add_bit in O(n) using a log of the splits it made.
///
/// The tree keeps a pointer to the matrix, which must outlive it.
class BaseTree {
 public:
  explicit BaseTree(const QuantizedMatrix& matrix);

  /// Splits every leaf by the value of `pos`; returns the new leaf count.
  std::size_t add_bit(BitPos pos);
  void remove_last_bit();

  std::size_t leaf_count() const { return leaf_begin_.size() - 1; }
  /// Leaf count that add_bit(pos) would produce, without modifying the tree.
  std::size_t leaf_count_with(BitPos pos) const;

  const std::vector<BitPos>& selected_bits() const { return selected_; }
  bool is_selected(BitPos pos) const { return selected_flag_[pos] != 0; }
  const QuantizedMatrix& matrix() const { return *matrix_; }

  /// Leaves ordered lexicographically by base value.
  std::vector<Leaf> leaves() const;

 private:
  bool bit(std::uint32_t row, BitPos pos) const { return matrix_->bit(row, pos); }

  const QuantizedMatrix* matrix_;
  std::vector<std::uint32_t> order_;       // rows grouped by leaf, ascending inside a leaf
  std::vector<std::uint32_t> leaf_begin_;  // leaf i is order_[leaf_begin_[i], leaf_begin_[i + 1])
  std::vector<BitPos> selected_;
  std::vector<std::uint8_t> selected_flag_;
  std::vector<std::vector<std::uint32_t>> undo_;  // per add_bit: indices of leaves it created
  std::vector<std::uint32_t> scratch_;
};

}  // namespace entrogd
