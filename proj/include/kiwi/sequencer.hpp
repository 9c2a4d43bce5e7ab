#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "kiwi/matrix_io.hpp"

namespace kiwi {

using ColumnIndex = std::uint32_t;
using RowIndex = std::uint32_t;
using Position = std::uint32_t;

/// Each row of the expression matrix as the permutation of column indices
/// that sorts it ascending, together with the inverse (position) index.
///
/// Equal values are ordered by ascending column index.
class SequenceDatabase {
public:
  SequenceDatabase() = default;
  explicit SequenceDatabase(const ExpressionMatrix& matrix);

  /// Builds from per-row column orders given directly (each a permutation of 0..m-1).
  static SequenceDatabase from_sequences(std::size_t columns,
                                         const std::vector<std::vector<ColumnIndex>>& sequences);

  [[nodiscard]] std::size_t rows() const { return tie_counts_.size(); }
  [[nodiscard]] std::size_t cols() const { return cols_; }

  /// Columns of `row` in ascending value order.
  [[nodiscard]] std::span<const ColumnIndex> seq(std::size_t row) const {
    return {seq_.data() + row * cols_, cols_};
  }
  /// pos(row)[c] is the position of column c in seq(row).
  [[nodiscard]] std::span<const Position> pos(std::size_t row) const {
    return {pos_.data() + row * cols_, cols_};
  }
  [[nodiscard]] ColumnIndex at(std::size_t row, Position p) const { return seq_[row * cols_ + p]; }
  [[nodiscard]] Position position(std::size_t row, ColumnIndex c) const {
    return pos_[row * cols_ + c];
  }

  /// Number of adjacent equal-value pairs ordered by the column-index tie-break.
  [[nodiscard]] std::uint32_t tie_count(std::size_t row) const { return tie_counts_[row]; }
  [[nodiscard]] std::uint64_t total_ties() const;
  [[nodiscard]] std::size_t rows_with_ties() const;

  friend bool operator==(const SequenceDatabase&, const SequenceDatabase&) = default;

private:
  std::size_t cols_ = 0;
  std::vector<ColumnIndex> seq_;
  std::vector<Position> pos_;
  std::vector<std::uint32_t> tie_counts_;
};

inline SequenceDatabase to_sequence_db(const ExpressionMatrix& matrix) {
  return SequenceDatabase(matrix);
}

}  // namespace kiwi
