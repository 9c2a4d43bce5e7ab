#include "kiwi/sequencer.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace kiwi {

SequenceDatabase::SequenceDatabase(const ExpressionMatrix& matrix)
    : cols_(matrix.cols()),
      seq_(matrix.rows() * matrix.cols()),
      pos_(matrix.rows() * matrix.cols()),
      tie_counts_(matrix.rows(), 0) {
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    const auto values = matrix.row(r);
    auto* order = seq_.data() + r * cols_;
    std::iota(order, order + cols_, ColumnIndex{0});
    // stable_sort keeps equal values in ascending column order
    std::stable_sort(order, order + cols_,
                     [&](ColumnIndex a, ColumnIndex b) { return values[a] < values[b]; });
    auto* inverse = pos_.data() + r * cols_;
    for (std::size_t p = 0; p < cols_; ++p) {
      inverse[order[p]] = static_cast<Position>(p);
      if (p > 0 && values[order[p - 1]] == values[order[p]]) ++tie_counts_[r];
    }
  }
}

SequenceDatabase SequenceDatabase::from_sequences(
    std::size_t columns, const std::vector<std::vector<ColumnIndex>>& sequences) {
  SequenceDatabase db;
  db.cols_ = columns;
  db.seq_.reserve(sequences.size() * columns);
  db.pos_.assign(sequences.size() * columns, 0);
  db.tie_counts_.assign(sequences.size(), 0);
  for (std::size_t r = 0; r < sequences.size(); ++r) {
    const auto& s = sequences[r];
    if (s.size() != columns) throw std::invalid_argument("sequence length differs from column count");
    std::vector<bool> seen(columns, false);
    for (std::size_t p = 0; p < columns; ++p) {
      if (s[p] >= columns || seen[s[p]]) throw std::invalid_argument("sequence is not a permutation");
      seen[s[p]] = true;
      db.pos_[r * columns + s[p]] = static_cast<Position>(p);
    }
    db.seq_.insert(db.seq_.end(), s.begin(), s.end());
  }
  return db;
}

std::uint64_t SequenceDatabase::total_ties() const {
  return std::accumulate(tie_counts_.begin(), tie_counts_.end(), std::uint64_t{0});
}

std::size_t SequenceDatabase::rows_with_ties() const {
  return static_cast<std::size_t>(
      std::count_if(tie_counts_.begin(), tie_counts_.end(), [](auto t) { return t > 0; }));
}

}  // namespace kiwi
