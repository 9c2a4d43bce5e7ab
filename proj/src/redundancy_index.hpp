#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "kiwi/miner.hpp"

namespace kiwi::detail {

/// Kept clusters indexed by row, queried for subsumption by shorter clusters.
///
/// Callers insert clusters in non-increasing pattern length and must query a
/// whole length class before inserting any of it, since subsumption requires a
/// strictly longer pattern. Subsumption is transitive, so checking only against
/// kept clusters gives the same result as checking against everything seen.
class RedundancyIndex {
public:
  RedundancyIndex(std::size_t rows, Direction direction)
      : by_row_(rows), direction_(direction) {}

  [[nodiscard]] bool subsumed(const Cluster& cluster) const;
  void insert(Cluster cluster);

  std::vector<Cluster> take() && { return std::move(kept_); }

private:
  std::vector<std::vector<std::size_t>> by_row_;
  std::vector<Cluster> kept_;
  Direction direction_;
};

bool is_subsequence(std::span<const ColumnIndex> needle, std::span<const ColumnIndex> haystack,
                    bool reversed_haystack);

}  // namespace kiwi::detail
