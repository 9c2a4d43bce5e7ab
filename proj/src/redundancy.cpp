#include <algorithm>
#include <map>

#include "redundancy_index.hpp"

namespace kiwi {
namespace detail {

bool is_subsequence(std::span<const ColumnIndex> needle, std::span<const ColumnIndex> haystack,
                    bool reversed_haystack) {
  std::size_t matched = 0;
  const std::size_t n = haystack.size();
  for (std::size_t i = 0; i < n && matched < needle.size(); ++i) {
    const ColumnIndex c = reversed_haystack ? haystack[n - 1 - i] : haystack[i];
    if (c == needle[matched]) ++matched;
  }
  return matched == needle.size();
}

namespace {

bool rows_included(std::span<const OrientedSupport> inner, std::span<const OrientedSupport> outer) {
  std::size_t j = 0;
  for (const auto& s : inner) {
    while (j < outer.size() && outer[j].row < s.row) ++j;
    if (j == outer.size() || outer[j].row != s.row) return false;
    ++j;
  }
  return true;
}

}  // namespace

bool RedundancyIndex::subsumed(const Cluster& cluster) const {
  if (kept_.empty() || cluster.supporters.empty()) return false;
  // Any subsumer contains every row, so scanning the sparsest row's list suffices.
  const auto* shortest = &by_row_[cluster.supporters.front().row];
  for (const auto& s : cluster.supporters) {
    const auto& list = by_row_[s.row];
    if (list.size() < shortest->size()) shortest = &list;
  }
  for (const std::size_t id : *shortest) {
    const Cluster& other = kept_[id];
    if (other.pattern.size() <= cluster.pattern.size()) continue;
    if (other.support() < cluster.support()) continue;
    if (!rows_included(cluster.supporters, other.supporters)) continue;
    if (is_subsequence(cluster.pattern, other.pattern, false)) return true;
    if (direction_ == Direction::both && is_subsequence(cluster.pattern, other.pattern, true)) {
      return true;
    }
  }
  return false;
}

void RedundancyIndex::insert(Cluster cluster) {
  const std::size_t id = kept_.size();
  for (const auto& s : cluster.supporters) by_row_[s.row].push_back(id);
  kept_.push_back(std::move(cluster));
}

}  // namespace detail

std::vector<Cluster> redundancy_filter(std::vector<Cluster> clusters, Direction direction) {
  if (clusters.size() < 2) return clusters;
  std::size_t rows = 0;
  std::map<std::size_t, std::vector<std::size_t>, std::greater<>> by_length;
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    by_length[clusters[i].pattern.size()].push_back(i);
    for (const auto& s : clusters[i].supporters) rows = std::max<std::size_t>(rows, s.row + 1);
  }
  for (auto& c : clusters) {
    std::sort(c.supporters.begin(), c.supporters.end(),
              [](const auto& a, const auto& b) { return a.row < b.row; });
  }

  detail::RedundancyIndex index(rows, direction);
  std::vector<char> keep(clusters.size(), 0);
  for (const auto& [length, ids] : by_length) {
    for (const std::size_t i : ids) keep[i] = !index.subsumed(clusters[i]);
    for (const std::size_t i : ids) {
      if (keep[i]) index.insert(clusters[i]);
    }
  }
  std::vector<Cluster> out;
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    if (keep[i]) out.push_back(std::move(clusters[i]));
  }
  return out;
}

}  // namespace kiwi
