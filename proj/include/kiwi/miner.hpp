#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "kiwi/sequencer.hpp"

namespace kiwi {

enum class Orientation : std::uint8_t { forward, backward };
enum class Direction : std::uint8_t { forward, both };

inline Orientation flipped(Orientation o) {
  return o == Orientation::forward ? Orientation::backward : Orientation::forward;
}
inline char sign(Orientation o) { return o == Orientation::forward ? '+' : '-'; }

std::string to_string(Direction d);
Direction parse_direction(std::string_view text);

class ParameterError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

struct MiningParams {
  std::size_t k = 1000;           // patterns kept per level
  std::size_t w = 10;             // maximum position gap between consecutive pattern elements
  std::size_t min_rows = 2;
  std::size_t min_cols = 2;
  Direction direction = Direction::both;
  unsigned threads = 1;
  std::size_t spill_cap = 10'000'000;  // accumulated clusters held in memory before spilling

  /// Throws ParameterError naming the first violated bound.
  void validate(std::size_t columns) const;
};

/// Ordered list of distinct column indices.
using Pattern = std::vector<ColumnIndex>;

struct OrientedSupport {
  RowIndex row = 0;
  Orientation orientation = Orientation::forward;
  Position frontier = 0;  // position of the pattern's last element in the row's sequence

  friend bool operator==(const OrientedSupport&, const OrientedSupport&) = default;
};

struct Cluster {
  std::size_t id = 0;
  Pattern pattern;
  std::vector<OrientedSupport> supporters;  // ascending by row
  bool anti_correlated = false;

  [[nodiscard]] std::size_t support() const { return supporters.size(); }
  friend bool operator==(const Cluster&, const Cluster&) = default;
};

/// True when the cluster has supporters in both orientations.
bool has_mixed_orientation(std::span<const OrientedSupport> supporters);

/// Row-level match of `pattern` in one orientation. Each column appears once in a
/// sequence, so the match is unique: positions must be strictly monotone (increasing
/// for forward, decreasing for backward) with every consecutive gap at most w. The
/// first element is unconstrained. Returns the position of the last element.
std::optional<Position> support_check(std::span<const ColumnIndex> pattern, std::size_t row,
                                      const SequenceDatabase& db, std::size_t w,
                                      Orientation orientation);

/// Lexicographically smaller of the pattern and its reverse.
Pattern canonical(std::span<const ColumnIndex> pattern);
bool is_canonical(std::span<const ColumnIndex> pattern);

struct BeamEntry {
  Pattern pattern;
  std::vector<OrientedSupport> supporters;  // ascending by row

  [[nodiscard]] std::size_t support() const { return supporters.size(); }
  friend bool operator==(const BeamEntry&, const BeamEntry&) = default;
};

/// All single-column patterns, every row supporting in forward orientation.
std::vector<BeamEntry> seed_level(const SequenceDatabase& db);

/// Window-scan extension of a beam whose patterns share one length. Every supporter
/// votes for the columns within w positions past its frontier (and, for
/// direction=both, before its first element). Candidates are deduplicated by
/// canonical pattern, those below min_rows are dropped, and the rest are returned
/// in canonical-pattern order with their exact supporter lists.
std::vector<BeamEntry> extend_level(std::span<const BeamEntry> beam, const SequenceDatabase& db,
                                    const MiningParams& params);

/// Best k candidates by support (descending), ties by pattern (ascending).
std::vector<BeamEntry> rank_topk(std::vector<BeamEntry> candidates, std::size_t k);

/// Removes every cluster whose pattern is a subsequence of a strictly longer
/// cluster's pattern (or its reverse, for direction=both) while its row set is a
/// subset of that cluster's rows. Output keeps the input order.
std::vector<Cluster> redundancy_filter(std::vector<Cluster> clusters, Direction direction);

/// Sorts by (pattern length desc, support desc, pattern asc), sets the
/// anti-correlation flag and numbers ids from 1.
void finalize_clusters(std::vector<Cluster>& clusters);

struct LevelReport {
  std::size_t length = 0;       // pattern length of the beam
  std::size_t beam_size = 0;
  std::uint64_t votes = 0;      // window positions scanned to build the next level
  std::uint64_t offers = 0;     // extensions reaching min_rows, before deduplication
  std::size_t emitted = 0;
  double seconds = 0.0;
};

struct MiningReport {
  MiningParams params;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<LevelReport> levels;
  std::size_t emitted = 0;             // beam patterns with length >= min_cols
  std::size_t pruned_as_prefix = 0;    // dropped early: a child kept the same rows
  std::size_t removed_redundant = 0;   // dropped by the final redundancy filter
  std::size_t spilled = 0;
  std::size_t clusters = 0;
  std::uint64_t total_ties = 0;
  std::size_t rows_with_ties = 0;
  double seconds = 0.0;
};

struct MiningResult {
  std::vector<Cluster> clusters;
  MiningReport report;
};

/// Level-wise top-k search for OPSM (direction=forward) or GOPSM (direction=both)
/// clusters under the window constraint w. Output is redundancy-filtered,
/// finalized, and independent of params.threads.
MiningResult mine(const SequenceDatabase& db, const MiningParams& params);

void write_report(std::ostream& out, const MiningReport& report);

}  // namespace kiwi
