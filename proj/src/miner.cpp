#include "kiwi/miner.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <limits>
#include <memory>
#include <ostream>
#include <thread>
#include <unordered_set>

#include "redundancy_index.hpp"

namespace kiwi {

std::string to_string(Direction d) { return d == Direction::forward ? "forward" : "both"; }

Direction parse_direction(std::string_view text) {
  if (text == "forward") return Direction::forward;
  if (text == "both") return Direction::both;
  throw ParameterError("direction must be 'forward' or 'both', got '" + std::string(text) + "'");
}

void MiningParams::validate(std::size_t columns) const {
  const std::string m = " (m = " + std::to_string(columns) + ")";
  if (k < 1) throw ParameterError("k must be at least 1");
  if (w < 1 || w > columns) throw ParameterError("w must be in [1, m]" + m);
  if (min_rows < 2) throw ParameterError("min-genes must be at least 2");
  if (min_cols < 2 || min_cols > columns) throw ParameterError("min-exps must be in [2, m]" + m);
  if (threads < 1) throw ParameterError("threads must be at least 1");
  if (spill_cap < 1) throw ParameterError("spill-cap must be at least 1");
}

bool has_mixed_orientation(std::span<const OrientedSupport> supporters) {
  bool fwd = false;
  bool bwd = false;
  for (const auto& s : supporters) {
    (s.orientation == Orientation::forward ? fwd : bwd) = true;
  }
  return fwd && bwd;
}

std::optional<Position> support_check(std::span<const ColumnIndex> pattern, std::size_t row,
                                      const SequenceDatabase& db, std::size_t w,
                                      Orientation orientation) {
  if (pattern.empty()) return std::nullopt;
  Position prev = db.position(row, pattern[0]);
  for (std::size_t i = 1; i < pattern.size(); ++i) {
    const Position cur = db.position(row, pattern[i]);
    const bool ordered = orientation == Orientation::forward ? cur > prev : cur < prev;
    const std::size_t gap = cur > prev ? cur - prev : prev - cur;
    if (!ordered || gap > w) return std::nullopt;
    prev = cur;
  }
  return prev;
}

Pattern canonical(std::span<const ColumnIndex> pattern) {
  Pattern out(pattern.begin(), pattern.end());
  if (!is_canonical(pattern)) std::reverse(out.begin(), out.end());
  return out;
}

bool is_canonical(std::span<const ColumnIndex> pattern) {
  return !std::lexicographical_compare(pattern.rbegin(), pattern.rend(), pattern.begin(),
                                       pattern.end());
}

std::vector<BeamEntry> seed_level(const SequenceDatabase& db) {
  std::vector<BeamEntry> seeds(db.cols());
  for (ColumnIndex c = 0; c < db.cols(); ++c) {
    seeds[c].pattern = {c};
    seeds[c].supporters.reserve(db.rows());
    for (RowIndex r = 0; r < db.rows(); ++r) {
      seeds[c].supporters.push_back({r, Orientation::forward, db.position(r, c)});
    }
  }
  return seeds;
}

namespace {

enum class Side : std::uint8_t { end, front };

// An extension of one beam pattern that reached min_rows.
struct Offer {
  std::size_t support = 0;
  Pattern pattern;  // canonical
  std::uint32_t parent = 0;
  Side side = Side::end;
  bool reversed = false;  // pattern is the reverse of the raw extension
  ColumnIndex column = 0;
};

bool better(const Offer& a, const Offer& b) {
  if (a.support != b.support) return a.support > b.support;
  if (a.pattern != b.pattern) return a.pattern < b.pattern;
  return a.parent < b.parent;
}

struct PatternHash {
  std::size_t operator()(const Pattern& p) const noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const ColumnIndex c : p) h = (h ^ c) * 0x100000001b3ULL;
    return static_cast<std::size_t>(h ^ (h >> 29));
  }
};

// Bounded best-k selection with duplicate suppression by pattern.
class TopK {
public:
  explicit TopK(std::size_t k) : k_(k) {}

  [[nodiscard]] bool admits(std::size_t support) const {
    return heap_.size() < k_ || support >= heap_.front().support;
  }

  void offer(Offer&& o) {
    if (members_.contains(o.pattern)) return;
    if (heap_.size() == k_) {
      if (!better(o, heap_.front())) return;
      std::pop_heap(heap_.begin(), heap_.end(), better);
      members_.erase(heap_.back().pattern);
      heap_.pop_back();
    }
    members_.insert(o.pattern);
    heap_.push_back(std::move(o));
    std::push_heap(heap_.begin(), heap_.end(), better);
  }

  std::vector<Offer> take() && { return std::move(heap_); }

private:
  std::size_t k_;
  std::vector<Offer> heap_;  // worst offer at the front
  std::unordered_set<Pattern, PatternHash> members_;
};

struct VoteBuffers {
  explicit VoteBuffers(std::size_t m) : end(m, 0), front(m, 0) {}
  std::vector<std::uint32_t> end, front;
  std::vector<ColumnIndex> touched_end, touched_front;
};

class Expander {
public:
  Expander(const SequenceDatabase& db, const MiningParams& params)
      : db_(db), params_(params), m_(db.cols()), w_(params.w) {}

  // Window scan of one parent; offers every extension reaching min_rows.
  template <typename Sink>
  void expand(std::uint32_t parent_index, const BeamEntry& parent, VoteBuffers& buf,
              LevelReport& report, Sink&& sink) const {
    const bool both = params_.direction == Direction::both;
    // For a single column the two window sides denote the same GOPSM.
    const bool merge_sides = both && parent.pattern.size() == 1;
    const ColumnIndex head = parent.pattern.front();

    auto vote = [&](std::vector<std::uint32_t>& counts, std::vector<ColumnIndex>& touched,
                    std::size_t row, std::size_t lo, std::size_t hi) {
      for (std::size_t p = lo; p < hi; ++p) {
        const ColumnIndex x = db_.at(row, static_cast<Position>(p));
        if (counts[x]++ == 0) touched.push_back(x);
      }
      report.votes += hi - lo;
    };
    auto after = [&](std::size_t p) { return std::pair{p + 1, std::min(p + 1 + w_, m_)}; };
    auto before = [&](std::size_t p) { return std::pair{p > w_ ? p - w_ : std::size_t{0}, p}; };

    for (const auto& s : parent.supporters) {
      const std::size_t f = s.frontier;
      const bool fwd = s.orientation == Orientation::forward;
      const auto [elo, ehi] = fwd ? after(f) : before(f);
      vote(buf.end, buf.touched_end, s.row, elo, ehi);
      if (!both) continue;
      if (merge_sides) {
        const auto [lo, hi] = before(f);
        vote(buf.end, buf.touched_end, s.row, lo, hi);
        continue;
      }
      const std::size_t h = db_.position(s.row, head);
      const auto [flo, fhi] = fwd ? before(h) : after(h);
      vote(buf.front, buf.touched_front, s.row, flo, fhi);
    }

    auto emit = [&](std::vector<std::uint32_t>& counts, std::vector<ColumnIndex>& touched,
                    Side side) {
      for (const ColumnIndex x : touched) {
        const std::size_t support = counts[x];
        counts[x] = 0;
        if (support < params_.min_rows) continue;
        ++report.offers;
        if (!sink.admits(support)) continue;
        Offer o;
        o.support = support;
        o.parent = parent_index;
        o.side = side;
        o.column = x;
        o.pattern.reserve(parent.pattern.size() + 1);
        if (side == Side::front) o.pattern.push_back(x);
        o.pattern.insert(o.pattern.end(), parent.pattern.begin(), parent.pattern.end());
        if (side == Side::end) o.pattern.push_back(x);
        if (both && !is_canonical(o.pattern)) {
          std::reverse(o.pattern.begin(), o.pattern.end());
          o.reversed = true;
        }
        sink.offer(std::move(o));
      }
      touched.clear();
    };
    emit(buf.end, buf.touched_end, Side::end);
    emit(buf.front, buf.touched_front, Side::front);
  }

  // Rebuilds the exact supporter list of an offer from its parent.
  BeamEntry materialize(const Offer& o, const BeamEntry& parent) const {
    const bool merge_sides = params_.direction == Direction::both && parent.pattern.size() == 1;
    const ColumnIndex head = parent.pattern.front();
    BeamEntry child;
    child.pattern = o.pattern;
    child.supporters.reserve(o.support);
    const ColumnIndex last = child.pattern.back();
    for (const auto& s : parent.supporters) {
      const long px = db_.position(s.row, o.column);
      const long anchor = o.side == Side::end ? static_cast<long>(s.frontier)
                                              : static_cast<long>(db_.position(s.row, head));
      const long d = px - anchor;
      const long w = static_cast<long>(w_);
      std::optional<Orientation> orient;
      if (merge_sides) {
        if (d > 0 && d <= w) orient = Orientation::forward;
        else if (d < 0 && -d <= w) orient = Orientation::backward;
      } else {
        // Moving away from the matched elements: later for a forward end, earlier
        // for a forward front, mirrored for backward supporters.
        const bool fwd = s.orientation == Orientation::forward;
        const bool later = (o.side == Side::end) == fwd;
        if (later ? (d > 0 && d <= w) : (d < 0 && -d <= w)) orient = s.orientation;
      }
      if (!orient) continue;
      const Orientation final_orient = o.reversed ? flipped(*orient) : *orient;
      child.supporters.push_back({s.row, final_orient, db_.position(s.row, last)});
    }
    return child;
  }

private:
  const SequenceDatabase& db_;
  const MiningParams& params_;
  std::size_t m_;
  std::size_t w_;
};

template <typename Fn>
void parallel_chunks(std::size_t items, unsigned threads, Fn&& fn) {
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(threads, items));
  if (workers == 1) {
    fn(std::size_t{0}, std::size_t{0}, items);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t t = 0; t < workers; ++t) {
    const std::size_t lo = items * t / workers;
    const std::size_t hi = items * (t + 1) / workers;
    pool.emplace_back([&fn, t, lo, hi] { fn(t, lo, hi); });
  }
}

// Best k extensions of the beam, ordered by (support desc, pattern asc). The
// result does not depend on how parents are split across workers: each worker's
// local best-k contains every global best-k member it generated.
std::vector<Offer> select_next(std::span<const BeamEntry> beam, const Expander& expander,
                               const MiningParams& params, std::size_t k, std::size_t m,
                               LevelReport& report) {
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(params.threads, beam.size()));
  std::vector<std::vector<Offer>> partial(workers);
  std::vector<LevelReport> counters(workers);
  parallel_chunks(beam.size(), params.threads, [&](std::size_t t, std::size_t lo, std::size_t hi) {
    TopK top(k);
    VoteBuffers buf(m);
    for (std::size_t i = lo; i < hi; ++i) {
      expander.expand(static_cast<std::uint32_t>(i), beam[i], buf, counters[t], top);
    }
    partial[t] = std::move(top).take();
  });

  std::vector<Offer> merged;
  for (auto& p : partial) std::move(p.begin(), p.end(), std::back_inserter(merged));
  for (const auto& c : counters) {
    report.votes += c.votes;
    report.offers += c.offers;
  }
  std::sort(merged.begin(), merged.end(), better);
  merged.erase(std::unique(merged.begin(), merged.end(),
                           [](const Offer& a, const Offer& b) { return a.pattern == b.pattern; }),
               merged.end());
  if (merged.size() > k) merged.resize(k);
  return merged;
}

std::vector<BeamEntry> materialize_all(std::span<const Offer> offers,
                                       std::span<const BeamEntry> beam, const Expander& expander,
                                       unsigned threads) {
  std::vector<BeamEntry> next(offers.size());
  parallel_chunks(offers.size(), threads, [&](std::size_t, std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) next[i] = expander.materialize(offers[i], beam[offers[i].parent]);
  });
  return next;
}

// Accumulated emission set, grouped by pattern length. Levels beyond the
// in-memory cap are written to an anonymous temporary file.
class ClusterStore {
public:
  explicit ClusterStore(std::size_t cap) : cap_(cap) {}

  void add_level(std::vector<Cluster> level) {
    if (level.empty()) return;
    Bucket b;
    b.count = level.size();
    if (in_memory_ + level.size() > cap_) {
      spill(level, b);
      spilled_ += level.size();
    } else {
      in_memory_ += level.size();
      b.clusters = std::move(level);
    }
    buckets_.push_back(std::move(b));
  }

  [[nodiscard]] std::size_t spilled() const { return spilled_; }

  template <typename Fn>
  void drain_longest_first(Fn&& fn) {
    for (auto it = buckets_.rbegin(); it != buckets_.rend(); ++it) {
      if (it->on_disk) it->clusters = reload(*it);
      fn(std::move(it->clusters));
      it->clusters = {};
    }
  }

private:
  struct Bucket {
    std::vector<Cluster> clusters;
    bool on_disk = false;
    long offset = 0;
    std::size_t count = 0;
  };
  struct FileCloser {
    void operator()(std::FILE* f) const { std::fclose(f); }
  };

  template <typename T>
  void put(const T& v) {
    if (std::fwrite(&v, sizeof v, 1, file_.get()) != 1) throw std::runtime_error("spill write failed");
  }
  template <typename T>
  T get() {
    T v{};
    if (std::fread(&v, sizeof v, 1, file_.get()) != 1) throw std::runtime_error("spill read failed");
    return v;
  }

  void spill(const std::vector<Cluster>& level, Bucket& b) {
    if (!file_) {
      file_.reset(std::tmpfile());
      if (!file_) throw std::runtime_error("cannot create spill file");
    }
    std::fseek(file_.get(), 0, SEEK_END);
    b.on_disk = true;
    b.offset = std::ftell(file_.get());
    for (const auto& c : level) {
      put(static_cast<std::uint32_t>(c.pattern.size()));
      for (const auto col : c.pattern) put(col);
      put(static_cast<std::uint32_t>(c.supporters.size()));
      for (const auto& s : c.supporters) {
        put(s.row);
        put(s.orientation);
        put(s.frontier);
      }
    }
  }

  std::vector<Cluster> reload(const Bucket& b) {
    std::fseek(file_.get(), b.offset, SEEK_SET);
    std::vector<Cluster> level(b.count);
    for (auto& c : level) {
      c.pattern.resize(get<std::uint32_t>());
      for (auto& col : c.pattern) col = get<ColumnIndex>();
      c.supporters.resize(get<std::uint32_t>());
      for (auto& s : c.supporters) {
        s.row = get<RowIndex>();
        s.orientation = get<Orientation>();
        s.frontier = get<Position>();
      }
    }
    return level;
  }

  std::size_t cap_;
  std::size_t in_memory_ = 0;
  std::size_t spilled_ = 0;
  std::vector<Bucket> buckets_;
  std::unique_ptr<std::FILE, FileCloser> file_;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

std::vector<BeamEntry> extend_level(std::span<const BeamEntry> beam, const SequenceDatabase& db,
                                    const MiningParams& params) {
  if (beam.empty()) return {};
  const std::size_t length = beam.front().pattern.size();
  for (const auto& b : beam) {
    if (b.pattern.size() != length) throw std::invalid_argument("beam patterns differ in length");
  }
  if (length >= db.cols()) return {};
  Expander expander(db, params);
  TopK all(std::numeric_limits<std::size_t>::max());
  VoteBuffers buf(db.cols());
  LevelReport unused;
  for (std::size_t i = 0; i < beam.size(); ++i) {
    expander.expand(static_cast<std::uint32_t>(i), beam[i], buf, unused, all);
  }
  auto offers = std::move(all).take();
  std::sort(offers.begin(), offers.end(),
            [](const Offer& a, const Offer& b) { return a.pattern < b.pattern; });
  std::vector<BeamEntry> out;
  out.reserve(offers.size());
  for (const auto& o : offers) out.push_back(expander.materialize(o, beam[o.parent]));
  return out;
}

std::vector<BeamEntry> rank_topk(std::vector<BeamEntry> candidates, std::size_t k) {
  std::sort(candidates.begin(), candidates.end(), [](const BeamEntry& a, const BeamEntry& b) {
    if (a.support() != b.support()) return a.support() > b.support();
    return a.pattern < b.pattern;
  });
  if (candidates.size() > k) candidates.resize(k);
  return candidates;
}

void finalize_clusters(std::vector<Cluster>& clusters) {
  for (auto& c : clusters) {
    std::sort(c.supporters.begin(), c.supporters.end(),
              [](const auto& a, const auto& b) { return a.row < b.row; });
    c.anti_correlated = has_mixed_orientation(c.supporters);
  }
  std::sort(clusters.begin(), clusters.end(), [](const Cluster& a, const Cluster& b) {
    if (a.pattern.size() != b.pattern.size()) return a.pattern.size() > b.pattern.size();
    if (a.support() != b.support()) return a.support() > b.support();
    return a.pattern < b.pattern;
  });
  for (std::size_t i = 0; i < clusters.size(); ++i) clusters[i].id = i + 1;
}

MiningResult mine(const SequenceDatabase& db, const MiningParams& params) {
  params.validate(db.cols());
  if (db.rows() == 0) throw ParameterError("sequence database is empty");
  const auto start = std::chrono::steady_clock::now();

  MiningResult result;
  MiningReport& report = result.report;
  report.params = params;
  report.rows = db.rows();
  report.cols = db.cols();
  report.total_ties = db.total_ties();
  report.rows_with_ties = db.rows_with_ties();

  const Expander expander(db, params);
  ClusterStore store(params.spill_cap);
  std::vector<BeamEntry> beam = seed_level(db);
  std::size_t length = 1;
  while (!beam.empty()) {
    const auto level_start = std::chrono::steady_clock::now();
    LevelReport level;
    level.length = length;
    level.beam_size = beam.size();

    std::vector<BeamEntry> next;
    std::vector<char> same_rows_as_child(beam.size(), 0);
    if (length < db.cols()) {
      const auto offers = select_next(beam, expander, params, params.k, db.cols(), level);
      next = materialize_all(offers, beam, expander, params.threads);
      // A child's rows are a subset of its parent's; equal counts mean the parent
      // is subsumed by the (emitted) child.
      for (std::size_t i = 0; i < next.size(); ++i) {
        if (next[i].support() == beam[offers[i].parent].support()) {
          same_rows_as_child[offers[i].parent] = 1;
        }
      }
    }

    if (length >= params.min_cols) {
      std::vector<Cluster> emitted;
      for (std::size_t i = 0; i < beam.size(); ++i) {
        if (same_rows_as_child[i]) {
          ++report.pruned_as_prefix;
          continue;
        }
        Cluster c;
        c.pattern = std::move(beam[i].pattern);
        c.supporters = std::move(beam[i].supporters);
        emitted.push_back(std::move(c));
      }
      level.emitted = emitted.size();
      report.emitted += beam.size();
      store.add_level(std::move(emitted));
    }
    level.seconds = seconds_since(level_start);
    report.levels.push_back(level);
    beam = std::move(next);
    ++length;
  }
  report.spilled = store.spilled();

  detail::RedundancyIndex index(db.rows(), params.direction);
  std::size_t survivors_in = 0;
  store.drain_longest_first([&](std::vector<Cluster>&& level) {
    survivors_in += level.size();
    std::vector<char> keep(level.size());
    for (std::size_t i = 0; i < level.size(); ++i) keep[i] = !index.subsumed(level[i]);
    for (std::size_t i = 0; i < level.size(); ++i) {
      if (keep[i]) index.insert(std::move(level[i]));
    }
  });
  result.clusters = std::move(index).take();
  report.removed_redundant = survivors_in - result.clusters.size();
  finalize_clusters(result.clusters);
  report.clusters = result.clusters.size();
  report.seconds = seconds_since(start);
  return result;
}

void write_report(std::ostream& out, const MiningReport& r) {
  const auto& p = r.params;
  out << "matrix\t" << r.rows << " rows x " << r.cols << " columns\n"
      << "params\tk=" << p.k << " w=" << p.w << " min_genes=" << p.min_rows
      << " min_exps=" << p.min_cols << " direction=" << to_string(p.direction)
      << " threads=" << p.threads << " spill_cap=" << p.spill_cap << '\n'
      << "ties\t" << r.total_ties << " tie-broken pairs in " << r.rows_with_ties << " rows\n"
      << "level\tbeam\tvotes\toffers\temitted\tseconds\n";
  for (const auto& l : r.levels) {
    out << l.length << '\t' << l.beam_size << '\t' << l.votes << '\t' << l.offers << '\t'
        << l.emitted << '\t' << l.seconds << '\n';
  }
  out << "emitted\t" << r.emitted << '\n'
      << "pruned_same_rows_as_child\t" << r.pruned_as_prefix << '\n'
      << "spilled\t" << r.spilled << '\n'
      << "removed_redundant\t" << r.removed_redundant << '\n'
      << "clusters\t" << r.clusters << '\n'
      << "wall_seconds\t" << r.seconds << '\n';
}

}  // namespace kiwi
