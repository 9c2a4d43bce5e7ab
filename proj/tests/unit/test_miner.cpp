#include <doctest.h>

#include <map>
#include <sstream>

#include "kiwi/miner.hpp"
#include "kiwi/oracle.hpp"
#include "kiwi/rng.hpp"
#include "kiwi/synthgen.hpp"
#include "test_support.hpp"

using namespace kiwi;
using namespace kiwi::testing;

namespace {

// g1=(A,B,C,D), g2=(B,A,D,C), g3=(D,C,B,A)
SequenceDatabase three_rows() { return db_from_labels(4, {"ABCD", "BADC", "DCBA"}); }

MiningParams params(std::size_t k, std::size_t w, std::size_t min_rows, std::size_t min_cols,
                    Direction d) {
  MiningParams p;
  p.k = k;
  p.w = w;
  p.min_rows = min_rows;
  p.min_cols = min_cols;
  p.direction = d;
  return p;
}

const Cluster* find(const std::vector<Cluster>& clusters, const Pattern& p) {
  for (const auto& c : clusters) {
    if (c.pattern == p) return &c;
  }
  return nullptr;
}

std::vector<std::pair<RowIndex, char>> signs(const Cluster& c) { return key_of(c).second; }

// All supported patterns of length l by brute force, as pattern -> signed rows.
std::map<Pattern, std::vector<std::pair<RowIndex, char>>> brute_level(const SequenceDatabase& db,
                                                                      std::size_t l, std::size_t w,
                                                                      std::size_t min_rows, bool both) {
  std::map<Pattern, std::vector<std::pair<RowIndex, char>>> out;
  Pattern t;
  std::vector<bool> used(db.cols(), false);
  auto rec = [&](auto&& self) -> void {
    if (t.size() == l) {
      Pattern rev(t.rbegin(), t.rend());
      if (both && rev < t) return;
      std::vector<std::pair<RowIndex, char>> rows;
      for (RowIndex r = 0; r < db.rows(); ++r) {
        if (scan_supports(db, r, t, w, Orientation::forward)) rows.emplace_back(r, '+');
        else if (both && scan_supports(db, r, t, w, Orientation::backward)) rows.emplace_back(r, '-');
      }
      if (rows.size() >= min_rows) out[t] = rows;
      return;
    }
    for (ColumnIndex c = 0; c < db.cols(); ++c) {
      if (used[c]) continue;
      used[c] = true;
      t.push_back(c);
      self(self);
      t.pop_back();
      used[c] = false;
    }
  };
  rec(rec);
  return out;
}

std::map<Pattern, std::vector<std::pair<RowIndex, char>>> as_map(const std::vector<BeamEntry>& level) {
  std::map<Pattern, std::vector<std::pair<RowIndex, char>>> out;
  for (const auto& e : level) {
    std::vector<std::pair<RowIndex, char>> rows;
    for (const auto& s : e.supporters) rows.emplace_back(s.row, sign(s.orientation));
    out[e.pattern] = rows;
  }
  return out;
}

}  // namespace

TEST_CASE("support_check positions and gaps") {
  const auto db = db_from_labels(4, {"BACD", "DCAB"});
  CHECK(support_check(letters("BC"), 0, db, 2, Orientation::forward) == Position{2});
  CHECK(!support_check(letters("BC"), 0, db, 1, Orientation::forward));
  CHECK(support_check(letters("BA"), 1, db, 4, Orientation::backward) == Position{2});
  CHECK(!support_check(letters("BA"), 1, db, 4, Orientation::forward));
  // single element is always supported, in either orientation
  CHECK(support_check(letters("D"), 0, db, 1, Orientation::forward) == Position{3});
}

TEST_CASE("canonical form") {
  CHECK(canonical(letters("CAB")) == letters("BAC"));
  CHECK(canonical(letters("ACB")) == letters("ACB"));
  CHECK(is_canonical(letters("A")));
  CHECK(!is_canonical(letters("DA")));
}

TEST_CASE("window scan votes only within w positions of the frontier") {
  const auto db = db_from_labels(4, {"ABCD"});
  BeamEntry parent{letters("A"), {{0, Orientation::forward, 0}}};
  const auto next = extend_level(std::span(&parent, 1), db, params(10, 2, 1, 2, Direction::forward));
  REQUIRE(next.size() == 2);
  CHECK(next[0].pattern == letters("AB"));
  CHECK(next[1].pattern == letters("AC"));
  CHECK(next[1].supporters.front().frontier == 2);
}

TEST_CASE("full-length patterns have no extensions") {
  const auto db = three_rows();
  BeamEntry full{letters("ABCD"), {{0, Orientation::forward, 3}}};
  CHECK(extend_level(std::span(&full, 1), db, params(10, 4, 1, 2, Direction::both)).empty());
}

TEST_CASE("three-row example: no length-3 forward candidate reaches two rows") {
  const auto db = three_rows();
  const auto p = params(100, 4, 2, 2, Direction::forward);
  const auto level2 = extend_level(seed_level(db), db, p);
  CHECK(as_map(level2) == brute_level(db, 2, 4, 2, false));
  CHECK(extend_level(level2, db, p).empty());
}

TEST_CASE("three-row example under both directions: length-3 GOPSMs with g1+ and g3-") {
  const auto db = three_rows();
  const auto p = params(100, 4, 2, 2, Direction::both);
  const auto level2 = extend_level(seed_level(db), db, p);
  CHECK(level2.size() == 6);
  const auto level3 = extend_level(level2, db, p);
  const auto expected = brute_level(db, 3, 4, 2, true);
  CHECK(as_map(level3) == expected);
  CHECK(expected.size() == 4);  // ABC, ABD, ACD, BCD
}

TEST_CASE("extend_level matches brute force on random databases") {
  Rng rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 3 + rng.below(8), m = 3 + rng.below(4);
    const auto db = SequenceDatabase(random_matrix(n, m, rng.next()));
    const std::size_t w = 1 + rng.below(m);
    const bool both = rng.below(2) == 1;
    const auto p = params(1'000'000, w, 2, 2, both ? Direction::both : Direction::forward);
    auto level = seed_level(db);
    for (std::size_t l = 2; l <= m; ++l) {
      level = extend_level(level, db, p);
      CHECK(as_map(level) == brute_level(db, l, w, 2, both));
      if (level.empty()) break;
    }
  }
}

TEST_CASE("rank_topk orders by support then pattern") {
  std::vector<BeamEntry> c;
  auto entry = [](Pattern p, std::size_t support) {
    BeamEntry e{std::move(p), {}};
    for (RowIndex r = 0; r < support; ++r) e.supporters.push_back({r, Orientation::forward, 0});
    return e;
  };
  c.push_back(entry(letters("BC"), 5));
  c.push_back(entry(letters("AD"), 2));
  c.push_back(entry(letters("AC"), 5));
  auto top = rank_topk(c, 2);
  REQUIRE(top.size() == 2);
  CHECK(top[0].pattern == letters("AC"));
  CHECK(top[1].pattern == letters("BC"));
  CHECK(rank_topk(c, 10).size() == 3);
  const auto one = rank_topk({entry(letters("AC"), 3), entry(letters("AB"), 3)}, 1);
  CHECK(one.front().pattern == letters("AB"));
}

TEST_CASE("redundancy filter examples") {
  auto cluster = [](Pattern p, std::vector<RowIndex> rows) {
    Cluster c;
    c.pattern = std::move(p);
    for (auto r : rows) c.supporters.push_back({r, Orientation::forward, 0});
    return c;
  };
  auto out = redundancy_filter({cluster(letters("AC"), {0, 1}), cluster(letters("ABC"), {0, 1})},
                               Direction::forward);
  REQUIRE(out.size() == 1);
  CHECK(out[0].pattern == letters("ABC"));

  out = redundancy_filter({cluster(letters("AC"), {0, 1, 2}), cluster(letters("ABC"), {0, 1})},
                          Direction::forward);
  CHECK(out.size() == 2);

  CHECK(redundancy_filter({cluster(letters("AC"), {0, 1})}, Direction::both).size() == 1);

  // reverse containment only counts for direction=both
  const std::vector<Cluster> rev{cluster(letters("CA"), {0, 1}), cluster(letters("ABC"), {0, 1})};
  CHECK(redundancy_filter(rev, Direction::forward).size() == 2);
  CHECK(redundancy_filter(rev, Direction::both).size() == 1);
}

TEST_CASE("redundancy filter agrees with the quadratic definition") {
  Rng rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Cluster> clusters;
    const std::size_t count = 1 + rng.below(12);
    for (std::size_t i = 0; i < count; ++i) {
      Cluster c;
      std::vector<ColumnIndex> cols{0, 1, 2, 3, 4};
      for (std::size_t j = cols.size(); j > 1; --j) std::swap(cols[j - 1], cols[rng.below(j)]);
      cols.resize(2 + rng.below(4));
      c.pattern = cols;
      for (RowIndex r = 0; r < 6; ++r) {
        if (rng.below(2)) c.supporters.push_back({r, rng.below(2) ? Orientation::forward : Orientation::backward, 0});
      }
      if (c.supporters.empty()) c.supporters.push_back({0, Orientation::forward, 0});
      clusters.push_back(c);
    }
    for (const bool both : {false, true}) {
      const auto filtered = redundancy_filter(clusters, both ? Direction::both : Direction::forward);
      CHECK(keys_of(filtered) == naive_closed(clusters, both));
    }
  }
}

TEST_CASE("mine: three-row example") {
  const auto db = three_rows();
  const auto both = mine(db, params(100, 4, 2, 2, Direction::both)).clusters;
  const auto* ac = find(both, letters("AC"));
  REQUIRE(ac != nullptr);
  CHECK(signs(*ac) == std::vector<std::pair<RowIndex, char>>{{0, '+'}, {1, '+'}, {2, '-'}});
  CHECK(ac->anti_correlated);

  const auto fwd = mine(db, params(100, 4, 2, 2, Direction::forward)).clusters;
  const auto* ac_fwd = find(fwd, letters("AC"));
  REQUIRE(ac_fwd != nullptr);
  CHECK(signs(*ac_fwd) == std::vector<std::pair<RowIndex, char>>{{0, '+'}, {1, '+'}});
  CHECK(!ac_fwd->anti_correlated);
}

TEST_CASE("mine: min_rows above n gives nothing") {
  const auto db = three_rows();
  const auto result = mine(db, params(100, 4, 4, 2, Direction::both));
  CHECK(result.clusters.empty());
  CHECK(result.report.clusters == 0);
}

TEST_CASE("parameter bounds") {
  const auto db = three_rows();
  auto msg = [&](MiningParams p) {
    try {
      mine(db, p);
    } catch (const ParameterError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(msg(params(100, 0, 2, 2, Direction::both)).find("w must be in [1, m]") == 0);
  CHECK(msg(params(100, 5, 2, 2, Direction::both)).find("w must be in [1, m]") == 0);
  CHECK(msg(params(0, 2, 2, 2, Direction::both)).find("k must be") == 0);
  CHECK(msg(params(1, 2, 1, 2, Direction::both)).find("min-genes") == 0);
  CHECK(msg(params(1, 2, 2, 5, Direction::both)).find("min-exps") == 0);
  CHECK_THROWS_AS(parse_direction("sideways"), ParameterError);
}

TEST_CASE("saturated search equals the oracle") {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    const SequenceDatabase db(random_matrix(7, 5, seed));
    for (const auto d : {Direction::forward, Direction::both}) {
      for (const std::size_t w : {2u, 5u}) {
        const auto p = params(1'000'000, w, 2, 2, d);
        CHECK(keys_of(mine(db, p).clusters) == keys_of(exact_mine(db, p)));
      }
    }
  }
}

TEST_CASE("output is independent of thread count and spill cap") {
  const SequenceDatabase db(random_matrix(300, 12, 7));
  auto p = params(200, 6, 2, 3, Direction::both);
  const auto single = mine(db, p).clusters;
  p.threads = 4;
  CHECK(mine(db, p).clusters == single);
  p.threads = 3;
  p.spill_cap = 5;
  const auto spilled = mine(db, p);
  CHECK(spilled.clusters == single);
  CHECK(spilled.report.spilled > 0);
}

TEST_CASE("every emitted supporter re-verifies by independent scan") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const SequenceDatabase db(random_matrix(80, 10, seed));
    const auto clusters = mine(db, params(300, 4, 2, 3, Direction::both)).clusters;
    for (const auto& c : clusters) {
      CHECK(c.support() >= 2);
      CHECK(c.pattern.size() >= 3);
      CHECK(is_canonical(c.pattern));
      CHECK(c.anti_correlated == has_mixed_orientation(c.supporters));
      for (const auto& s : c.supporters) {
        CHECK(scan_supports(db, s.row, c.pattern, 4, s.orientation));
        CHECK(s.frontier == db.position(s.row, c.pattern.back()));
      }
    }
  }
}

TEST_CASE("report records levels and counts") {
  const SequenceDatabase db(random_matrix(50, 8, 3));
  const auto result = mine(db, params(50, 3, 2, 2, Direction::both));
  const auto& r = result.report;
  REQUIRE(!r.levels.empty());
  CHECK(r.levels.front().length == 1);
  CHECK(r.levels.front().beam_size == 8);
  for (std::size_t i = 1; i < r.levels.size(); ++i) CHECK(r.levels[i].beam_size <= 50);
  CHECK(r.emitted == r.pruned_as_prefix + r.removed_redundant + r.clusters);
  std::ostringstream out;
  write_report(out, r);
  CHECK(out.str().find("k=50 w=3 min_genes=2 min_exps=2 direction=both") != std::string::npos);
}
