#include <doctest.h>

#include <cmath>
#include <sstream>

#include "kiwi/evalsuite.hpp"
#include "kiwi/miner.hpp"
#include "kiwi/rng.hpp"
#include "kiwi/synthgen.hpp"
#include "test_support.hpp"

using namespace kiwi;
using namespace kiwi::eval;

namespace {

Cluster make_cluster(std::size_t id, std::vector<RowIndex> rows, Pattern pattern,
                     std::vector<RowIndex> backward = {}) {
  Cluster c;
  c.id = id;
  c.pattern = std::move(pattern);
  for (const auto r : rows) {
    const bool back = std::find(backward.begin(), backward.end(), r) != backward.end();
    c.supporters.push_back({r, back ? Orientation::backward : Orientation::forward, 0});
  }
  c.anti_correlated = has_mixed_orientation(c.supporters);
  return c;
}

std::vector<std::string> ids(const std::string& prefix, std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i + 1));
  return out;
}

Pattern first_cols(std::size_t n) {
  Pattern p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = static_cast<ColumnIndex>(i);
  return p;
}

}  // namespace

TEST_CASE("similarity examples") {
  using Sets = std::vector<std::set<std::string>>;
  CHECK(similarity_score(Sets{{"Sp1", "AP-2", "TBP"}, {"Sp1", "AP-2", "TBP"}}) == 3.0);
  // two promoters sharing exactly two motifs, each also carrying its own
  CHECK(similarity_score(Sets{{"M1", "M2", "M3"}, {"M1", "M2", "M4", "M5"}}) == 2.0);
  // pairwise intersections 2, 0, 1
  CHECK(similarity_score(Sets{{"a", "b", "c"}, {"a", "b"}, {"c", "d"}}) == 1.0);
  CHECK(std::isnan(similarity_score(Sets{{"a"}})));
  CHECK(similarity_score(Sets{{"a"}, {"b"}, {"c"}}) == 0.0);
  CHECK(similarity_score(Sets{{"x", "y"}, {"x", "y"}, {"x", "y"}, {"x", "y"}}) == 2.0);
}

TEST_CASE("similarity ignores duplicated labels") {
  Rng rng(31);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng.below(6);
    std::vector<std::vector<std::uint32_t>> sets(n), duplicated(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::set<std::uint32_t> s;
      const std::size_t k = rng.below(8);
      for (std::size_t j = 0; j < k; ++j) s.insert(static_cast<std::uint32_t>(rng.below(10)));
      sets[i].assign(s.begin(), s.end());
    }
    // the same labels as raw gene/label lines with repeats, collapsed through the loader
    std::string lines;
    for (std::size_t i = 0; i < n; ++i) {
      for (const auto l : sets[i]) {
        const std::size_t copies = 1 + rng.below(3);
        for (std::size_t c = 0; c < copies; ++c) lines += "g" + std::to_string(i) + "\tL" + std::to_string(l) + "\n";
      }
    }
    lines += "g_anchor\tL0\n";
    std::istringstream in(lines);
    const auto map = parse_label_sets(in);
    std::vector<std::set<std::string>> named(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (auto it = map.find("g" + std::to_string(i)); it != map.end()) named[i] = it->second;
    }
    CHECK(similarity_score(named) == similarity_score(sets));
  }
}

TEST_CASE("promoter similarity against random clusters") {
  // genes 1..10 share a motif set, 11..40 carry unrelated labels
  const auto rows = ids("g", 40);
  IdSetMap labels;
  for (std::size_t i = 0; i < 10; ++i) labels[rows[i]] = {"Sp1", "AP-2", "TBP"};
  for (std::size_t i = 10; i < 35; ++i) labels[rows[i]] = {"L" + std::to_string(i)};
  const std::vector<Cluster> clusters{make_cluster(1, {0, 1, 2, 3}, {0, 1, 2}),
                                      make_cluster(2, {4, 5, 6, 7, 8, 9}, {3, 4}),
                                      make_cluster(3, {12}, {0, 1})};
  const auto rep = promoter_similarity(clusters, rows, 8, labels, 200, 5);
  CHECK(rep.scores[0] == 3.0);
  CHECK(rep.scores[1] == 3.0);
  CHECK(!rep.scores[2]);
  CHECK(rep.skipped == std::vector<std::size_t>{3});
  CHECK(rep.mean_score == 3.0);
  CHECK(rep.random_scores.size() == 400);
  CHECK(rep.random_mean < 1.0);
  CHECK(rep.rank_sum.p < 0.05);
  CHECK(rep.p_mean == doctest::Approx(1.0 / 201));
  CHECK(rep.by_size.at(4).mean() == 3.0);
  CHECK(rep.by_length.at(2).clusters == 1);
  const auto again = promoter_similarity(clusters, rows, 8, labels, 200, 5);
  CHECK(again.random_scores == rep.random_scores);
  std::ostringstream out;
  write_similarity_report(out, rep);
  CHECK(out.str().rfind("# replicates\t200\n# seed\t5\n# rng\t", 0) == 0);
}

TEST_CASE("redundant probe pair counts") {
  const IdMap map{{"p1", "GENE_A"}, {"p2", "GENE_A"}, {"p3", "GENE_B"}, {"p4", "GENE_A"}};
  CHECK(redundant_pairs(std::vector<std::string>{"p1", "p2", "p3"}, map) == 1);
  CHECK(redundant_pairs(std::vector<std::string>{"p1", "p2", "p4"}, map) == 3);
  CHECK(redundant_pairs(std::vector<std::string>{"p1", "p3", "unmapped"}, map) == 0);
}

TEST_CASE("redundant probe analysis") {
  const auto rows = ids("p", 30);
  IdMap distinct;
  for (const auto& r : rows) distinct[r] = "G_" + r;
  const std::vector<Cluster> clusters{make_cluster(1, {0, 1, 2}, {0, 1}), make_cluster(2, {3, 4}, {2, 3})};
  const auto none = redundant_probe_analysis(clusters, rows, 6, distinct, 100, 1);
  CHECK(none.mean_pairs == 0.0);
  CHECK(none.p_mean == 1.0);
  CHECK(none.p_fraction == 1.0);

  IdMap shared = distinct;
  shared["p1"] = shared["p2"] = shared["p3"] = "GENE_A";
  shared.erase("p30");
  const auto rep = redundant_probe_analysis(clusters, rows, 6, shared, 500, 1);
  CHECK(rep.pairs == std::vector<std::size_t>{3, 0});
  CHECK(rep.mean_pairs == 1.5);
  CHECK(rep.fraction_with_pair == 0.5);
  CHECK(rep.uncovered_rows == 1);
  CHECK(rep.p_mean < 0.05);
  CHECK(rep.by_size.at(3).second == 3.0);
  CHECK(rep.null_mean_pairs.size() == 500);
}

TEST_CASE("enrichment: a cluster covering exactly the term's experiments hits the minimum p") {
  const auto cols = ids("e", 100);
  IdSetMap ann;
  for (std::size_t c = 0; c < 100; ++c) {
    ann[cols[c]] = {c < 50 ? "tissue:lung" : "tissue:liver", "platform:X"};
  }
  EnrichmentOptions opt;
  opt.seed = 4;
  const std::vector<Cluster> clusters{make_cluster(1, {0, 1}, first_cols(50))};
  const auto rep = annotation_enrichment(clusters, cols, 10, ann, opt);
  CHECK(rep.eligible == 1);
  CHECK(rep.uniform_terms == std::vector<std::string>{"platform:X"});
  REQUIRE(rep.results.size() == 1);
  CHECK(rep.results[0].term == "tissue:lung");
  CHECK(rep.results[0].a == 50);
  CHECK(rep.results[0].d == 50);
  CHECK(rep.results[0].raw_p == doctest::Approx(9.911653021418339e-30).epsilon(1e-9));
  CHECK(rep.results[0].adjusted_p == doctest::Approx(2 * 9.911653021418339e-30).epsilon(1e-9));
  CHECK(rep.curve.fraction.back() == 1.0);
  CHECK(rep.random_min_adjusted.size() == 1);
}

TEST_CASE("enrichment: background-matched cluster has nothing below 0.5") {
  const auto cols = ids("e", 100);
  IdSetMap ann;
  for (std::size_t c = 0; c < 100; ++c) ann[cols[c]] = {"tissue:t" + std::to_string(c % 4)};
  // 48 columns, 12 per term, the same quarter share as the whole matrix
  const std::vector<Cluster> clusters{make_cluster(1, {0, 1}, first_cols(48))};
  EnrichmentOptions opt;
  opt.min_exps = 48;
  const auto rep = annotation_enrichment(clusters, cols, 10, ann, opt);
  REQUIRE(rep.results.size() == 4);
  for (const auto& r : rep.results) CHECK(r.raw_p >= 0.5);
}

TEST_CASE("enrichment: eligibility, category filter and BH scope") {
  const auto cols = ids("e", 60);
  IdSetMap ann;
  for (std::size_t c = 0; c < 60; ++c) {
    ann[cols[c]] = {c < 20 ? "tissue:brain" : "tissue:other", c % 2 ? "sex:m" : "sex:f"};
  }
  EnrichmentOptions opt;
  opt.min_exps = 20;
  const std::vector<Cluster> clusters{make_cluster(1, {0, 1}, first_cols(20)),
                                      make_cluster(2, {2, 3, 4}, first_cols(19)),
                                      make_cluster(3, {0, 5}, {40, 41, 42, 43, 44, 45, 46, 47, 48, 49, 50, 51,
                                                               52, 53, 54, 55, 56, 57, 58, 59})};
  auto rep = annotation_enrichment(clusters, cols, 10, ann, opt);
  CHECK(rep.eligible == 2);
  CHECK(rep.terms.size() == 4);
  for (const auto& r : rep.results) {
    CHECK(r.adjusted_p >= r.raw_p);
    CHECK(r.a + r.b + r.c + r.d == 60);
  }
  opt.category = "tissue";
  rep = annotation_enrichment(clusters, cols, 10, ann, opt);
  CHECK(rep.terms == std::vector<std::string>{"tissue:brain", "tissue:other"});
  for (const auto& r : rep.results) CHECK(r.term.rfind("tissue:", 0) == 0);

  opt.category.reset();
  const auto per_cluster = annotation_enrichment(clusters, cols, 10, ann, opt);
  opt.bh_scope = BhScope::global;
  const auto global = annotation_enrichment(clusters, cols, 10, ann, opt);
  REQUIRE(per_cluster.results.size() == global.results.size());
  for (std::size_t i = 0; i < global.results.size(); ++i) {
    CHECK(global.results[i].raw_p == per_cluster.results[i].raw_p);
    CHECK(global.results[i].adjusted_p >= per_cluster.results[i].adjusted_p);
  }
}

TEST_CASE("enrichment: a term on every experiment changes nothing else") {
  Rng rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    const auto cols = ids("e", 40);
    IdSetMap ann;
    for (const auto& c : cols) {
      ann[c] = {"tissue:t" + std::to_string(rng.below(5)), "batch:b" + std::to_string(rng.below(3))};
    }
    std::vector<Cluster> clusters;
    for (std::size_t k = 0; k < 5; ++k) {
      std::vector<std::size_t> pick(40);
      for (std::size_t i = 0; i < 40; ++i) pick[i] = i;
      for (std::size_t i = 40; i > 1; --i) std::swap(pick[i - 1], pick[rng.below(i)]);
      Pattern p(pick.begin(), pick.begin() + static_cast<long>(10 + rng.below(20)));
      clusters.push_back(make_cluster(k + 1, {0, 1}, p));
    }
    EnrichmentOptions opt;
    opt.min_exps = 10;
    opt.seed = 3;
    const auto before = annotation_enrichment(clusters, cols, 5, ann, opt);
    for (auto& [col, terms] : ann) terms.insert("platform:all");
    const auto after = annotation_enrichment(clusters, cols, 5, ann, opt);
    CHECK(after.min_adjusted == before.min_adjusted);
    CHECK(after.random_min_adjusted == before.random_min_adjusted);
    CHECK(after.uniform_terms == std::vector<std::string>{"platform:all"});
    std::ostringstream out;
    write_enrichment_report(out, after);
    CHECK(out.str().find("platform:all") != std::string::npos);
  }
}

TEST_CASE("negative controls") {
  const auto rows = ids("g", 20);
  const IdSet negatives{"g4", "g17", "g18", "missing1"};
  const std::vector<Cluster> clusters{make_cluster(1, {0, 1, 2, 3}, {0, 1}),
                                      make_cluster(2, {4, 5, 6, 7}, {0, 1}),
                                      make_cluster(3, {16, 17}, {2, 3, 4})};
  const auto rep = negative_control_analysis(clusters, rows, 5, negatives, 300, 2);
  CHECK(rep.fractions == std::vector<double>{0.25, 0.0, 1.0});
  CHECK(rep.mean_fraction == doctest::Approx(1.25 / 3));
  CHECK(rep.unmatched == std::vector<std::string>{"missing1"});
  CHECK(rep.by_shape.at({4, 2}).clusters == 2);
  CHECK(rep.by_shape.at({4, 2}).mean() == 0.125);
  CHECK(rep.null_means.size() == 300);
  CHECK(rep.p > 0.0);

  const auto empty = negative_control_analysis(clusters, rows, 5, IdSet{}, 100, 2);
  CHECK(empty.mean_fraction == 0.0);
  CHECK(empty.p == 1.0);
}

TEST_CASE("negative breakdown reproduces the overall mean") {
  Rng rng(44);
  const auto rows = ids("g", 50);
  for (int trial = 0; trial < 100; ++trial) {
    IdSet negatives;
    for (const auto& r : rows) {
      if (rng.below(4) == 0) negatives.insert(r);
    }
    std::vector<Cluster> clusters;
    for (std::size_t k = 0; k < 1 + rng.below(15); ++k) {
      std::vector<RowIndex> members;
      for (RowIndex r = 0; r < 50; ++r) {
        if (rng.below(8) == 0) members.push_back(r);
      }
      if (members.empty()) members.push_back(0);
      clusters.push_back(make_cluster(k + 1, members, first_cols(2 + rng.below(3))));
    }
    const auto rep = negative_control_analysis(clusters, rows, 5, negatives, 0, 0);
    double weighted = 0.0;
    std::size_t total = 0;
    for (const auto& [shape, cell] : rep.by_shape) {
      weighted += cell.mean() * static_cast<double>(cell.clusters);
      total += cell.clusters;
    }
    CHECK(total == clusters.size());
    CHECK(weighted / static_cast<double>(total) == doctest::Approx(rep.mean_fraction).epsilon(1e-12));
  }
}

TEST_CASE("summary and density table") {
  const auto matrix = random_matrix(6, 5, 2);
  const std::vector<Cluster> one{make_cluster(1, {0, 1}, {0, 1, 2, 3, 4})};
  const auto s = summarize(one, matrix);
  CHECK(s.n_clusters == 1);
  CHECK(s.density == std::map<Shape, std::size_t>{{{2, 5}, 1}});
  CHECK(s.genes.mean == 2.0);
  CHECK(s.exps.mean == 5.0);
  std::ostringstream csv;
  write_density_csv(csv, s);
  CHECK(csv.str() == "n_genes,n_exps,count\n2,5,1\n");
}

TEST_CASE("planted ramps correlate perfectly, with backward rows negated") {
  const Plant plant{{0, 1, 2, 3}, {4, 0, 2, 5}, {3}};
  const auto matrix = plant_opsm(random_matrix(8, 7, 6), plant);
  const std::vector<Cluster> clusters{make_cluster(1, {0, 1, 2, 3}, {4, 0, 2, 5}, {3})};
  const auto s = summarize(clusters, matrix);
  REQUIRE(s.mean_pearson[0]);
  CHECK(*s.mean_pearson[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(s.anti_correlated == 1);
  CHECK(s.fraction_pearson_above_095 == 1.0);
}

TEST_CASE("density counts sum to the cluster count") {
  const SequenceDatabase db(random_matrix(60, 10, 8));
  MiningParams p;
  p.k = 100;
  p.w = 4;
  const auto clusters = mine(db, p).clusters;
  const auto s = summarize(clusters, random_matrix(60, 10, 8));
  std::size_t total = 0;
  for (const auto& [shape, n] : s.density) total += n;
  CHECK(total == s.n_clusters);
  CHECK(s.n_clusters == clusters.size());
}
