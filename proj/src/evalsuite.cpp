#include "kiwi/evalsuite.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <unordered_map>

namespace kiwi::eval {

std::vector<stats::ClusterShape> shapes_of(std::span<const Cluster> clusters) {
  std::vector<stats::ClusterShape> shapes;
  shapes.reserve(clusters.size());
  for (const auto& c : clusters) shapes.push_back({c.support(), c.pattern.size()});
  return shapes;
}

namespace {

double mean_of(std::span<const double> v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

Range range_of(const std::vector<std::size_t>& v) {
  Range r;
  if (v.empty()) return r;
  r.min = *std::min_element(v.begin(), v.end());
  r.max = *std::max_element(v.begin(), v.end());
  r.mean = static_cast<double>(std::accumulate(v.begin(), v.end(), std::size_t{0})) /
           static_cast<double>(v.size());
  return r;
}

void write_seed_header(std::ostream& out, std::size_t replicates, std::uint64_t seed) {
  out << "# replicates\t" << replicates << "\n# seed\t" << seed << "\n# rng\t" << Rng::algorithm
      << '\n';
}

}  // namespace

// ---- summary ---------------------------------------------------------------

ClusterSummary summarize(std::span<const Cluster> clusters, const ExpressionMatrix& matrix) {
  ClusterSummary s;
  s.n_clusters = clusters.size();
  std::vector<std::size_t> genes, exps;
  std::size_t defined = 0, above = 0;
  for (const auto& c : clusters) {
    genes.push_back(c.support());
    exps.push_back(c.pattern.size());
    ++s.density[{c.support(), c.pattern.size()}];
    if (has_mixed_orientation(c.supporters)) ++s.anti_correlated;

    std::vector<std::vector<double>> profiles;
    for (const auto& sup : c.supporters) {
      std::vector<double> v;
      v.reserve(c.pattern.size());
      const double sgn = sup.orientation == Orientation::backward ? -1.0 : 1.0;
      for (const auto col : c.pattern) v.push_back(sgn * matrix.at(sup.row, col));
      profiles.push_back(std::move(v));
    }
    double sum = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < profiles.size(); ++i) {
      for (std::size_t j = i + 1; j < profiles.size(); ++j) {
        if (auto r = stats::pearson(profiles[i], profiles[j])) {
          sum += *r;
          ++pairs;
        }
      }
    }
    if (pairs) {
      const double r = sum / static_cast<double>(pairs);
      s.mean_pearson.emplace_back(r);
      ++defined;
      if (r > 0.95) ++above;
    } else {
      s.mean_pearson.emplace_back(std::nullopt);
    }
  }
  s.genes = range_of(genes);
  s.exps = range_of(exps);
  s.fraction_pearson_above_095 = defined ? static_cast<double>(above) / static_cast<double>(defined) : 0.0;
  return s;
}

void write_density_csv(std::ostream& out, const ClusterSummary& summary) {
  out << "n_genes,n_exps,count\n";
  for (const auto& [shape, count] : summary.density) {
    out << shape.first << ',' << shape.second << ',' << count << '\n';
  }
}

void write_summary(std::ostream& out, const ClusterSummary& s) {
  out << "clusters\t" << s.n_clusters << '\n'
      << "genes_per_cluster\t" << s.genes.mean << " (" << s.genes.min << " to " << s.genes.max << ")\n"
      << "exps_per_cluster\t" << s.exps.mean << " (" << s.exps.min << " to " << s.exps.max << ")\n"
      << "anti_correlated\t" << s.anti_correlated << '\n'
      << "fraction_mean_pearson_above_0.95\t" << s.fraction_pearson_above_095 << '\n';
}

// ---- redundant probes ------------------------------------------------------

std::size_t redundant_pairs(std::span<const std::string> members, const IdMap& probe_map) {
  std::unordered_map<std::string_view, std::size_t> per_gene;
  for (const auto& m : members) {
    if (auto it = probe_map.find(m); it != probe_map.end()) ++per_gene[it->second];
  }
  std::size_t pairs = 0;
  for (const auto& [gene, k] : per_gene) pairs += k * (k - 1) / 2;
  return pairs;
}

ProbeReport redundant_probe_analysis(std::span<const Cluster> clusters,
                                     std::span<const std::string> row_ids, std::size_t n_cols,
                                     const IdMap& probe_map, std::size_t replicates,
                                     std::uint64_t seed) {
  ProbeReport rep;
  rep.replicates = replicates;
  rep.seed = seed;

  // Gene index per universe row; uncovered rows never pair.
  std::unordered_map<std::string_view, std::uint32_t> gene_index;
  std::vector<std::int64_t> gene_of(row_ids.size(), -1);
  for (std::size_t r = 0; r < row_ids.size(); ++r) {
    auto it = probe_map.find(row_ids[r]);
    if (it == probe_map.end()) {
      ++rep.uncovered_rows;
      continue;
    }
    gene_of[r] = gene_index.emplace(it->second, static_cast<std::uint32_t>(gene_index.size())).first->second;
  }
  auto pairs_for = [&](auto&& rows) {
    std::vector<std::int64_t> genes;
    for (const std::size_t r : rows) {
      if (gene_of[r] >= 0) genes.push_back(gene_of[r]);
    }
    std::sort(genes.begin(), genes.end());
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < genes.size();) {
      std::size_t j = i;
      while (j < genes.size() && genes[j] == genes[i]) ++j;
      pairs += (j - i) * (j - i - 1) / 2;
      i = j;
    }
    return pairs;
  };

  std::map<std::size_t, std::pair<std::size_t, double>> sums;
  std::size_t with_pair = 0;
  for (const auto& c : clusters) {
    std::vector<std::size_t> rows;
    for (const auto& s : c.supporters) rows.push_back(s.row);
    const std::size_t p = pairs_for(rows);
    rep.pairs.push_back(p);
    if (p) ++with_pair;
    auto& cell = sums[c.support()];
    ++cell.first;
    cell.second += static_cast<double>(p);
  }
  const double n = static_cast<double>(clusters.size());
  if (!clusters.empty()) {
    rep.mean_pairs = static_cast<double>(std::accumulate(rep.pairs.begin(), rep.pairs.end(), std::size_t{0})) / n;
    rep.fraction_with_pair = static_cast<double>(with_pair) / n;
  }
  for (const auto& [size, cell] : sums) {
    rep.by_size[size] = {cell.first, cell.second / static_cast<double>(cell.first)};
  }
  if (replicates == 0 || clusters.empty()) return rep;

  const auto shapes = shapes_of(clusters);
  std::map<std::size_t, std::pair<std::size_t, double>> null_sums;
  for (std::size_t i = 0; i < replicates; ++i) {
    Rng rng = Rng::derive(seed, i);
    const auto set = stats::random_clusters(shapes, row_ids.size(), n_cols, rng);
    std::size_t total = 0, any = 0;
    for (const auto& rc : set.clusters) {
      const std::size_t p = pairs_for(rc.rows);
      total += p;
      if (p) ++any;
      auto& cell = null_sums[rc.rows.size()];
      ++cell.first;
      cell.second += static_cast<double>(p);
    }
    rep.null_mean_pairs.push_back(static_cast<double>(total) / n);
    rep.null_fraction_with_pair.push_back(static_cast<double>(any) / n);
  }
  for (const auto& [size, cell] : null_sums) rep.null_by_size[size] = cell.second / static_cast<double>(cell.first);
  rep.p_mean = stats::permutation_pvalue(rep.mean_pairs, rep.null_mean_pairs, stats::Tail::greater);
  rep.p_fraction = stats::permutation_pvalue(rep.fraction_with_pair, rep.null_fraction_with_pair,
                                             stats::Tail::greater);
  return rep;
}

void write_probe_report(std::ostream& out, const ProbeReport& r) {
  write_seed_header(out, r.replicates, r.seed);
  out << "clusters\t" << r.pairs.size() << '\n'
      << "uncovered_rows\t" << r.uncovered_rows << '\n'
      << "mean_redundant_pairs\t" << r.mean_pairs << '\n'
      << "random_mean_redundant_pairs\t" << mean_of(r.null_mean_pairs) << '\n'
      << "p_mean\t" << r.p_mean << '\n'
      << "fraction_with_redundant_pair\t" << r.fraction_with_pair << '\n'
      << "random_fraction_with_redundant_pair\t" << mean_of(r.null_fraction_with_pair) << '\n'
      << "p_fraction\t" << r.p_fraction << '\n'
      << "\nn_genes\tclusters\tmean_pairs\trandom_mean_pairs\n";
  for (const auto& [size, cell] : r.by_size) {
    const auto it = r.null_by_size.find(size);
    out << size << '\t' << cell.first << '\t' << cell.second << '\t'
        << (it == r.null_by_size.end() ? 0.0 : it->second) << '\n';
  }
}

// ---- annotation enrichment ---------------------------------------------------

namespace {

struct TermTable {
  std::vector<std::string> terms;                       // tested
  std::vector<std::string> uniform;                     // on every experiment
  std::vector<std::uint64_t> count;                     // experiments per tested term
  std::vector<std::vector<std::uint32_t>> terms_of_col;  // tested term ids per column
};

TermTable build_terms(std::span<const std::string> col_ids, const IdSetMap& annotations,
                      const std::optional<std::string>& category) {
  const std::string prefix = category ? *category + ":" : std::string();
  std::map<std::string, std::vector<std::uint32_t>> cols_of_term;
  for (std::size_t c = 0; c < col_ids.size(); ++c) {
    auto it = annotations.find(col_ids[c]);
    if (it == annotations.end()) continue;
    for (const auto& term : it->second) {
      if (!prefix.empty() && term.rfind(prefix, 0) != 0) continue;
      cols_of_term[term].push_back(static_cast<std::uint32_t>(c));
    }
  }
  TermTable t;
  t.terms_of_col.resize(col_ids.size());
  for (const auto& [term, cols] : cols_of_term) {
    if (cols.size() == col_ids.size()) {
      t.uniform.push_back(term);
      continue;
    }
    const auto id = static_cast<std::uint32_t>(t.terms.size());
    t.terms.push_back(term);
    t.count.push_back(cols.size());
    for (const auto c : cols) t.terms_of_col[c].push_back(id);
  }
  return t;
}

struct ClusterTests {
  std::size_t cluster_id = 0;
  std::vector<EnrichmentResult> results;  // a >= 1
};

ClusterTests test_cluster(std::size_t id, std::span<const ColumnIndex> cols, const TermTable& t,
                          std::size_t total_cols) {
  std::unordered_map<std::uint32_t, std::uint64_t> hits;
  for (const auto c : cols) {
    for (const auto term : t.terms_of_col[c]) ++hits[term];
  }
  std::vector<std::pair<std::uint32_t, std::uint64_t>> ordered(hits.begin(), hits.end());
  std::sort(ordered.begin(), ordered.end());
  ClusterTests ct;
  ct.cluster_id = id;
  const std::uint64_t size = cols.size();
  for (const auto& [term, a] : ordered) {
    EnrichmentResult r;
    r.cluster_id = id;
    r.term = t.terms[term];
    r.a = a;
    r.b = size - a;
    r.c = t.count[term] - a;
    r.d = total_cols - size - r.c;
    r.raw_p = stats::fisher_exact(r.a, r.b, r.c, r.d);
    ct.results.push_back(std::move(r));
  }
  return ct;
}

// BH within each cluster's family, or over all tests together; unlisted tests
// (zero overlap) count toward the family with p = 1.
void adjust(std::vector<ClusterTests>& tests, std::size_t terms_per_cluster, BhScope scope) {
  if (scope == BhScope::cluster) {
    for (auto& ct : tests) {
      std::vector<double> p;
      for (const auto& r : ct.results) p.push_back(r.raw_p);
      const auto q = stats::bh_adjust(p, terms_per_cluster);
      for (std::size_t i = 0; i < q.size(); ++i) ct.results[i].adjusted_p = q[i];
    }
    return;
  }
  std::vector<double> p;
  for (const auto& ct : tests) {
    for (const auto& r : ct.results) p.push_back(r.raw_p);
  }
  const auto q = stats::bh_adjust(p, terms_per_cluster * tests.size());
  std::size_t i = 0;
  for (auto& ct : tests) {
    for (auto& r : ct.results) r.adjusted_p = q[i++];
  }
}

std::vector<double> min_adjusted(const std::vector<ClusterTests>& tests) {
  std::vector<double> out;
  for (const auto& ct : tests) {
    double best = 1.0;
    for (const auto& r : ct.results) best = std::min(best, r.adjusted_p);
    out.push_back(best);
  }
  return out;
}

EnrichmentCurve curve_of(const std::vector<double>& min_p, const std::vector<double>& grid) {
  EnrichmentCurve curve;
  curve.alpha = grid;
  for (const double alpha : grid) {
    const auto hits = std::count_if(min_p.begin(), min_p.end(), [&](double p) { return p <= alpha; });
    curve.fraction.push_back(min_p.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(min_p.size()));
  }
  return curve;
}

}  // namespace

EnrichmentReport annotation_enrichment(std::span<const Cluster> clusters,
                                       std::span<const std::string> col_ids, std::size_t n_rows,
                                       const IdSetMap& annotations,
                                       const EnrichmentOptions& options) {
  EnrichmentReport rep;
  rep.options = options;
  const TermTable table = build_terms(col_ids, annotations, options.category);
  rep.terms = table.terms;
  rep.uniform_terms = table.uniform;
  const std::size_t total_cols = col_ids.size();

  std::vector<const Cluster*> eligible;
  for (const auto& c : clusters) {
    if (c.support() >= options.min_genes && c.pattern.size() >= options.min_exps) eligible.push_back(&c);
  }
  rep.eligible = eligible.size();

  std::vector<ClusterTests> tests;
  for (const auto* c : eligible) tests.push_back(test_cluster(c->id, c->pattern, table, total_cols));
  adjust(tests, table.terms.size(), options.bh_scope);
  rep.min_adjusted = min_adjusted(tests);
  for (auto& ct : tests) {
    std::move(ct.results.begin(), ct.results.end(), std::back_inserter(rep.results));
  }
  rep.curve = curve_of(rep.min_adjusted, options.alpha_grid);

  std::vector<stats::ClusterShape> shapes;
  for (const auto* c : eligible) shapes.push_back({c->support(), c->pattern.size()});
  const auto random = stats::random_clusters(shapes, n_rows, total_cols, options.seed);
  std::vector<ClusterTests> random_tests;
  for (std::size_t i = 0; i < random.clusters.size(); ++i) {
    std::vector<ColumnIndex> cols(random.clusters[i].cols.begin(), random.clusters[i].cols.end());
    random_tests.push_back(test_cluster(i + 1, cols, table, total_cols));
  }
  adjust(random_tests, table.terms.size(), options.bh_scope);
  rep.random_min_adjusted = min_adjusted(random_tests);
  rep.random_curve = curve_of(rep.random_min_adjusted, options.alpha_grid);
  if (!rep.min_adjusted.empty()) rep.ks = stats::ks_two_sample(rep.min_adjusted, rep.random_min_adjusted);
  return rep;
}

void write_enrichment_report(std::ostream& out, const EnrichmentReport& r) {
  const auto& o = r.options;
  out << "# min_genes\t" << o.min_genes << "\n# min_exps\t" << o.min_exps << "\n# category\t"
      << (o.category ? *o.category : "*") << "\n# bh_scope\t"
      << (o.bh_scope == BhScope::cluster ? "cluster" : "global") << "\n# seed\t" << o.seed
      << "\n# rng\t" << Rng::algorithm << '\n'
      << "eligible_clusters\t" << r.eligible << '\n'
      << "tested_terms\t" << r.terms.size() << '\n'
      << "uniform_terms\t" << r.uniform_terms.size() << '\n'
      << "ks_d\t" << r.ks.d << "\nks_p\t" << r.ks.p << '\n'
      << "\nalpha\tfraction_clusters\tfraction_random\n";
  for (std::size_t i = 0; i < r.curve.alpha.size(); ++i) {
    out << r.curve.alpha[i] << '\t' << r.curve.fraction[i] << '\t' << r.random_curve.fraction[i] << '\n';
  }
  out << "\ncluster_id\tterm\ta\tb\tc\td\traw_p\tadjusted_p\n";
  for (const auto& e : r.results) {
    out << e.cluster_id << '\t' << e.term << '\t' << e.a << '\t' << e.b << '\t' << e.c << '\t'
        << e.d << '\t' << e.raw_p << '\t' << e.adjusted_p << '\n';
  }
  if (r.uniform_terms.empty()) return;
  // on every experiment: never over-represented, left out of the BH family
  out << "\nuniform_term\traw_p\n";
  for (const auto& t : r.uniform_terms) out << t << "\t1\n";
}

// ---- negative controls -----------------------------------------------------

NegativeReport negative_control_analysis(std::span<const Cluster> clusters,
                                         std::span<const std::string> row_ids, std::size_t n_cols,
                                         const IdSet& negatives, std::size_t replicates,
                                         std::uint64_t seed) {
  NegativeReport rep;
  rep.replicates = replicates;
  rep.seed = seed;
  std::vector<char> is_negative(row_ids.size(), 0);
  std::set<std::string_view> matched;
  for (std::size_t r = 0; r < row_ids.size(); ++r) {
    if (negatives.contains(row_ids[r])) {
      is_negative[r] = 1;
      matched.insert(row_ids[r]);
    }
  }
  for (const auto& n : negatives) {
    if (!matched.contains(n)) rep.unmatched.push_back(n);
  }

  auto fraction = [&](auto&& rows) {
    std::size_t neg = 0, total = 0;
    for (const std::size_t r : rows) {
      neg += is_negative[r];
      ++total;
    }
    return total ? static_cast<double>(neg) / static_cast<double>(total) : 0.0;
  };

  double sum = 0.0;
  for (const auto& c : clusters) {
    std::vector<std::size_t> rows;
    for (const auto& s : c.supporters) rows.push_back(s.row);
    const double f = fraction(rows);
    rep.fractions.push_back(f);
    sum += f;
    auto& cell = rep.by_shape[{c.support(), c.pattern.size()}];
    ++cell.clusters;
    cell.sum += f;
  }
  if (clusters.empty()) return rep;
  rep.mean_fraction = sum / static_cast<double>(clusters.size());
  if (replicates == 0) return rep;

  const auto shapes = shapes_of(clusters);
  rep.null_means = stats::permutation_null(replicates, seed, [&](Rng& rng) {
    const auto set = stats::random_clusters(shapes, row_ids.size(), n_cols, rng);
    double s = 0.0;
    for (const auto& rc : set.clusters) s += fraction(rc.rows);
    return s / static_cast<double>(set.clusters.size());
  });
  rep.p = stats::permutation_pvalue(rep.mean_fraction, rep.null_means, stats::Tail::less);
  return rep;
}

void write_negative_report(std::ostream& out, const NegativeReport& r) {
  write_seed_header(out, r.replicates, r.seed);
  out << "clusters\t" << r.fractions.size() << '\n'
      << "unmatched_negatives\t" << r.unmatched.size() << '\n'
      << "mean_negative_fraction\t" << r.mean_fraction << '\n'
      << "random_mean_negative_fraction\t" << mean_of(r.null_means) << '\n'
      << "p_less\t" << r.p << '\n'
      << "\nn_genes\tn_exps\tclusters\tmean_negative_fraction\n";
  for (const auto& [shape, cell] : r.by_shape) {
    out << shape.first << '\t' << shape.second << '\t' << cell.clusters << '\t' << cell.mean() << '\n';
  }
}

// ---- promoter similarity ---------------------------------------------------

double similarity_score(std::span<const std::vector<std::uint32_t>> sets) {
  const std::size_t n = sets.size();
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  std::uint64_t shared = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto& a = sets[i];
      const auto& b = sets[j];
      std::size_t x = 0, y = 0;
      while (x < a.size() && y < b.size()) {
        if (a[x] < b[y]) ++x;
        else if (b[y] < a[x]) ++y;
        else {
          ++shared;
          ++x;
          ++y;
        }
      }
    }
  }
  return 2.0 * static_cast<double>(shared) / (static_cast<double>(n) * static_cast<double>(n - 1));
}

double similarity_score(const std::vector<std::set<std::string>>& label_sets) {
  std::map<std::string_view, std::uint32_t> ids;
  std::vector<std::vector<std::uint32_t>> sets;
  for (const auto& s : label_sets) {
    for (const auto& l : s) ids.emplace(l, 0);
  }
  std::uint32_t next = 0;
  for (auto& [label, id] : ids) id = next++;
  for (const auto& s : label_sets) {
    std::vector<std::uint32_t> v;
    for (const auto& l : s) v.push_back(ids.at(l));
    std::sort(v.begin(), v.end());
    sets.push_back(std::move(v));
  }
  return similarity_score(sets);
}

SimilarityReport promoter_similarity(std::span<const Cluster> clusters,
                                     std::span<const std::string> row_ids, std::size_t n_cols,
                                     const IdSetMap& label_sets, std::size_t replicates,
                                     std::uint64_t seed) {
  SimilarityReport rep;
  rep.replicates = replicates;
  rep.seed = seed;

  std::map<std::string_view, std::uint32_t> label_ids;
  for (const auto& [gene, labels] : label_sets) {
    for (const auto& l : labels) label_ids.emplace(l, 0);
  }
  std::uint32_t next = 0;
  for (auto& [label, id] : label_ids) id = next++;
  std::vector<std::vector<std::uint32_t>> labels_of(row_ids.size());
  for (std::size_t r = 0; r < row_ids.size(); ++r) {
    auto it = label_sets.find(row_ids[r]);
    if (it == label_sets.end()) continue;
    for (const auto& l : it->second) labels_of[r].push_back(label_ids.at(l));
    std::sort(labels_of[r].begin(), labels_of[r].end());
  }
  auto score_rows = [&](auto&& rows) {
    std::vector<std::vector<std::uint32_t>> sets;
    for (const std::size_t r : rows) sets.push_back(labels_of[r]);
    return similarity_score(sets);
  };

  std::vector<double> observed;
  std::vector<stats::ClusterShape> shapes;
  for (const auto& c : clusters) {
    if (c.support() < 2) {
      rep.scores.emplace_back(std::nullopt);
      rep.skipped.push_back(c.id);
      continue;
    }
    std::vector<std::size_t> rows;
    for (const auto& s : c.supporters) rows.push_back(s.row);
    const double s = score_rows(rows);
    rep.scores.emplace_back(s);
    observed.push_back(s);
    shapes.push_back({c.support(), c.pattern.size()});
    auto& size_cell = rep.by_size[c.support()];
    ++size_cell.clusters;
    size_cell.sum += s;
    auto& len_cell = rep.by_length[c.pattern.size()];
    ++len_cell.clusters;
    len_cell.sum += s;
  }
  rep.mean_score = mean_of(observed);
  if (replicates == 0 || observed.empty()) return rep;

  rep.random_scores.reserve(replicates * shapes.size());
  std::vector<double> null_means;
  for (std::size_t i = 0; i < replicates; ++i) {
    Rng rng = Rng::derive(seed, i);
    const auto set = stats::random_clusters(shapes, row_ids.size(), n_cols, rng);
    double sum = 0.0;
    for (std::size_t k = 0; k < set.clusters.size(); ++k) {
      const double s = score_rows(set.clusters[k].rows);
      rep.random_scores.push_back(s);
      sum += s;
      auto& size_cell = rep.random_by_size[shapes[k].genes];
      ++size_cell.clusters;
      size_cell.sum += s;
      auto& len_cell = rep.random_by_length[shapes[k].exps];
      ++len_cell.clusters;
      len_cell.sum += s;
    }
    null_means.push_back(sum / static_cast<double>(shapes.size()));
  }
  rep.random_mean = mean_of(rep.random_scores);
  rep.rank_sum = stats::rank_sum(observed, rep.random_scores, stats::Alternative::greater);
  rep.p_mean = stats::permutation_pvalue(rep.mean_score, null_means, stats::Tail::greater);
  return rep;
}

void write_similarity_report(std::ostream& out, const SimilarityReport& r) {
  write_seed_header(out, r.replicates, r.seed);
  out << "clusters_scored\t" << r.scores.size() - r.skipped.size() << '\n'
      << "clusters_skipped\t" << r.skipped.size() << '\n'
      << "mean_similarity\t" << r.mean_score << '\n'
      << "random_mean_similarity\t" << r.random_mean << '\n'
      << "rank_sum_u\t" << r.rank_sum.u << '\n'
      << "rank_sum_p_greater\t" << r.rank_sum.p << '\n'
      << "permutation_p_mean\t" << r.p_mean << '\n';
  auto table = [&](const char* key, const auto& obs, const auto& rnd) {
    out << '\n' << key << "\tclusters\tmean_similarity\trandom_mean_similarity\n";
    for (const auto& [k, cell] : obs) {
      const auto it = rnd.find(k);
      out << k << '\t' << cell.clusters << '\t' << cell.mean() << '\t'
          << (it == rnd.end() ? 0.0 : it->second.mean()) << '\n';
    }
  };
  table("n_genes", r.by_size, r.random_by_size);
  table("n_exps", r.by_length, r.random_by_length);
}

}  // namespace kiwi::eval
