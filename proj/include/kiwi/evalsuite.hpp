#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kiwi/matrix_io.hpp"
#include "kiwi/miner.hpp"
#include "kiwi/stats.hpp"

namespace kiwi::eval {

using Shape = std::pair<std::size_t, std::size_t>;  // (genes, experiments)

std::vector<stats::ClusterShape> shapes_of(std::span<const Cluster> clusters);

// ---- cluster summary -------------------------------------------------------

struct Range {
  double mean = 0.0;
  std::size_t min = 0;
  std::size_t max = 0;
};

struct ClusterSummary {
  std::size_t n_clusters = 0;
  Range genes;
  Range exps;
  std::size_t anti_correlated = 0;
  std::map<Shape, std::size_t> density;
  /// Mean pairwise Pearson over pattern columns, backward supporters negated.
  /// Empty when no supporter pair has nonzero variance on both sides.
  std::vector<std::optional<double>> mean_pearson;
  double fraction_pearson_above_095 = 0.0;  // among clusters with a defined value
};

ClusterSummary summarize(std::span<const Cluster> clusters, const ExpressionMatrix& matrix);
void write_density_csv(std::ostream& out, const ClusterSummary& summary);
void write_summary(std::ostream& out, const ClusterSummary& summary);

// ---- redundant probes ------------------------------------------------------

struct ProbeReport {
  std::vector<std::size_t> pairs;  // per cluster
  double mean_pairs = 0.0;
  double fraction_with_pair = 0.0;
  std::size_t uncovered_rows = 0;  // universe rows without a gene mapping
  std::vector<double> null_mean_pairs;
  std::vector<double> null_fraction_with_pair;
  double p_mean = 1.0;
  double p_fraction = 1.0;
  std::map<std::size_t, std::pair<std::size_t, double>> by_size;  // genes -> (clusters, mean pairs)
  std::map<std::size_t, double> null_by_size;                     // genes -> mean pairs over replicates
  std::size_t replicates = 0;
  std::uint64_t seed = 0;
};

/// Number of member pairs mapped to the same gene.
std::size_t redundant_pairs(std::span<const std::string> members, const IdMap& probe_map);

ProbeReport redundant_probe_analysis(std::span<const Cluster> clusters,
                                     std::span<const std::string> row_ids,
                                     std::size_t n_cols, const IdMap& probe_map,
                                     std::size_t replicates, std::uint64_t seed);
void write_probe_report(std::ostream& out, const ProbeReport& report);

// ---- experiment annotation enrichment -------------------------------------

enum class BhScope { cluster, global };

struct EnrichmentOptions {
  std::size_t min_genes = 2;
  std::size_t min_exps = 50;
  std::vector<double> alpha_grid = {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8, 1e-9, 1e-10};
  std::optional<std::string> category;  // keep only "category:*" terms
  BhScope bh_scope = BhScope::cluster;
  std::uint64_t seed = 0;
};

struct EnrichmentResult {
  std::size_t cluster_id = 0;
  std::string term;
  std::uint64_t a = 0, b = 0, c = 0, d = 0;
  double raw_p = 1.0;
  double adjusted_p = 1.0;
};

struct EnrichmentCurve {
  std::vector<double> alpha;
  std::vector<double> fraction;  // clusters whose smallest adjusted p is <= alpha
};

struct EnrichmentReport {
  EnrichmentOptions options;
  std::size_t eligible = 0;
  std::vector<std::string> terms;              // tested terms
  std::vector<std::string> uniform_terms;      // carried by every experiment; p = 1, untested
  std::vector<EnrichmentResult> results;       // tests with a >= 1
  std::vector<double> min_adjusted;            // per eligible cluster
  std::vector<double> random_min_adjusted;     // per matched random cluster
  EnrichmentCurve curve;
  EnrichmentCurve random_curve;
  stats::KsResult ks;
};

EnrichmentReport annotation_enrichment(std::span<const Cluster> clusters,
                                       std::span<const std::string> col_ids,
                                       std::size_t n_rows, const IdSetMap& annotations,
                                       const EnrichmentOptions& options);
void write_enrichment_report(std::ostream& out, const EnrichmentReport& report);

// ---- negative controls -----------------------------------------------------

struct ShapeCell {
  std::size_t clusters = 0;
  double sum = 0.0;
  [[nodiscard]] double mean() const { return clusters ? sum / static_cast<double>(clusters) : 0.0; }
};

struct NegativeReport {
  std::vector<double> fractions;  // per cluster
  double mean_fraction = 0.0;
  std::map<Shape, ShapeCell> by_shape;
  std::vector<std::string> unmatched;  // negatives absent from the row universe
  std::vector<double> null_means;
  double p = 1.0;  // lower tail
  std::size_t replicates = 0;
  std::uint64_t seed = 0;
};

NegativeReport negative_control_analysis(std::span<const Cluster> clusters,
                                         std::span<const std::string> row_ids, std::size_t n_cols,
                                         const IdSet& negatives, std::size_t replicates,
                                         std::uint64_t seed);
void write_negative_report(std::ostream& out, const NegativeReport& report);

// ---- promoter similarity ---------------------------------------------------

/// S = 2 * sum_{i<j} |L_i n L_j| / (N (N - 1)) over sorted, duplicate-free label id lists.
double similarity_score(std::span<const std::vector<std::uint32_t>> label_sets);
double similarity_score(const std::vector<std::set<std::string>>& label_sets);

struct SimilarityReport {
  std::vector<std::optional<double>> scores;  // per cluster, empty when N < 2
  std::vector<std::size_t> skipped;            // cluster ids with N < 2
  double mean_score = 0.0;
  std::vector<double> random_scores;           // pooled over replicates
  double random_mean = 0.0;
  stats::RankSumResult rank_sum;               // cluster scores greater than random
  double p_mean = 1.0;                         // permutation p on the mean, upper tail
  std::map<std::size_t, ShapeCell> by_size, random_by_size;
  std::map<std::size_t, ShapeCell> by_length, random_by_length;
  std::size_t replicates = 0;
  std::uint64_t seed = 0;
};

/// Genes missing from `label_sets` contribute empty sets.
SimilarityReport promoter_similarity(std::span<const Cluster> clusters,
                                     std::span<const std::string> row_ids, std::size_t n_cols,
                                     const IdSetMap& label_sets, std::size_t replicates,
                                     std::uint64_t seed);
void write_similarity_report(std::ostream& out, const SimilarityReport& report);

}  // namespace kiwi::eval
