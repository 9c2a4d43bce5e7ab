#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "kiwi/rng.hpp"

namespace kiwi::stats {

/// One-sided over-representation p for the 2x2 table
///   a = in cluster with term,     b = in cluster without,
///   c = outside cluster with term, d = outside without,
/// i.e. the hypergeometric upper tail P(X >= a). An all-zero table gives 1.
double fisher_exact(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d);

/// Benjamini-Hochberg step-up adjustment; output in input order, clamped to 1.
std::vector<double> bh_adjust(std::span<const double> p);
/// As above for a family of `family_size` tests of which only `p` are listed;
/// the unlisted tests are taken to have p = 1.
std::vector<double> bh_adjust(std::span<const double> p, std::size_t family_size);

struct KsResult {
  double d = 0.0;
  double p = 1.0;
};

/// Two-sample Kolmogorov-Smirnov with the asymptotic Kolmogorov p-value at
/// effective size nx*ny/(nx+ny).
KsResult ks_two_sample(std::span<const double> x, std::span<const double> y);

/// Survival function of the Kolmogorov distribution, P(K > lambda).
double kolmogorov_survival(double lambda);

/// KS p-value by label permutation, for samples too small for the asymptotic form.
double ks_permutation_pvalue(std::span<const double> x, std::span<const double> y,
                             std::size_t replicates, std::uint64_t seed);

enum class Alternative { less, greater, two_sided };
enum class RankSumMethod { automatic, exact, normal };

struct RankSumResult {
  double u = 0.0;  // Mann-Whitney U of x: pairs (xi, yj) with xi > yj, ties counting 1/2
  double p = 1.0;
  bool exact = false;
};

/// Wilcoxon rank-sum / Mann-Whitney test with midranks. `less` tests x
/// stochastically smaller than y. Automatic uses exact enumeration when
/// |x|+|y| <= 12, else the normal approximation with tie and continuity correction.
RankSumResult rank_sum(std::span<const double> x, std::span<const double> y,
                       Alternative alternative = Alternative::less,
                       RankSumMethod method = RankSumMethod::automatic);

/// Midranks (1-based), ties sharing the mean of their positions.
std::vector<double> midranks(std::span<const double> values);

std::optional<double> pearson(std::span<const double> x, std::span<const double> y);
std::optional<double> spearman(std::span<const double> x, std::span<const double> y);

enum class Tail { greater, less };

/// (1 + #{null at least as extreme as observed}) / (1 + R).
double permutation_pvalue(double observed, std::span<const double> null_samples, Tail tail);

/// Null statistics for R replicates; replicate i draws from Rng::derive(seed, i),
/// so the values do not depend on evaluation order.
std::vector<double> permutation_null(std::size_t replicates, std::uint64_t seed,
                                     const std::function<double(Rng&)>& statistic);

double normal_cdf(double z);

struct ClusterShape {
  std::size_t genes = 0;
  std::size_t exps = 0;
  friend bool operator==(const ClusterShape&, const ClusterShape&) = default;
};

struct RandomCluster {
  std::vector<std::size_t> rows;  // ascending
  std::vector<std::size_t> cols;  // ascending
};

struct RandomClusterSet {
  std::vector<RandomCluster> clusters;
  std::uint64_t seed = 0;
};

/// Uniform k-subset of [0, n), ascending (Floyd's algorithm).
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, Rng& rng);

/// One random cluster per reference shape: rows and columns each drawn uniformly
/// without replacement, independently per cluster.
RandomClusterSet random_clusters(std::span<const ClusterShape> reference, std::size_t n_rows,
                                 std::size_t n_cols, std::uint64_t seed);
RandomClusterSet random_clusters(std::span<const ClusterShape> reference, std::size_t n_rows,
                                 std::size_t n_cols, Rng& rng);

}  // namespace kiwi::stats
