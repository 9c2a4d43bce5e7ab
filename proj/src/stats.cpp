#include "kiwi/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

namespace kiwi::stats {

namespace {

double log_choose(std::uint64_t n, std::uint64_t k) {
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

}  // namespace

double fisher_exact(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d) {
  const std::uint64_t total = a + b + c + d;
  const std::uint64_t drawn = a + b;
  const std::uint64_t marked = a + c;
  const std::uint64_t lo = drawn + marked > total ? drawn + marked - total : 0;
  const std::uint64_t hi = std::min(drawn, marked);
  if (a <= lo) return 1.0;

  const double norm = log_choose(total, drawn);
  std::vector<double> logs;
  logs.reserve(hi - a + 1);
  for (std::uint64_t x = a; x <= hi; ++x) {
    logs.push_back(log_choose(marked, x) + log_choose(total - marked, drawn - x) - norm);
  }
  const double peak = *std::max_element(logs.begin(), logs.end());
  double sum = 0.0;
  for (const double l : logs) sum += std::exp(l - peak);
  return std::min(1.0, std::exp(peak + std::log(sum)));
}

std::vector<double> bh_adjust(std::span<const double> p) { return bh_adjust(p, p.size()); }

std::vector<double> bh_adjust(std::span<const double> p, std::size_t family_size) {
  if (family_size < p.size()) throw std::invalid_argument("BH family smaller than the p-value list");
  const std::size_t m = family_size;
  std::vector<std::size_t> order(p.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return p[i] < p[j]; });
  std::vector<double> q(p.size());
  double running = 1.0;
  for (std::size_t r = p.size(); r-- > 0;) {
    const double scaled = p[order[r]] * static_cast<double>(m) / static_cast<double>(r + 1);
    running = std::min(running, scaled);
    // rounding in the scaling must not push q below its own p
    q[order[r]] = std::min(1.0, std::max(running, p[order[r]]));
  }
  return q;
}

double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.18) {
    // Jacobi-theta form, convergent for small lambda.
    constexpr double pi = std::numbers::pi;
    const double factor = -pi * pi / (8.0 * lambda * lambda);
    double cdf = 0.0;
    for (int j = 1; j <= 100; ++j) {
      const double k = 2.0 * j - 1.0;
      const double term = std::exp(factor * k * k);
      cdf += term;
      if (term < 1e-17) break;
    }
    cdf *= std::sqrt(2.0 * pi) / lambda;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double q = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    q += sign * term;
    sign = -sign;
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * q, 0.0, 1.0);
}

namespace {

double ks_statistic(std::vector<double> x, std::vector<double> y) {
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = static_cast<double>(x.size());
  const double ny = static_cast<double>(y.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  return d;
}

}  // namespace

KsResult ks_two_sample(std::span<const double> x, std::span<const double> y) {
  if (x.empty() || y.empty()) throw std::invalid_argument("ks_two_sample needs nonempty samples");
  KsResult r;
  r.d = ks_statistic({x.begin(), x.end()}, {y.begin(), y.end()});
  const double nx = static_cast<double>(x.size());
  const double ny = static_cast<double>(y.size());
  r.p = kolmogorov_survival(std::sqrt(nx * ny / (nx + ny)) * r.d);
  return r;
}

double ks_permutation_pvalue(std::span<const double> x, std::span<const double> y,
                             std::size_t replicates, std::uint64_t seed) {
  const double observed = ks_statistic({x.begin(), x.end()}, {y.begin(), y.end()});
  std::vector<double> pooled(x.begin(), x.end());
  pooled.insert(pooled.end(), y.begin(), y.end());
  const auto null = permutation_null(replicates, seed, [&](Rng& rng) {
    std::vector<double> shuffled = pooled;
    for (std::size_t i = shuffled.size(); i > 1; --i) {
      std::swap(shuffled[i - 1], shuffled[rng.below(i)]);
    }
    const auto split = shuffled.begin() + static_cast<std::ptrdiff_t>(x.size());
    return ks_statistic({shuffled.begin(), split}, {split, shuffled.end()});
  });
  return permutation_pvalue(observed, null, Tail::greater);
}

std::vector<double> midranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return values[i] < values[j]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = rank;
    i = j + 1;
  }
  return ranks;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

RankSumResult rank_sum(std::span<const double> x, std::span<const double> y,
                       Alternative alternative, RankSumMethod method) {
  if (x.empty() || y.empty()) throw std::invalid_argument("rank_sum needs nonempty samples");
  const std::size_t n1 = x.size();
  const std::size_t n2 = y.size();
  const std::size_t total = n1 + n2;
  std::vector<double> pooled(x.begin(), x.end());
  pooled.insert(pooled.end(), y.begin(), y.end());
  const auto ranks = midranks(pooled);
  const double offset = static_cast<double>(n1) * static_cast<double>(n1 + 1) / 2.0;
  const double r1 = std::accumulate(ranks.begin(), ranks.begin() + static_cast<std::ptrdiff_t>(n1), 0.0);

  RankSumResult result;
  result.u = r1 - offset;
  const bool exact = method == RankSumMethod::exact ||
                     (method == RankSumMethod::automatic && total <= 12);
  if (exact) {
    if (total > 30) throw std::invalid_argument("exact rank-sum limited to 30 observations");
    // Every assignment of n1 of the pooled midranks to x is equally likely under H0.
    std::uint64_t le = 0, ge = 0, count = 0;
    constexpr double eps = 1e-9;
    std::vector<bool> pick(total, false);
    std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(n1), true);
    do {
      double s = 0.0;
      for (std::size_t i = 0; i < total; ++i) {
        if (pick[i]) s += ranks[i];
      }
      const double u = s - offset;
      if (u <= result.u + eps) ++le;
      if (u >= result.u - eps) ++ge;
      ++count;
    } while (std::prev_permutation(pick.begin(), pick.end()));
    const double pl = static_cast<double>(le) / static_cast<double>(count);
    const double pg = static_cast<double>(ge) / static_cast<double>(count);
    result.exact = true;
    switch (alternative) {
      case Alternative::less: result.p = pl; break;
      case Alternative::greater: result.p = pg; break;
      case Alternative::two_sided: result.p = std::min(1.0, 2.0 * std::min(pl, pg)); break;
    }
    return result;
  }

  std::vector<double> sorted = pooled;
  std::sort(sorted.begin(), sorted.end());
  double tie_term = 0.0;
  for (std::size_t i = 0; i < total;) {
    std::size_t j = i;
    while (j < total && sorted[j] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    i = j;
  }
  const double dn1 = static_cast<double>(n1);
  const double dn2 = static_cast<double>(n2);
  const double dn = static_cast<double>(total);
  const double mean = dn1 * dn2 / 2.0;
  const double var = dn1 * dn2 / 12.0 * ((dn + 1.0) - tie_term / (dn * (dn - 1.0)));
  if (var <= 0.0) {
    result.p = 1.0;
    return result;
  }
  const double sd = std::sqrt(var);
  switch (alternative) {
    case Alternative::less: result.p = normal_cdf((result.u - mean + 0.5) / sd); break;
    case Alternative::greater: result.p = 1.0 - normal_cdf((result.u - mean - 0.5) / sd); break;
    case Alternative::two_sided: {
      const double z = std::max(0.0, std::abs(result.u - mean) - 0.5) / sd;
      result.p = std::min(1.0, 2.0 * (1.0 - normal_cdf(z)));
      break;
    }
  }
  return result;
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) return std::nullopt;
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::optional<double> spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) return std::nullopt;
  const auto rx = midranks(x);
  const auto ry = midranks(y);
  return pearson(rx, ry);
}

double permutation_pvalue(double observed, std::span<const double> null_samples, Tail tail) {
  if (null_samples.empty()) throw std::invalid_argument("permutation_pvalue needs null samples");
  std::size_t extreme = 0;
  for (const double v : null_samples) {
    if (tail == Tail::greater ? v >= observed : v <= observed) ++extreme;
  }
  return static_cast<double>(1 + extreme) / static_cast<double>(1 + null_samples.size());
}

std::vector<double> permutation_null(std::size_t replicates, std::uint64_t seed,
                                     const std::function<double(Rng&)>& statistic) {
  std::vector<double> out(replicates);
  for (std::size_t i = 0; i < replicates; ++i) {
    Rng rng = Rng::derive(seed, i);
    out[i] = statistic(rng);
  }
  return out;
}

std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, Rng& rng) {
  if (k > n) throw std::invalid_argument("cannot sample more items than available");
  std::vector<std::size_t> chosen;
  chosen.reserve(k);
  std::unordered_set<std::size_t> seen;
  const bool small = k <= 32;
  auto contains = [&](std::size_t v) {
    return small ? std::find(chosen.begin(), chosen.end(), v) != chosen.end() : seen.contains(v);
  };
  for (std::size_t j = n - k; j < n; ++j) {
    const auto t = static_cast<std::size_t>(rng.below(j + 1));
    const std::size_t pick = contains(t) ? j : t;
    chosen.push_back(pick);
    if (!small) seen.insert(pick);
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

RandomClusterSet random_clusters(std::span<const ClusterShape> reference, std::size_t n_rows,
                                 std::size_t n_cols, Rng& rng) {
  RandomClusterSet set;
  set.clusters.reserve(reference.size());
  for (const auto& shape : reference) {
    if (shape.genes > n_rows || shape.exps > n_cols) {
      throw std::invalid_argument("random cluster shape (" + std::to_string(shape.genes) + ", " +
                                  std::to_string(shape.exps) + ") exceeds " +
                                  std::to_string(n_rows) + "x" + std::to_string(n_cols));
    }
    RandomCluster c;
    c.rows = sample_without_replacement(n_rows, shape.genes, rng);
    c.cols = sample_without_replacement(n_cols, shape.exps, rng);
    set.clusters.push_back(std::move(c));
  }
  return set;
}

RandomClusterSet random_clusters(std::span<const ClusterShape> reference, std::size_t n_rows,
                                 std::size_t n_cols, std::uint64_t seed) {
  Rng rng(seed);
  auto set = random_clusters(reference, n_rows, n_cols, rng);
  set.seed = seed;
  return set;
}

}  // namespace kiwi::stats
