#pragma once

#include <filesystem>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "kiwi/matrix_io.hpp"
#include "kiwi/miner.hpp"

namespace kiwi {

/// Clusters with the id universes their indices refer to.
struct ClusterFile {
  std::vector<Cluster> clusters;
  std::vector<std::string> row_ids;
  std::vector<std::string> col_ids;
};

/// One line per cluster:
/// id, n_genes, n_exps, anti_correlated (0|1), pattern labels, "row_id:+|-" supporters.
void write_clusters(std::ostream& out, std::span<const Cluster> clusters,
                    std::span<const std::string> row_ids, std::span<const std::string> col_ids);

/// Reads the cluster TSV. With a matrix, ids resolve to its indices and the
/// universes are the matrix ids; otherwise the universes hold the ids seen in
/// the file, in first-seen order. '#' lines are skipped.
ClusterFile parse_clusters(std::istream& in, const ExpressionMatrix* matrix = nullptr,
                           const std::string& source = "<stream>");
ClusterFile load_clusters(const std::filesystem::path& path, const ExpressionMatrix* matrix = nullptr);

/// Adds ids not yet in `universe`, in the order given.
void extend_universe(std::vector<std::string>& universe, const std::vector<std::string>& ids);

}  // namespace kiwi
