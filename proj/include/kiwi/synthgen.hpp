#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "kiwi/matrix_io.hpp"

namespace kiwi {

/// i.i.d. uniform(0,1) matrix, rows "g1".."gn", columns "e1".."em". Values
/// within a row are all distinct.
ExpressionMatrix random_matrix(std::size_t n, std::size_t m, std::uint64_t seed);

/// One planted order-preserving submatrix, by row and column index.
struct Plant {
  std::vector<std::size_t> rows;
  std::vector<std::size_t> cols;           // planted order
  std::vector<std::size_t> reversed_rows;  // subset of rows carrying the reverse order
};

/// Overwrites each planted row's `cols` with an arithmetic ramp of step `sep`
/// starting above 1 (so above every uniform cell), increasing along `cols`, or
/// decreasing for reversed rows. Plants may not share cells.
ExpressionMatrix plant_opsm(const ExpressionMatrix& matrix, std::span<const Plant> plants,
                            double sep = 1.0);
ExpressionMatrix plant_opsm(const ExpressionMatrix& matrix, const Plant& plant, double sep = 1.0);

/// Parses "rows=0,1,2;cols=3,1,4;reversed=2" (reversed optional).
Plant parse_plant(std::string_view spec);

/// TSV manifest: plant index, rows, columns in order, reversed rows (comma-separated ids).
void write_manifest(std::ostream& out, const ExpressionMatrix& matrix, std::span<const Plant> plants);

}  // namespace kiwi
