#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <ostream>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace kiwi {

/// Raised for any malformed or unusable input file.
class InputError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Dense n x m expression matrix, genes as rows and experiments as columns.
class ExpressionMatrix {
public:
  ExpressionMatrix() = default;

  /// Validates ids (unique), shape (n, m >= 2) and values (finite, row-major n*m).
  ExpressionMatrix(std::vector<std::string> row_ids, std::vector<std::string> col_ids,
                   std::vector<double> values);

  [[nodiscard]] std::size_t rows() const { return row_ids_.size(); }
  [[nodiscard]] std::size_t cols() const { return col_ids_.size(); }

  [[nodiscard]] const std::vector<std::string>& row_ids() const { return row_ids_; }
  [[nodiscard]] const std::vector<std::string>& col_ids() const { return col_ids_; }

  [[nodiscard]] double at(std::size_t row, std::size_t col) const {
    return values_[row * cols() + col];
  }
  [[nodiscard]] std::span<const double> row(std::size_t r) const {
    return {values_.data() + r * cols(), cols()};
  }
  [[nodiscard]] const std::vector<double>& values() const { return values_; }

  friend bool operator==(const ExpressionMatrix&, const ExpressionMatrix&) = default;

private:
  std::vector<std::string> row_ids_;
  std::vector<std::string> col_ids_;
  std::vector<double> values_;
};

enum class MissingPolicy { reject, drop_rows };

struct LoadReport {
  std::size_t data_lines = 0;
  std::vector<std::string> dropped_rows;
};

struct LoadedMatrix {
  ExpressionMatrix matrix;
  LoadReport report;
};

LoadedMatrix load_matrix(const std::filesystem::path& path,
                         MissingPolicy policy = MissingPolicy::reject);
LoadedMatrix parse_matrix(std::istream& in, MissingPolicy policy = MissingPolicy::reject,
                          const std::string& source = "<stream>");

/// Writes the TSV form read by load_matrix. Values use shortest round-trip formatting.
void write_matrix(std::ostream& out, const ExpressionMatrix& matrix,
                  std::string_view header_name = "gene");

using IdMap = std::map<std::string, std::string>;
using IdSetMap = std::map<std::string, std::set<std::string>>;
using IdSet = std::set<std::string>;

IdMap load_probe_map(const std::filesystem::path& path);
/// Three columns (experiment, category, value); terms are stored as "category:value".
IdSetMap load_annotations(const std::filesystem::path& path);
IdSet load_negatives(const std::filesystem::path& path);
IdSetMap load_label_sets(const std::filesystem::path& path);

IdMap parse_probe_map(std::istream& in, const std::string& source = "<stream>");
IdSetMap parse_annotations(std::istream& in, const std::string& source = "<stream>");
IdSet parse_negatives(std::istream& in, const std::string& source = "<stream>");
IdSetMap parse_label_sets(std::istream& in, const std::string& source = "<stream>");

/// Ids in `ids` that are not present in `known`, sorted.
std::vector<std::string> unmatched_ids(const std::vector<std::string>& ids,
                                       std::span<const std::string> known);

}  // namespace kiwi
