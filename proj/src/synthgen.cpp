#include "kiwi/synthgen.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <stdexcept>
#include <unordered_set>

#include "kiwi/rng.hpp"

namespace kiwi {

ExpressionMatrix random_matrix(std::size_t n, std::size_t m, std::uint64_t seed) {
  if (n < 2 || m < 2) throw std::invalid_argument("random_matrix needs n, m >= 2");
  Rng rng(seed);
  std::vector<double> values(n * m);
  std::unordered_set<double> row_seen;
  for (std::size_t r = 0; r < n; ++r) {
    row_seen.clear();
    for (std::size_t c = 0; c < m; ++c) {
      double v = rng.unit();
      while (!row_seen.insert(v).second) v = rng.unit();
      values[r * m + c] = v;
    }
  }
  std::vector<std::string> row_ids(n), col_ids(m);
  for (std::size_t r = 0; r < n; ++r) row_ids[r] = "g" + std::to_string(r + 1);
  for (std::size_t c = 0; c < m; ++c) col_ids[c] = "e" + std::to_string(c + 1);
  return ExpressionMatrix(std::move(row_ids), std::move(col_ids), std::move(values));
}

ExpressionMatrix plant_opsm(const ExpressionMatrix& matrix, std::span<const Plant> plants,
                            double sep) {
  if (!(sep > 0.0)) throw std::invalid_argument("plant separation must be positive");
  const std::size_t n = matrix.rows();
  const std::size_t m = matrix.cols();
  std::vector<double> values = matrix.values();
  std::vector<bool> planted(n * m, false);
  for (const auto& plant : plants) {
    std::set<std::size_t> col_set(plant.cols.begin(), plant.cols.end());
    if (col_set.size() != plant.cols.size()) throw std::invalid_argument("plant repeats a column");
    std::set<std::size_t> row_set(plant.rows.begin(), plant.rows.end());
    if (row_set.size() != plant.rows.size()) throw std::invalid_argument("plant repeats a row");
    for (const auto c : plant.cols) {
      if (c >= m) throw std::invalid_argument("plant column out of range");
    }
    for (const auto r : plant.reversed_rows) {
      if (!row_set.contains(r)) throw std::invalid_argument("reversed row is not a planted row");
    }
    const std::size_t len = plant.cols.size();
    for (const auto r : plant.rows) {
      if (r >= n) throw std::invalid_argument("plant row out of range");
      const bool reversed = std::find(plant.reversed_rows.begin(), plant.reversed_rows.end(), r) !=
                            plant.reversed_rows.end();
      for (std::size_t i = 0; i < len; ++i) {
        const std::size_t cell = r * m + plant.cols[i];
        if (planted[cell]) {
          throw std::invalid_argument("overlapping plants at row " + matrix.row_ids()[r] +
                                      ", column " + matrix.col_ids()[plant.cols[i]]);
        }
        planted[cell] = true;
        const std::size_t step = reversed ? len - i : i + 1;
        values[cell] = 1.0 + sep * static_cast<double>(step);
      }
    }
  }
  return ExpressionMatrix(matrix.row_ids(), matrix.col_ids(), std::move(values));
}

ExpressionMatrix plant_opsm(const ExpressionMatrix& matrix, const Plant& plant, double sep) {
  return plant_opsm(matrix, std::span<const Plant>(&plant, 1), sep);
}

namespace {

std::vector<std::size_t> parse_indices(std::string_view text, std::string_view key) {
  std::vector<std::size_t> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = std::min(text.find(',', start), text.size());
    const auto item = text.substr(start, comma - start);
    std::size_t value = 0;
    const auto [end, ec] = std::from_chars(item.data(), item.data() + item.size(), value);
    if (item.empty() || ec != std::errc{} || end != item.data() + item.size()) {
      throw std::invalid_argument("bad index '" + std::string(item) + "' in plant " + std::string(key));
    }
    out.push_back(value);
    start = comma + 1;
  }
  return out;
}

std::string join_ids(const std::vector<std::size_t>& idx, const std::vector<std::string>& names) {
  std::string out;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (i) out += ',';
    out += names[idx[i]];
  }
  return out;
}

}  // namespace

Plant parse_plant(std::string_view spec) {
  Plant plant;
  bool have_rows = false;
  bool have_cols = false;
  std::size_t start = 0;
  while (start < spec.size()) {
    const auto semi = std::min(spec.find(';', start), spec.size());
    const auto part = spec.substr(start, semi - start);
    start = semi + 1;
    if (part.empty()) continue;
    const auto eq = part.find('=');
    if (eq == std::string_view::npos) throw std::invalid_argument("plant field needs key=value");
    const auto key = part.substr(0, eq);
    const auto value = part.substr(eq + 1);
    if (key == "rows") {
      plant.rows = parse_indices(value, key);
      have_rows = true;
    } else if (key == "cols") {
      plant.cols = parse_indices(value, key);
      have_cols = true;
    } else if (key == "reversed") {
      if (!value.empty()) plant.reversed_rows = parse_indices(value, key);
    } else {
      throw std::invalid_argument("unknown plant field '" + std::string(key) + "'");
    }
  }
  if (!have_rows || !have_cols) throw std::invalid_argument("plant needs rows= and cols=");
  return plant;
}

void write_manifest(std::ostream& out, const ExpressionMatrix& matrix, std::span<const Plant> plants) {
  out << "plant\trows\tcols\treversed\n";
  for (std::size_t i = 0; i < plants.size(); ++i) {
    out << i + 1 << '\t' << join_ids(plants[i].rows, matrix.row_ids()) << '\t'
        << join_ids(plants[i].cols, matrix.col_ids()) << '\t'
        << join_ids(plants[i].reversed_rows, matrix.row_ids()) << '\n';
  }
}

}  // namespace kiwi
