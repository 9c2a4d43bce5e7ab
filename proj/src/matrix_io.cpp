#include "kiwi/matrix_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <unordered_set>

namespace kiwi {

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

// Reads one line, strips a trailing CR. Returns false at end of input.
bool next_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

bool skippable(std::string_view line) {
  return line.empty() || line.front() == '#';
}

std::optional<double> parse_number(std::string_view text) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return std::nullopt;
  double value = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || end != text.data() + text.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  return in;
}

template <typename Fn>
std::size_t for_each_record(std::istream& in, const std::string& source,
                            std::size_t min_fields, Fn&& fn) {
  std::string line;
  std::size_t line_no = 0;
  std::size_t used = 0;
  while (next_line(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    const auto fields = split_tabs(line);
    if (fields.size() < min_fields ||
        std::any_of(fields.begin(), fields.begin() + static_cast<std::ptrdiff_t>(min_fields),
                    [](std::string_view f) { return f.empty(); })) {
      throw InputError(source + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(min_fields) + " non-empty tab-separated fields");
    }
    fn(fields);
    ++used;
  }
  if (used == 0) throw InputError(source + ": no usable lines");
  return used;
}

}  // namespace

ExpressionMatrix::ExpressionMatrix(std::vector<std::string> row_ids,
                                   std::vector<std::string> col_ids,
                                   std::vector<double> values)
    : row_ids_(std::move(row_ids)), col_ids_(std::move(col_ids)), values_(std::move(values)) {
  if (rows() < 2 || cols() < 2) {
    throw InputError("matrix needs at least 2 rows and 2 columns, got " +
                     std::to_string(rows()) + "x" + std::to_string(cols()));
  }
  if (values_.size() != rows() * cols()) throw InputError("matrix value count mismatch");
  auto check_unique = [](const std::vector<std::string>& ids, const char* what) {
    std::unordered_set<std::string_view> seen;
    for (const auto& id : ids) {
      if (!seen.insert(id).second) throw InputError(std::string("duplicate ") + what + " id: " + id);
    }
  };
  check_unique(row_ids_, "row");
  check_unique(col_ids_, "column");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw InputError("non-finite value at row " + row_ids_[i / cols()] + ", column " +
                       col_ids_[i % cols()]);
    }
  }
}

LoadedMatrix parse_matrix(std::istream& in, MissingPolicy policy, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (next_line(in, line)) {
    ++line_no;
    if (!skippable(line)) {
      have_header = true;
      break;
    }
  }
  if (!have_header) throw InputError(source + ": missing header line");

  const auto header = split_tabs(line);
  if (header.size() < 3) {
    throw InputError(source + ":" + std::to_string(line_no) +
                     ": malformed header, expected a row-id column and at least 2 experiments");
  }
  std::vector<std::string> col_ids;
  for (std::size_t i = 1; i < header.size(); ++i) {
    if (header[i].empty()) {
      throw InputError(source + ":" + std::to_string(line_no) + ": empty experiment label");
    }
    col_ids.emplace_back(header[i]);
  }
  const std::size_t m = col_ids.size();

  std::vector<std::string> row_ids;
  std::vector<double> values;
  LoadReport report;
  std::vector<double> row_values(m);
  while (next_line(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    ++report.data_lines;
    const auto fields = split_tabs(line);
    if (fields.size() != m + 1) {
      throw InputError(source + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(m + 1) + " fields, found " + std::to_string(fields.size()));
    }
    if (fields[0].empty()) throw InputError(source + ":" + std::to_string(line_no) + ": empty row id");
    bool complete = true;
    for (std::size_t c = 0; c < m; ++c) {
      const auto value = parse_number(fields[c + 1]);
      if (!value) {
        if (policy == MissingPolicy::reject) {
          throw InputError(source + ":" + std::to_string(line_no) + ": missing or non-numeric value '" +
                           std::string(fields[c + 1]) + "' at row " + std::string(fields[0]) +
                           ", column " + col_ids[c]);
        }
        complete = false;
        break;
      }
      row_values[c] = *value;
    }
    if (!complete) {
      report.dropped_rows.emplace_back(fields[0]);
      continue;
    }
    row_ids.emplace_back(fields[0]);
    values.insert(values.end(), row_values.begin(), row_values.end());
  }
  return {ExpressionMatrix(std::move(row_ids), std::move(col_ids), std::move(values)),
          std::move(report)};
}

LoadedMatrix load_matrix(const std::filesystem::path& path, MissingPolicy policy) {
  auto in = open_or_throw(path);
  return parse_matrix(in, policy, path.string());
}

void write_matrix(std::ostream& out, const ExpressionMatrix& matrix, std::string_view header_name) {
  out << header_name;
  for (const auto& c : matrix.col_ids()) out << '\t' << c;
  out << '\n';
  char buf[64];
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    out << matrix.row_ids()[r];
    for (const double v : matrix.row(r)) {
      const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
      out << '\t' << std::string_view(buf, static_cast<std::size_t>(end - buf));
    }
    out << '\n';
  }
}

IdMap parse_probe_map(std::istream& in, const std::string& source) {
  IdMap map;
  for_each_record(in, source, 2, [&](const auto& f) {
    const auto [it, inserted] = map.emplace(std::string(f[0]), std::string(f[1]));
    if (!inserted && it->second != f[1]) {
      throw InputError(source + ": probe " + it->first + " mapped to both " + it->second +
                       " and " + std::string(f[1]));
    }
  });
  return map;
}

IdSetMap parse_annotations(std::istream& in, const std::string& source) {
  IdSetMap map;
  for_each_record(in, source, 3, [&](const auto& f) {
    map[std::string(f[0])].insert(std::string(f[1]) + ":" + std::string(f[2]));
  });
  return map;
}

IdSet parse_negatives(std::istream& in, const std::string& source) {
  IdSet set;
  for_each_record(in, source, 1, [&](const auto& f) { set.emplace(f[0]); });
  return set;
}

IdSetMap parse_label_sets(std::istream& in, const std::string& source) {
  IdSetMap map;
  for_each_record(in, source, 2,
                  [&](const auto& f) { map[std::string(f[0])].emplace(f[1]); });
  return map;
}

IdMap load_probe_map(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return parse_probe_map(in, path.string());
}

IdSetMap load_annotations(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return parse_annotations(in, path.string());
}

IdSet load_negatives(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return parse_negatives(in, path.string());
}

IdSetMap load_label_sets(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return parse_label_sets(in, path.string());
}

std::vector<std::string> unmatched_ids(const std::vector<std::string>& ids,
                                       std::span<const std::string> known) {
  std::unordered_set<std::string_view> lookup(known.begin(), known.end());
  std::vector<std::string> missing;
  for (const auto& id : ids) {
    if (!lookup.contains(id)) missing.push_back(id);
  }
  std::sort(missing.begin(), missing.end());
  missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
  return missing;
}

}  // namespace kiwi
