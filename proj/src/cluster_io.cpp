#include "kiwi/cluster_io.hpp"

#include <charconv>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

namespace kiwi {

void write_clusters(std::ostream& out, std::span<const Cluster> clusters,
                    std::span<const std::string> row_ids, std::span<const std::string> col_ids) {
  out << "#cluster_id\tn_genes\tn_exps\tanti_correlated\tpattern\tgenes\n";
  for (const auto& c : clusters) {
    out << c.id << '\t' << c.support() << '\t' << c.pattern.size() << '\t'
        << (c.anti_correlated ? 1 : 0) << '\t';
    for (std::size_t i = 0; i < c.pattern.size(); ++i) {
      if (i) out << ',';
      out << col_ids[c.pattern[i]];
    }
    out << '\t';
    for (std::size_t i = 0; i < c.supporters.size(); ++i) {
      if (i) out << ',';
      out << row_ids[c.supporters[i].row] << ':' << sign(c.supporters[i].orientation);
    }
    out << '\n';
  }
}

namespace {

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto at = text.find(sep, start);
    out.push_back(text.substr(start, at == std::string_view::npos ? std::string_view::npos : at - start));
    if (at == std::string_view::npos) return out;
    start = at + 1;
  }
}

std::size_t parse_count(std::string_view text, const std::string& where) {
  std::size_t v = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc{} || end != text.data() + text.size()) {
    throw InputError(where + ": expected a non-negative integer, got '" + std::string(text) + "'");
  }
  return v;
}

class Resolver {
public:
  Resolver(std::vector<std::string>& ids, bool fixed) : ids_(ids), fixed_(fixed) {
    for (std::size_t i = 0; i < ids_.size(); ++i) index_.emplace(ids_[i], i);
  }

  std::uint32_t operator()(std::string_view id, const std::string& where) {
    if (auto it = index_.find(std::string(id)); it != index_.end()) {
      return static_cast<std::uint32_t>(it->second);
    }
    if (fixed_) throw InputError(where + ": unknown id '" + std::string(id) + "'");
    ids_.emplace_back(id);
    index_.emplace(ids_.back(), ids_.size() - 1);
    return static_cast<std::uint32_t>(ids_.size() - 1);
  }

private:
  std::vector<std::string>& ids_;
  bool fixed_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace

ClusterFile parse_clusters(std::istream& in, const ExpressionMatrix* matrix, const std::string& source) {
  ClusterFile file;
  if (matrix) {
    file.row_ids = matrix->row_ids();
    file.col_ids = matrix->col_ids();
  }
  Resolver rows(file.row_ids, matrix != nullptr);
  Resolver cols(file.col_ids, matrix != nullptr);

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const std::string where = source + ":" + std::to_string(line_no);
    const auto f = split(line, '\t');
    if (f.size() != 6) throw InputError(where + ": expected 6 tab-separated fields");
    Cluster c;
    c.id = parse_count(f[0], where);
    const std::size_t n_genes = parse_count(f[1], where);
    const std::size_t n_exps = parse_count(f[2], where);
    if (f[3] != "0" && f[3] != "1") throw InputError(where + ": anti_correlated must be 0 or 1");
    c.anti_correlated = f[3] == "1";
    for (const auto label : split(f[4], ',')) c.pattern.push_back(cols(label, where));
    for (const auto gene : split(f[5], ',')) {
      if (gene.size() < 3 || gene[gene.size() - 2] != ':' ||
          (gene.back() != '+' && gene.back() != '-')) {
        throw InputError(where + ": supporter '" + std::string(gene) + "' is not row_id:+ or row_id:-");
      }
      OrientedSupport s;
      s.row = rows(gene.substr(0, gene.size() - 2), where);
      s.orientation = gene.back() == '+' ? Orientation::forward : Orientation::backward;
      c.supporters.push_back(s);
    }
    if (c.supporters.size() != n_genes || c.pattern.size() != n_exps) {
      throw InputError(where + ": n_genes/n_exps disagree with the listed genes/pattern");
    }
    std::unordered_set<std::uint32_t> seen;
    for (const auto col : c.pattern) {
      if (!seen.insert(col).second) throw InputError(where + ": pattern repeats an experiment");
    }
    file.clusters.push_back(std::move(c));
  }
  return file;
}

ClusterFile load_clusters(const std::filesystem::path& path, const ExpressionMatrix* matrix) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  return parse_clusters(in, matrix, path.string());
}

void extend_universe(std::vector<std::string>& universe, const std::vector<std::string>& ids) {
  std::unordered_set<std::string> have(universe.begin(), universe.end());
  for (const auto& id : ids) {
    if (have.insert(id).second) universe.push_back(id);
  }
}

}  // namespace kiwi
