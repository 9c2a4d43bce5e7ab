#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "kiwi/cluster_io.hpp"
#include "kiwi/evalsuite.hpp"
#include "kiwi/matrix_io.hpp"
#include "kiwi/miner.hpp"
#include "kiwi/oracle.hpp"
#include "kiwi/rng.hpp"
#include "kiwi/sequencer.hpp"
#include "kiwi/synthgen.hpp"

namespace {

constexpr const char* version = "0.3.0";

std::string invocation;

class CliError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Every artifact is written to a sibling temp file and renamed into place only
// after the whole command has succeeded.
class Outputs {
public:
  std::ostream& open(const std::string& path, std::optional<std::uint64_t> seed) {
    if (path.empty() || path == "-") {
      stdout_.emplace_back(std::make_unique<std::ostringstream>());
      header(*stdout_.back(), seed);
      return *stdout_.back();
    }
    Pending p;
    p.target = path;
    p.temp = path + ".partial";
    p.stream = std::make_unique<std::ofstream>(p.temp, std::ios::binary | std::ios::trunc);
    if (!*p.stream) throw CliError("cannot write " + path);
    header(*p.stream, seed);
    pending_.push_back(std::move(p));
    return *pending_.back().stream;
  }

  void commit() {
    for (auto& p : pending_) {
      p.stream->flush();
      if (!*p.stream) throw CliError("write failed for " + p.target);
      p.stream->close();
    }
    for (auto& p : pending_) {
      std::error_code ec;
      std::filesystem::rename(p.temp, p.target, ec);
      if (ec) throw CliError("cannot move " + p.temp + " to " + p.target + ": " + ec.message());
    }
    pending_.clear();
    for (const auto& s : stdout_) std::cout << s->str();
    std::cout.flush();
    if (!std::cout) throw CliError("write failed for standard output");
  }

  ~Outputs() {
    for (auto& p : pending_) {
      p.stream.reset();
      std::error_code ec;
      std::filesystem::remove(p.temp, ec);
    }
  }

private:
  static void header(std::ostream& out, std::optional<std::uint64_t> seed) {
    out << "# kiwi " << version << '\n' << "# command: " << invocation << '\n' << "# seed: ";
    if (seed) out << *seed;
    else out << "none";
    out << '\n';
  }

  struct Pending {
    std::string target;
    std::string temp;
    std::unique_ptr<std::ofstream> stream;
  };
  std::vector<Pending> pending_;
  std::vector<std::unique_ptr<std::ostringstream>> stdout_;
};

kiwi::MissingPolicy parse_missing(const std::string& s) {
  if (s == "reject") return kiwi::MissingPolicy::reject;
  if (s == "drop_rows") return kiwi::MissingPolicy::drop_rows;
  throw CliError("--missing must be 'reject' or 'drop_rows'");
}

kiwi::LoadedMatrix load_input(const std::string& path, const std::string& missing) {
  auto loaded = kiwi::load_matrix(path, parse_missing(missing));
  if (!loaded.report.dropped_rows.empty()) {
    std::cerr << "kiwi: dropped " << loaded.report.dropped_rows.size()
              << " rows with missing values\n";
  }
  return loaded;
}

struct MineArgs {
  std::string input, output, report, missing = "reject", direction = "both";
  std::size_t k = 1000, w = 10, min_genes = 2, min_exps = 2, spill_cap = 10'000'000;
  unsigned threads = 1;
};

void add_mine_flags(CLI::App* cmd, MineArgs& a, bool with_k) {
  cmd->add_option("--input", a.input, "expression matrix TSV")->required();
  if (with_k) cmd->add_option("--k", a.k, "patterns kept per level")->required();
  cmd->add_option("--w", a.w, "maximum position gap")->required();
  cmd->add_option("--min-genes", a.min_genes, "minimum supporting rows")->required();
  cmd->add_option("--min-exps", a.min_exps, "minimum pattern length")->required();
  cmd->add_option("--direction", a.direction, "forward or both");
  cmd->add_option("--missing", a.missing, "reject or drop_rows");
  cmd->add_option("--output", a.output, "cluster TSV")->required();
  cmd->add_option("--report", a.report, "run report");
  if (with_k) {
    cmd->add_option("--threads", a.threads, "worker threads");
    cmd->add_option("--spill-cap", a.spill_cap, "clusters held in memory before spilling");
  }
}

kiwi::MiningParams to_params(const MineArgs& a) {
  kiwi::MiningParams p;
  p.k = a.k;
  p.w = a.w;
  p.min_rows = a.min_genes;
  p.min_cols = a.min_exps;
  p.direction = kiwi::parse_direction(a.direction);
  p.threads = a.threads;
  p.spill_cap = a.spill_cap;
  return p;
}

void run_cluster(const MineArgs& a, bool exact) {
  const auto loaded = load_input(a.input, a.missing);
  const auto& m = loaded.matrix;
  auto params = to_params(a);
  params.validate(m.cols());
  const kiwi::SequenceDatabase db(m);
  Outputs outputs;
  if (exact) {
    const auto clusters = kiwi::exact_mine(db, params);
    kiwi::write_clusters(outputs.open(a.output, std::nullopt), clusters, m.row_ids(), m.col_ids());
    if (!a.report.empty()) {
      auto& r = outputs.open(a.report, std::nullopt);
      r << "matrix\t" << m.rows() << " rows x " << m.cols() << " columns\n"
        << "tuples\t" << kiwi::ordered_tuple_count(m.cols(), params.min_cols) << '\n'
        << "clusters\t" << clusters.size() << '\n';
    }
  } else {
    const auto result = kiwi::mine(db, params);
    kiwi::write_clusters(outputs.open(a.output, std::nullopt), result.clusters, m.row_ids(), m.col_ids());
    if (!a.report.empty()) {
      auto& r = outputs.open(a.report, std::nullopt);
      kiwi::write_report(r, result.report);
      for (const auto& id : loaded.report.dropped_rows) r << "dropped_row\t" << id << '\n';
    }
  }
  outputs.commit();
}

// Cluster file plus the row/column universes used for random sampling.
struct Universe {
  kiwi::ClusterFile file;
  std::optional<kiwi::ExpressionMatrix> matrix;
};

Universe load_universe(const std::string& clusters, const std::string& input) {
  Universe u;
  if (!input.empty()) {
    u.matrix = kiwi::load_matrix(input).matrix;
    u.file = kiwi::load_clusters(clusters, &*u.matrix);
  } else {
    u.file = kiwi::load_clusters(clusters);
  }
  return u;
}

template <class Map>
std::vector<std::string> keys(const Map& m) {
  std::vector<std::string> out;
  for (const auto& [k, v] : m) out.push_back(k);
  return out;
}

void add_eval_io(CLI::App* cmd, std::string& clusters, std::string& input, std::string& output) {
  cmd->add_option("--clusters", clusters, "cluster TSV")->required();
  cmd->add_option("--input", input, "matrix defining the row and column universe");
  cmd->add_option("--output", output, "report path (standard output if absent)");
}

int run(int argc, char** argv) {
  for (int i = 0; i < argc; ++i) {
    if (i) invocation += ' ';
    invocation += argv[i];
  }

  CLI::App app{"Order-preserving subspace clustering of expression matrices"};
  app.set_version_flag("--version", version);
  app.require_subcommand(1);

  MineArgs cluster_args;
  auto* cluster = app.add_subcommand("cluster", "top-k beam search for OPSM/GOPSM clusters");
  add_mine_flags(cluster, cluster_args, true);

  MineArgs oracle_args;
  auto* oracle = app.add_subcommand("oracle", "exhaustive enumeration for small matrices");
  add_mine_flags(oracle, oracle_args, false);

  std::size_t synth_rows = 0, synth_cols = 0;
  std::uint64_t synth_seed = 0;
  double synth_sep = 1.0;
  std::vector<std::string> synth_plants;
  std::string synth_output, synth_manifest;
  auto* synth = app.add_subcommand("synth", "random matrix with planted clusters");
  synth->add_option("--rows", synth_rows)->required();
  synth->add_option("--cols", synth_cols)->required();
  synth->add_option("--seed", synth_seed)->required();
  synth->add_option("--plant", synth_plants, "rows=..;cols=..;reversed=.. (0-based, repeatable)");
  synth->add_option("--sep", synth_sep, "planted ramp step");
  synth->add_option("--output", synth_output)->required();
  synth->add_option("--manifest", synth_manifest);

  std::string sum_clusters, sum_input, sum_density, sum_output;
  auto* summarize = app.add_subcommand("summarize", "cluster size statistics and density table");
  summarize->add_option("--clusters", sum_clusters)->required();
  summarize->add_option("--input", sum_input)->required();
  summarize->add_option("--density", sum_density, "density CSV");
  summarize->add_option("--output", sum_output, "summary path (standard output if absent)");

  std::string ep_clusters, ep_input, ep_output, ep_map;
  std::size_t ep_perm = 0;
  std::uint64_t ep_seed = 0;
  auto* probes = app.add_subcommand("eval-probes", "redundant probe pairs against random clusters");
  add_eval_io(probes, ep_clusters, ep_input, ep_output);
  probes->add_option("--probe-map", ep_map)->required();
  probes->add_option("--permutations", ep_perm)->required();
  probes->add_option("--seed", ep_seed)->required();

  std::string ea_clusters, ea_input, ea_output, ea_annotations, ea_category, ea_scope = "cluster";
  kiwi::eval::EnrichmentOptions ea_opt;
  auto* annotations = app.add_subcommand("eval-annotations", "experiment annotation enrichment");
  add_eval_io(annotations, ea_clusters, ea_input, ea_output);
  annotations->add_option("--annotations", ea_annotations)->required();
  annotations->add_option("--category", ea_category, "only test terms of this category");
  annotations->add_option("--min-genes", ea_opt.min_genes);
  annotations->add_option("--min-exps", ea_opt.min_exps);
  annotations->add_option("--bh-scope", ea_scope, "cluster or global");
  annotations->add_option("--seed", ea_opt.seed, "seed for the matched random clusters")->required();

  std::string en_clusters, en_input, en_output, en_negatives;
  std::size_t en_perm = 0;
  std::uint64_t en_seed = 0;
  auto* negatives = app.add_subcommand("eval-negatives", "negative-control contamination");
  add_eval_io(negatives, en_clusters, en_input, en_output);
  negatives->add_option("--negatives", en_negatives)->required();
  negatives->add_option("--permutations", en_perm)->required();
  negatives->add_option("--seed", en_seed)->required();

  std::string es_clusters, es_input, es_output, es_labels;
  std::size_t es_random = 0;
  std::uint64_t es_seed = 0;
  auto* similarity = app.add_subcommand("eval-similarity", "promoter label similarity");
  add_eval_io(similarity, es_clusters, es_input, es_output);
  similarity->add_option("--labels", es_labels)->required();
  similarity->add_option("--random", es_random, "random cluster sets")->required();
  similarity->add_option("--seed", es_seed)->required();

  std::string sq_input, sq_output, sq_missing = "reject";
  auto* sequences = app.add_subcommand("sequences", "dump each row's ascending column order");
  sequences->add_option("--input", sq_input)->required();
  sequences->add_option("--missing", sq_missing);
  sequences->add_option("--output", sq_output);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "kiwi: " << e.what() << '\n';
    return 2;
  }

  if (cluster->parsed()) {
    run_cluster(cluster_args, false);
  } else if (oracle->parsed()) {
    run_cluster(oracle_args, true);
  } else if (synth->parsed()) {
    std::vector<kiwi::Plant> plants;
    for (const auto& p : synth_plants) plants.push_back(kiwi::parse_plant(p));
    const auto m = kiwi::plant_opsm(kiwi::random_matrix(synth_rows, synth_cols, synth_seed), plants, synth_sep);
    Outputs outputs;
    kiwi::write_matrix(outputs.open(synth_output, synth_seed), m);
    if (!synth_manifest.empty()) kiwi::write_manifest(outputs.open(synth_manifest, synth_seed), m, plants);
    outputs.commit();
  } else if (summarize->parsed()) {
    const auto m = kiwi::load_matrix(sum_input).matrix;
    const auto file = kiwi::load_clusters(sum_clusters, &m);
    const auto s = kiwi::eval::summarize(file.clusters, m);
    Outputs outputs;
    kiwi::eval::write_summary(outputs.open(sum_output, std::nullopt), s);
    if (!sum_density.empty()) kiwi::eval::write_density_csv(outputs.open(sum_density, std::nullopt), s);
    outputs.commit();
  } else if (probes->parsed()) {
    auto u = load_universe(ep_clusters, ep_input);
    const auto map = kiwi::load_probe_map(ep_map);
    if (!u.matrix) kiwi::extend_universe(u.file.row_ids, keys(map));
    const auto rep = kiwi::eval::redundant_probe_analysis(u.file.clusters, u.file.row_ids,
                                                          u.file.col_ids.size(), map, ep_perm, ep_seed);
    Outputs outputs;
    kiwi::eval::write_probe_report(outputs.open(ep_output, ep_seed), rep);
    outputs.commit();
  } else if (annotations->parsed()) {
    auto u = load_universe(ea_clusters, ea_input);
    const auto ann = kiwi::load_annotations(ea_annotations);
    if (!u.matrix) kiwi::extend_universe(u.file.col_ids, keys(ann));
    if (!ea_category.empty()) ea_opt.category = ea_category;
    if (ea_scope == "cluster") ea_opt.bh_scope = kiwi::eval::BhScope::cluster;
    else if (ea_scope == "global") ea_opt.bh_scope = kiwi::eval::BhScope::global;
    else throw CliError("--bh-scope must be 'cluster' or 'global'");
    const auto rep = kiwi::eval::annotation_enrichment(u.file.clusters, u.file.col_ids,
                                                       u.file.row_ids.size(), ann, ea_opt);
    Outputs outputs;
    kiwi::eval::write_enrichment_report(outputs.open(ea_output, ea_opt.seed), rep);
    outputs.commit();
  } else if (negatives->parsed()) {
    auto u = load_universe(en_clusters, en_input);
    const auto neg = kiwi::load_negatives(en_negatives);
    if (!u.matrix) kiwi::extend_universe(u.file.row_ids, {neg.begin(), neg.end()});
    const auto rep = kiwi::eval::negative_control_analysis(u.file.clusters, u.file.row_ids,
                                                           u.file.col_ids.size(), neg, en_perm, en_seed);
    if (!rep.unmatched.empty()) {
      std::cerr << "kiwi: " << rep.unmatched.size() << " negatives are not rows of the matrix\n";
    }
    Outputs outputs;
    kiwi::eval::write_negative_report(outputs.open(en_output, en_seed), rep);
    outputs.commit();
  } else if (similarity->parsed()) {
    auto u = load_universe(es_clusters, es_input);
    const auto labels = kiwi::load_label_sets(es_labels);
    if (!u.matrix) kiwi::extend_universe(u.file.row_ids, keys(labels));
    const auto rep = kiwi::eval::promoter_similarity(u.file.clusters, u.file.row_ids,
                                                     u.file.col_ids.size(), labels, es_random, es_seed);
    if (!rep.skipped.empty()) {
      std::cerr << "kiwi: skipped " << rep.skipped.size() << " clusters with fewer than 2 genes\n";
    }
    Outputs outputs;
    kiwi::eval::write_similarity_report(outputs.open(es_output, es_seed), rep);
    outputs.commit();
  } else if (sequences->parsed()) {
    const auto loaded = load_input(sq_input, sq_missing);
    const auto& m = loaded.matrix;
    const kiwi::SequenceDatabase db(m);
    Outputs outputs;
    auto& out = outputs.open(sq_output, std::nullopt);
    out << "row\tties\tsequence\n";
    for (std::size_t r = 0; r < db.rows(); ++r) {
      out << m.row_ids()[r] << '\t' << db.tie_count(r) << '\t';
      const auto s = db.seq(r);
      for (std::size_t i = 0; i < s.size(); ++i) out << (i ? "," : "") << m.col_ids()[s[i]];
      out << '\n';
    }
    outputs.commit();
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "kiwi: " << e.what() << '\n';
    return 1;
  }
}
