#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string err;
};

fs::path scratch() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("kiwi_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

Run kiwi(const std::string& args) {
  const auto err = scratch() / "stderr.txt";
  const std::string cmd = std::string(KIWI_CLI_PATH) + " " + args + " 2> " + err.string() + " > " +
                          (scratch() / "stdout.txt").string();
  const int status = std::system(cmd.c_str());
  std::ifstream in(err);
  std::stringstream ss;
  ss << in.rdbuf();
  return {WEXITSTATUS(status), ss.str()};
}

std::string read(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string body(const std::string& text) {
  std::istringstream in(text);
  std::string line, out;
  while (std::getline(in, line)) {
    if (line.rfind("# ", 0) != 0) out += line + "\n";
  }
  return out;
}

std::string path(const std::string& name) { return (scratch() / name).string(); }

void write(const std::string& name, const std::string& text) { std::ofstream(path(name)) << text; }

}  // namespace

TEST_CASE("cluster on the three-row example") {
  write("three.tsv", "gene\tA\tB\tC\tD\ng1\t1\t2\t3\t4\ng2\t2\t1\t4\t3\ng3\t4\t3\t2\t1\n");
  const auto r = kiwi("cluster --input " + path("three.tsv") +
                      " --k 100 --w 4 --min-genes 2 --min-exps 2 --direction both --output " +
                      path("three_c.tsv") + " --report " + path("three_r.txt"));
  REQUIRE(r.code == 0);
  const auto out = read(path("three_c.tsv"));
  CHECK(out.rfind("# kiwi ", 0) == 0);
  CHECK(out.find("# command: ") != std::string::npos);
  CHECK(out.find("--min-exps 2") != std::string::npos);
  CHECK(out.find("\t3\t2\t1\tA,C\tg1:+,g2:+,g3:-\n") != std::string::npos);
  CHECK(out.find("1\t2\t4\t1\tA,B,C,D\tg1:+,g3:-\n") != std::string::npos);
  CHECK(read(path("three_r.txt")).find("clusters\t7") != std::string::npos);

  const auto o = kiwi("oracle --input " + path("three.tsv") +
                      " --w 4 --min-genes 2 --min-exps 2 --output " + path("three_o.tsv"));
  REQUIRE(o.code == 0);
  CHECK(body(read(path("three_o.tsv"))) == body(out));
}

TEST_CASE("w = 0 is rejected with a one-line diagnostic and no output") {
  write("three.tsv", "gene\tA\tB\tC\tD\ng1\t1\t2\t3\t4\ng2\t2\t1\t4\t3\ng3\t4\t3\t2\t1\n");
  fs::remove(path("w0.tsv"));
  const auto r = kiwi("cluster --input " + path("three.tsv") +
                      " --k 100 --w 0 --min-genes 2 --min-exps 2 --output " + path("w0.tsv"));
  CHECK(r.code != 0);
  CHECK(r.err.find("w must be in [1, m]") != std::string::npos);
  CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);
  CHECK(!fs::exists(path("w0.tsv")));
  CHECK(!fs::exists(path("w0.tsv.partial")));
}

TEST_CASE("usage and input errors exit nonzero") {
  CHECK(kiwi("cluster --bogus 1").code != 0);
  CHECK(kiwi("").code != 0);
  const auto missing = kiwi("cluster --input /nonexistent.tsv --k 1 --w 1 --min-genes 2 --min-exps 2 --output " +
                            path("x.tsv"));
  CHECK(missing.code != 0);
  CHECK(std::count(missing.err.begin(), missing.err.end(), '\n') == 1);
  write("na.tsv", "gene\ta\tb\tc\ng1\t1\t2\t3\ng2\tNA\t1\t2\ng3\t3\t2\t1\n");
  const auto na = kiwi("cluster --input " + path("na.tsv") +
                       " --k 5 --w 2 --min-genes 2 --min-exps 2 --output " + path("na_c.tsv"));
  CHECK(na.code != 0);
  CHECK(na.err.find("g2") != std::string::npos);
  CHECK(kiwi("cluster --input " + path("na.tsv") + " --missing drop_rows --k 5 --w 2 --min-genes 2 --min-exps 2 --output " +
             path("na_c.tsv")).code == 0);
  CHECK(kiwi("cluster --input " + path("na.tsv") + " --direction sideways --k 5 --w 2 --min-genes 2 --min-exps 2 --output " +
             path("na_c.tsv")).code != 0);
}

TEST_CASE("synth is deterministic and threads do not change the clusters") {
  const std::string plant = " --plant 'rows=0,1,2,3;cols=5,2,7,1;reversed=3'";
  REQUIRE(kiwi("synth --rows 60 --cols 10 --seed 7" + plant + " --output " + path("s1.tsv") +
               " --manifest " + path("s1_m.tsv")).code == 0);
  REQUIRE(kiwi("synth --rows 60 --cols 10 --seed 7" + plant + " --output " + path("s2.tsv")).code == 0);
  CHECK(body(read(path("s1.tsv"))) == body(read(path("s2.tsv"))));
  CHECK(read(path("s1.tsv")).find("# seed: 7") != std::string::npos);
  CHECK(body(read(path("s1_m.tsv"))) == "plant\trows\tcols\treversed\n1\tg1,g2,g3,g4\te6,e3,e8,e2\tg4\n");

  const std::string common = "cluster --input " + path("s1.tsv") + " --k 200 --w 5 --min-genes 2 --min-exps 3 --output ";
  REQUIRE(kiwi(common + path("t1.tsv") + " --threads 1").code == 0);
  REQUIRE(kiwi(common + path("t4.tsv") + " --threads 4 --spill-cap 3").code == 0);
  CHECK(body(read(path("t1.tsv"))) == body(read(path("t4.tsv"))));
  CHECK(read(path("t1.tsv")).find("\te2,e8,e3,e6\tg1:-,g2:-,g3:-,g4:+,") != std::string::npos);
}

TEST_CASE("evaluation subcommands") {
  REQUIRE(kiwi("synth --rows 40 --cols 8 --seed 3 --plant 'rows=0,1,2;cols=0,1,2,3' --output " +
               path("e.tsv")).code == 0);
  REQUIRE(kiwi("cluster --input " + path("e.tsv") + " --k 50 --w 3 --min-genes 2 --min-exps 3 --output " +
               path("e_c.tsv")).code == 0);
  write("probes.tsv", "g1\tGENE_A\ng2\tGENE_A\ng3\tGENE_B\n");
  write("neg.txt", "g30\ng31\ng32\n");
  write("labels.tsv", "g1\tSp1\ng2\tSp1\ng3\tSp1\ng4\tTBP\n");
  std::string ann;
  for (int c = 1; c <= 8; ++c) ann += "e" + std::to_string(c) + "\ttissue\t" + (c <= 4 ? "lung" : "liver") + "\n";
  write("ann.tsv", ann);
  const std::string base = " --clusters " + path("e_c.tsv") + " --input " + path("e.tsv");

  CHECK(kiwi("summarize" + base + " --density " + path("d.csv") + " --output " + path("sum.txt")).code == 0);
  CHECK(body(read(path("d.csv"))).rfind("n_genes,n_exps,count\n", 0) == 0);
  CHECK(kiwi("eval-probes" + base + " --probe-map " + path("probes.tsv") +
             " --permutations 50 --seed 1 --output " + path("p.txt")).code == 0);
  CHECK(read(path("p.txt")).find("# seed: 1") != std::string::npos);
  CHECK(kiwi("eval-negatives" + base + " --negatives " + path("neg.txt") +
             " --permutations 50 --seed 2 --output " + path("n.txt")).code == 0);
  CHECK(read(path("n.txt")).find("mean_negative_fraction") != std::string::npos);
  CHECK(kiwi("eval-similarity" + base + " --labels " + path("labels.tsv") +
             " --random 20 --seed 3 --output " + path("sim.txt")).code == 0);
  CHECK(kiwi("eval-annotations" + base + " --annotations " + path("ann.tsv") +
             " --min-exps 3 --category tissue --bh-scope global --seed 4 --output " + path("a.txt")).code == 0);
  CHECK(read(path("a.txt")).find("# bh_scope\tglobal") != std::string::npos);
  // randomized subcommands need an explicit seed
  CHECK(kiwi("eval-negatives" + base + " --negatives " + path("neg.txt") + " --permutations 5").code != 0);
  CHECK(kiwi("eval-annotations" + base + " --annotations " + path("ann.tsv")).code != 0);
  // without --input the universe comes from the files themselves
  CHECK(kiwi("eval-negatives --clusters " + path("e_c.tsv") + " --negatives " + path("neg.txt") +
             " --permutations 5 --seed 1").code == 0);
  CHECK(kiwi("sequences --input " + path("e.tsv") + " --output " + path("seq.txt")).code == 0);
  CHECK(body(read(path("seq.txt"))).find("g1\t0\t") != std::string::npos);
}
