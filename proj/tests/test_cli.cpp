#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "padyn/cli.hpp"

using namespace padyn;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream is(text);
  std::string line;
  bool header = true;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string c;
    while (std::getline(ls, c, ',')) cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

std::filesystem::path temp_file(const std::string& name) { return std::filesystem::temp_directory_path() / name; }

}  // namespace

TEST_CASE("orbit scan of the Hénon pair") {
  const Run r = run({"orbits", "scan", "--group", "bgs-henon", "--pmin", "3", "--pmax", "60"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("p,level,orbit_count,max_orbit,fixed_points,ratio,seconds\n") != std::string::npos);
  const auto rows = csv_rows(r.out);
  CHECK(rows.size() == 16);
  for (const auto& row : rows) CHECK(row[2] == (row[0] == "5" ? "2" : "1"));
  CHECK(r.out.find("# group=bgs-henon") != std::string::npos);
}

TEST_CASE("parallel scans are byte-identical") {
  const std::vector<std::string> base{"orbits", "scan", "--group", "bgs-henon", "--pmin", "3", "--pmax", "80"};
  auto par = base;
  par.insert(par.end(), {"--workers", "4"});
  CHECK(run(base).out == run(par).out);
  const Run ratio1 = run({"orbits", "ratio", "--map", "bgs-henon:g1", "--pmax", "60"});
  const Run ratio3 = run({"orbits", "ratio", "--map", "bgs-henon:g1", "--pmax", "60", "--workers", "3"});
  REQUIRE(ratio1.code == 0);
  CHECK(ratio1.out == ratio3.out);
}

TEST_CASE("flow dump of a translation") {
  const Run r = run({"flow", "--map", "elem:x+9", "--p", "3", "--prec", "5"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("c=2\n") != std::string::npos);
  CHECK(r.out.find("\n0: 9\n") != std::string::npos);
  const Run pt = run({"flow", "--map", "elem:x+9", "--p", "3", "--prec", "5", "--point", "1", "--times", "1,2,-1"});
  REQUIRE(pt.code == 0);
  CHECK(pt.out.find("1,10,5\n") != std::string::npos);
  CHECK(pt.out.find("2,19,5\n") != std::string::npos);
  CHECK(pt.out.find("-1,235,5\n") != std::string::npos);
  CHECK(r.out.find("\ndelta_1:\n") != std::string::npos);
  CHECK(r.out.find("check,cases,failures,required_digits,min_digits\ninterpolation,84,0,5,5\ngroup_law,4,0,5,5\n"
                   "contraction,16,0,2,2\n") != std::string::npos);
  CHECK(run({"flow", "--map", "bgs-henon:g1", "--p", "3"}).code == 2);
  const Run dil = run({"flow", "--map", "map:10*x", "--p", "3", "--prec", "5"});
  REQUIRE(dil.code == 0);
  CHECK(dil.out.find("\n1: 90\n") != std::string::npos);
  CHECK(run({"flow", "--map", "map:x+x^2", "--p", "3"}).code == 2);
  CHECK(run({"flow", "--map", "map:x+9", "--p", "3", "--verify-points", "-1"}).code == 2);
}

TEST_CASE("walks are reproducible") {
  const std::vector<std::string> args{"markov", "walk", "--params", "0,0,0,20", "--p", "7", "--level", "2",
                                      "--steps", "100000", "--seed", "42"};
  const Run a = run(args), b = run(args);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out.find("# burn_in=10000 (default steps/10)") != std::string::npos);
  CHECK(a.out.find("residue_index,empirical_freq,reference_weight\n") != std::string::npos);
  const auto rows = csv_rows(a.out);
  CHECK(rows.size() == 3136);
  CHECK(rows.front()[2] == "1/3136");
  auto other = args;
  other.back() = "43";
  CHECK(run(other).out != a.out);
}

TEST_CASE("measure, escape and torus commands") {
  const Run m = run({"markov", "measure", "--params", "0,0,0,0", "--p", "3", "--level", "2", "--excise"});
  REQUIRE(m.code == 0);
  CHECK(m.out.find("# excised=") != std::string::npos);
  CHECK(run({"markov", "measure", "--params", "0,0,0,0", "--p", "3", "--level", "2"}).code == 2);
  const Run inv = run({"markov", "measure", "--params", "0,0,0,20", "--p", "7", "--level", "1", "--start", "2,2,2"});
  REQUIRE(inv.code == 0);
  CHECK(inv.out.find("# invariant_s1=yes") != std::string::npos);

  // (1/3, d, 2/3) with d = -(1 + 4)/2 mod 9 = 2: 1/9 + 4 + 4/9 + 4/9 = 5 so D = 5.
  const Run e = run({"markov", "escape", "--params", "0,0,0,5", "--p", "3", "--start", "1/3,2,2/3", "--steps", "12"});
  REQUIRE(e.code == 0);
  CHECK(e.out.find("# bounded=no") != std::string::npos);
  CHECK(e.out.find("step,min_valuation,x,y,z\n0,-1,1/3,2,2/3\n") != std::string::npos);

  const Run t = run({"torus", "orbits", "--monomial", "monomial:2,1,1,1", "--p", "5", "--level", "2"});
  REQUIRE(t.code == 0);
  CHECK(csv_rows(t.out).size() == 1);
}

TEST_CASE("refinement output") {
  const Run r = run({"orbits", "refine", "--group", "bgs-henon", "--p", "7", "--level", "1"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("p,level,orbit_root,orbit_size,preimage_size,fiber_orbit_count,is_full_preimage\n7,1,0,49,2401,1,1\n") !=
        std::string::npos);
}

TEST_CASE("exit codes") {
  CHECK(run({}).code == 2);
  CHECK(run({"orbits", "scan"}).code == 2);
  CHECK(run({"orbits", "scan", "--group", "henon:5,a", "--p", "3"}).code == 2);
  CHECK(run({"orbits", "scan", "--group", "bgs-henon", "--p", "9"}).code == 2);
  CHECK(run({"orbits", "scan", "--group", "bgs-henon", "--p", "101", "--max-points", "1000"}).code == 3);
  CHECK(run({"--help"}).code == 0);
  CHECK(exit_code(ErrorKind::Budget) == 3);
  CHECK(exit_code(ErrorKind::PrecisionExhausted) == 3);
  CHECK(exit_code(ErrorKind::InternalInvariant) == 4);
  CHECK(exit_code(ErrorKind::Parse) == 2);
}

TEST_CASE("config files and output files") {
  const auto cfg = temp_file("padyn_test.cfg");
  const auto out = temp_file("padyn_test.csv");
  {
    std::ofstream f(cfg);
    f << "# scan settings\ngroup = bgs-henon\npmin=3\npmax=20\n";
  }
  const Run a = run({"orbits", "scan", "--config", cfg.string(), "--out", out.string()});
  REQUIRE(a.code == 0);
  CHECK(a.out.empty());
  std::ifstream in(out);
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(csv_rows(text).size() == 7);
  const Run b = run({"orbits", "scan", "--config", cfg.string(), "--pmax", "7"});
  REQUIRE(b.code == 0);
  CHECK(csv_rows(b.out).size() == 3);
  {
    std::ofstream f(cfg);
    f << "no equals sign\n";
  }
  CHECK(run({"orbits", "scan", "--config", cfg.string()}).code == 2);
  std::filesystem::remove(cfg);
  std::filesystem::remove(out);
}
