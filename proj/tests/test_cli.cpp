#include <catch_amalgamated.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const char* cli_path() { return VBPOMDP_CLI_PATH; }

int run(const std::string& args) {
  const std::string cmd = std::string(cli_path()) + " " + args + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Drops the trailing millis-style column so timing noise does not defeat
/// byte comparisons of otherwise deterministic data.
std::string strip_column(const std::string& csv, int column) {
  std::stringstream out;
  std::stringstream in(csv);
  std::string line;
  while (std::getline(in, line)) {
    std::stringstream fields(line);
    std::string field;
    int i = 0;
    bool first = true;
    while (std::getline(fields, field, ',')) {
      if (i++ == column) continue;
      out << (first ? "" : ",") << field;
      first = false;
    }
    out << "\n";
  }
  return out.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "vbpomdp_cli_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("cli rejects bad invocations with exit code 2", "[cli]") {
  REQUIRE(run("frobnicate") == 2);
  REQUIRE(run("solve") == 2);                                  // missing required --scenario
  REQUIRE(run("solve --scenario no-such-scenario") == 2);      // unknown name / missing file
  REQUIRE(run("simulate --scenario colinear") == 2);           // nothing to simulate
  REQUIRE(run("solve --scenario /tmp/definitely-missing-vbpomdp.json") == 2);
}

TEST_CASE("solve then simulate round trip", "[cli][slow]") {
  const fs::path dir = fresh_dir("roundtrip");
  const std::string solve_args = "solve --scenario colinear --rounds 2 --beliefs 3 --seed 7 --alpha-target 30 --out " +
                                 dir.string();
  REQUIRE(run(solve_args) == 0);
  REQUIRE(fs::exists(dir / "policy.json"));
  REQUIRE(fs::exists(dir / "solve_log.csv"));
  const std::string log = slurp(dir / "solve_log.csv");
  REQUIRE(log.rfind("round,alphaCount,meanValue,millis", 0) == 0);

  const fs::path sim_dir = fresh_dir("roundtrip_sim");
  const std::string sim_args = "simulate --scenario colinear --policy " + (dir / "policy.json").string() +
                               " --baselines greedy --episodes 3 --seed 7 --out " + sim_dir.string();
  REQUIRE(run(sim_args) == 0);
  REQUIRE(fs::exists(sim_dir / "batch.csv"));
  REQUIRE(fs::exists(sim_dir / "summary.json"));
  const std::string batch = slurp(sim_dir / "batch.csv");
  REQUIRE(batch.rfind("scenario,policy,episode,seed,totalReward,caught,stepsToCatch", 0) == 0);
  REQUIRE(batch.find("colinear,vb,0,") != std::string::npos);
  REQUIRE(batch.find("colinear,greedy,") != std::string::npos);
}

TEST_CASE("identical flags and seed reproduce identical data", "[cli][slow]") {
  const fs::path a = fresh_dir("repro_a");
  const fs::path b = fresh_dir("repro_b");
  for (const auto& dir : {a, b}) {
    REQUIRE(run("solve --scenario colinear --rounds 2 --beliefs 2 --seed 11 --alpha-target 25 --out " + dir.string()) ==
            0);
  }
  REQUIRE(slurp(a / "policy.json") == slurp(b / "policy.json"));
  // solve-log data rows are identical once the wall-time column is dropped
  REQUIRE(strip_column(slurp(a / "solve_log.csv"), 3) == strip_column(slurp(b / "solve_log.csv"), 3));
}

TEST_CASE("vb-check emits its table and a clean exit", "[cli]") {
  const fs::path dir = fresh_dir("vbcheck");
  REQUIRE(run("vb-check --cases 12 --seed 3 --out " + dir.string()) == 0);
  const std::string csv = slurp(dir / "vb_check.csv");
  REQUIRE(csv.rfind("case,C_quadrature,C_hat,gap,iterations", 0) == 0);
  int lines = 0;
  for (char c : csv) lines += c == '\n';
  REQUIRE(lines == 13);  // header + 12 cases
}

TEST_CASE("condense-bench sweeps metrics", "[cli][slow]") {
  const fs::path dir = fresh_dir("bench");
  REQUIRE(run("condense-bench --dims 1 --sizes 60 --targets 8 --repeats 1 --seed 5 --out " + dir.string()) == 0);
  const std::string csv = slurp(dir / "condense_bench.csv");
  REQUIRE(csv.rfind("dimension,M,Mtilde,K,metric,nisd,millis,seed", 0) == 0);
  for (const char* metric : {"runnalls", "euclidean", "symKL", "jsd", "wasserstein2", "bhattacharyya"})
    REQUIRE(csv.find(metric) != std::string::npos);
}
