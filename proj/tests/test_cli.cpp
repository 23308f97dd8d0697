// CLI integration tests: drive the installed binary end to end.
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#define DOCTEST_CONFIG_IMPLEMENT
#include "doctest.h"

namespace {
std::string g_binary;

int run_cli(const std::string& args) {
  const std::string cmd = g_binary + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}
}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) g_binary = argv[argc - 1];
  doctest::Context ctx;
  ctx.applyCommandLine(argc - (argc > 1 ? 1 : 0), argv);
  return ctx.run();
}

TEST_CASE("invalid config key exits with code 2 and names the key") {
  write_file("/tmp/hel_bad.json", R"({"task": "bands", "frobnicate": 1})");
  CHECK(run_cli("--config /tmp/hel_bad.json") == 2);
}

TEST_CASE("missing task exits with code 2") {
  write_file("/tmp/hel_notask.json", R"({"workers": 1})");
  CHECK(run_cli("--config /tmp/hel_notask.json") == 2);
}

TEST_CASE("numerical failures exit with code 3") {
  // chern with mu inside a band -> GapClosed
  write_file("/tmp/hel_gap.json", R"({
    "task": "chern",
    "model": {"model": "haldane", "t1": 1.0, "t2": 0.5, "phi": 1.5707963267948966,
              "W": 0.0, "mu": 2.5, "L": 8, "boundary": "torus"},
    "out": "/tmp/hel_gap_out"
  })");
  CHECK(run_cli("--config /tmp/hel_gap.json") == 3);
}

TEST_CASE("chern task is deterministic byte for byte") {
  write_file("/tmp/hel_chern.json", R"({
    "task": "chern",
    "model": {"model": "haldane", "t1": 1.0, "t2": 0.5, "phi": 1.5707963267948966,
              "W": 0.0, "mu": 0.0, "L": 8, "spinful": true, "boundary": "torus"},
    "params": {"grid_n": 24},
    "out": "/tmp/hel_chern_out"
  })");
  REQUIRE(run_cli("--config /tmp/hel_chern.json") == 0);
  const std::string first = slurp("/tmp/hel_chern_out/chern.json");
  REQUIRE(run_cli("--config /tmp/hel_chern.json") == 0);
  const std::string second = slurp("/tmp/hel_chern_out/chern.json");
  CHECK(first == second);
  CHECK(first.find("\"C_per_spin\"") != std::string::npos);
  CHECK(first.find("config_hash") != std::string::npos);
}

TEST_CASE("subcommand form works and emits band artifacts") {
  write_file("/tmp/hel_bands.json", R"({
    "task": "bands",
    "model": {"model": "haldane", "t1": 1.0, "t2": 0.5, "phi": 1.5707963267948966,
              "W": 0.0, "mu": 0.0, "L": 6, "boundary": "cylinder"},
    "out": "/tmp/hel_bands_out"
  })");
  CHECK(run_cli("bands --config /tmp/hel_bands.json") == 0);
  const std::string csv = slurp("/tmp/hel_bands_out/bands.csv");
  CHECK(csv.find("k1,branch,energy") != std::string::npos);
  CHECK(csv.find("# version=") != std::string::npos);
}

TEST_CASE("refmodel task emits the closed-form report") {
  write_file("/tmp/hel_ref.json", R"({
    "task": "refmodel",
    "params": {"lambda_ref": 3.141592653589793, "v_ref": 1.0, "omega": 1},
    "out": "/tmp/hel_ref_out"
  })");
  REQUIRE(run_cli("--config /tmp/hel_ref.json") == 0);
  const std::string js = slurp("/tmp/hel_ref_out/refmodel.json");
  CHECK(js.find("\"tau\": 0.5") != std::string::npos);
  CHECK(js.find("\"v_c\": 3") != std::string::npos);
}

TEST_CASE("ward task reports roundoff-level residuals") {
  write_file("/tmp/hel_ward.json", R"({
    "task": "ward",
    "model": {"model": "haldane", "t1": 1.0, "t2": 0.5, "phi": 1.5707963267948966,
              "W": 0.0, "mu": 0.0, "L": 6, "boundary": "cylinder"},
    "params": {"beta": 6.0, "trials": 5},
    "seed": 11,
    "out": "/tmp/hel_ward_out"
  })");
  REQUIRE(run_cli("--config /tmp/hel_ward.json") == 0);
  const std::string js = slurp("/tmp/hel_ward_out/ward.json");
  const auto pos = js.find("\"worst_relative\": ");
  REQUIRE(pos != std::string::npos);
  const double worst = std::atof(js.c_str() + pos + 18);
  CHECK(worst < 1e-10);
}

TEST_CASE("rgtrees reports counts under the 4^n bound") {
  write_file("/tmp/hel_trees.json", R"({
    "task": "rgtrees",
    "params": {"n": 5, "h_root": -4},
    "out": "/tmp/hel_trees_out"
  })");
  REQUIRE(run_cli("rgtrees --config /tmp/hel_trees.json") == 0);
  const std::string js = slurp("/tmp/hel_trees_out/rgtrees.json");
  CHECK(js.find("\"shapes\": 45") != std::string::npos);
  CHECK(js.find("\"bound_4n\": 1024") != std::string::npos);
}

TEST_CASE("artifacts embed the config hash and re-parse cleanly") {
  write_file("/tmp/hel_rt.json", R"({
    "task": "rgtrees",
    "params": {"n": 3, "h_root": -3},
    "out": "/tmp/hel_rt_out"
  })");
  REQUIRE(run_cli("--config /tmp/hel_rt.json") == 0);
  const std::string js = slurp("/tmp/hel_rt_out/rgtrees.json");
  // the artifact is valid JSON whose meta carries a 16-hex-digit hash
  const auto pos = js.find("\"config_hash\": \"");
  REQUIRE(pos != std::string::npos);
  const std::string hash = js.substr(pos + 16, 16);
  CHECK(hash.find_first_not_of("0123456789abcdef") == std::string::npos);
  // identical logical config in different key order hashes identically
  write_file("/tmp/hel_rt2.json", R"({
    "out": "/tmp/hel_rt_out",
    "params": {"h_root": -3, "n": 3},
    "task": "rgtrees"
  })");
  REQUIRE(run_cli("--config /tmp/hel_rt2.json") == 0);
  const std::string js2 = slurp("/tmp/hel_rt_out/rgtrees.json");
  const auto pos2 = js2.find("\"config_hash\": \"");
  REQUIRE(pos2 != std::string::npos);
  CHECK(js2.substr(pos2 + 16, 16) == hash);
}
