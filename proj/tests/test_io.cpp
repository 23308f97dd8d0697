#include <cmath>

#include "doctest.h"
#include "hall_edge_lab/io.hpp"

using namespace hel;

TEST_CASE("config parsing: haldane model round trip") {
  const std::string text = R"({
    "task": "bands",
    "model": {"model": "haldane", "t1": 1.0, "t2": 0.5, "phi": 1.5707963,
              "W": 0.0, "mu": 0.0, "L": 12, "spinful": true,
              "boundary": "cylinder"},
    "out": "/tmp/helx",
    "workers": 2,
    "seed": 7
  })";
  const auto cfg = parse_config_text(text);
  CHECK(cfg.task == "bands");
  CHECK(cfg.L == 12);
  CHECK(cfg.spinful);
  CHECK(cfg.boundary == Boundary::CylinderDirichlet);
  CHECK(cfg.workers == 2);
  const auto m = model_from_config(cfg);
  CHECK(m.M() == 4);
  CHECK(m.L() == 12);
}

TEST_CASE("unknown keys are rejected before any compute") {
  CHECK_THROWS_WITH_AS(
      (void)parse_config_text(R"({"task": "bands", "bogus": 1})"),
      doctest::Contains("bogus"), ConfigError);
  CHECK_THROWS_WITH_AS(
      (void)parse_config_text(
          R"({"task": "bands", "model": {"t1": 1.0, "oops": 2}})"),
      doctest::Contains("oops"), ConfigError);
  CHECK_THROWS_AS((void)parse_config_text(R"({"task": "fly"})"), ConfigError);
  CHECK_THROWS_AS((void)parse_config_text("not json"), ConfigError);
}

TEST_CASE("custom models come from hopping records") {
  const std::string text = R"({
    "task": "bands",
    "model": {"model": "custom", "M": 1, "L": 8, "mu": 0.1,
              "boundary": "torus",
              "hoppings": [
                {"z1": 1, "x2_offset": 0, "r": 0, "rp": 0, "re": -0.5},
                {"z1": -1, "x2_offset": 0, "r": 0, "rp": 0, "re": -0.5},
                {"z1": 0, "x2_offset": 1, "r": 0, "rp": 0, "re": -0.5},
                {"z1": 0, "x2_offset": -1, "r": 0, "rp": 0, "re": -0.5}
              ]}
  })";
  const auto cfg = parse_config_text(text);
  const auto m = model_from_config(cfg);
  CHECK(m.M() == 1);
  // square-lattice dispersion -cos k1 - cos k2
  const Mat h = bloch_hamiltonian(m, 0.7, 1.1);
  CHECK(h(0, 0).real() ==
        doctest::Approx(-std::cos(0.7) - std::cos(1.1)).epsilon(1e-12));
}

TEST_CASE("config hash is stable and key-order sensitive inputs hash equal") {
  const auto a = parse_config_text(R"({"task": "bands", "workers": 1})");
  const auto b = parse_config_text(R"({"workers": 1, "task": "bands"})");
  // nlohmann::json::dump sorts keys, so logically equal configs hash equal
  CHECK(a.config_hash == b.config_hash);
  const auto c = parse_config_text(R"({"task": "bands", "workers": 2})");
  CHECK(a.config_hash != c.config_hash);
}

TEST_CASE("json artifacts serialize numbers with 17 significant digits") {
  JsonValue v = JsonValue::object();
  v.set("x", 0.1);
  v.set("y", 1.0 / 3.0);
  const std::string s = v.dump();
  CHECK(s.find("0.10000000000000001") != std::string::npos);
  CHECK(s.find("0.33333333333333331") != std::string::npos);
}

TEST_CASE("json writer escapes and nests deterministically") {
  JsonValue v = JsonValue::object();
  v.set("s", "a\"b\\c\n");
  JsonValue arr = JsonValue::array();
  arr.push(1.5);
  arr.push(JsonValue::object().set("k", true));
  v.set("arr", std::move(arr));
  const std::string once = v.dump(2);
  const std::string twice = v.dump(2);
  CHECK(once == twice);
  CHECK(once.find("\"a\\\"b\\\\c\\n\"") != std::string::npos);
}
