#include <catch_amalgamated.hpp>

#include "afmgate/config_io.hpp"
#include "afmgate/output.hpp"

using namespace afmgate;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinRel;

namespace {
std::string config_error(const std::string& text) {
  try {
    parse_config(text, "cfg.json");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}
}  // namespace

TEST_CASE("empty document gives the paper operating point", "[config]") {
  const auto rc = parse_config("{}");
  const auto& p = rc.protocol;
  CHECK(p.chain().n_atoms() == 5);
  CHECK(p.chain().spacing_um() == 4.0);
  CHECK_THAT(p.interaction().b_nn().mhz(), WithinRel(45.0, 1e-14));
  CHECK_THAT(p.pulse().omega0().mhz(), WithinRel(8.0, 1e-14));
  CHECK_THAT(p.pulse().delta0().mhz(), WithinRel(20.0, 1e-14));
  CHECK(p.pulse().tau() == 1.0);
  CHECK_THAT(p.decay().gamma_r().khz(), WithinRel(0.5, 1e-14));
  CHECK(p.include_decay());
  CHECK(p.model() == ModelKind::FullVdw);
  CHECK(p.steps_per_pulse() == 32000);
  CHECK(rc.c_nu == paper_c_table());
  CHECK(rc.seed == 1);
  CHECK(rc.sweep.tau_us.size() == 26);
  CHECK(rc.fit_c.tau_us.size() == 10);
  CHECK(rc.thermal.trials == 500);
}

TEST_CASE("overrides", "[config]") {
  const auto rc = parse_config(R"({
    // comments are allowed
    "chain": {"n_atoms": 6, "spacing_um": 5.0},
    "interaction": {"c6_mhz_um6": 1562500, "lambda": 2, "range_cutoff": 2},
    "pulse": {"tau_us": 0.5},
    "protocol": {"model": "pxp", "steps_per_pulse": 2000, "include_decay": false},
    "c_nu": {"3": 0.5, "5": 0.3},
    "seed": 99,
    "sweep": {"tau_us": {"start": 0.5, "stop": 1.0, "step": 0.25}, "n_atoms": [3]},
    "thermal": {"temperature_uk": 2.5, "trials": 10}
  })");
  const auto& p = rc.protocol;
  CHECK(p.chain().n_atoms() == 6);
  CHECK_THAT(p.interaction().b_nn().mhz(), WithinRel(1562500.0 / 15625.0, 1e-14));
  CHECK(p.interaction().lambda() == 2.0);
  CHECK(p.interaction().range_cutoff() == 2);
  CHECK(p.model() == ModelKind::Pxp);
  CHECK(p.steps_per_pulse() == 2000);
  CHECK_FALSE(p.include_decay());
  CHECK(rc.c_nu.at(5) == 0.3);
  CHECK(rc.seed == 99);
  CHECK(rc.sweep.tau_us == std::vector<double>{0.5, 0.75, 1.0});
  CHECK(rc.thermal.temperature_uk == 2.5);
}

TEST_CASE("errors carry file, line and key", "[config]") {
  CHECK_THAT(config_error("{\n  \"chain\": {\n    \"n_atom\": 5\n  }\n}"), ContainsSubstring("cfg.json:3: chain.n_atom: unknown key"));
  CHECK_THAT(config_error("{\n \"pulse\": {\"tau_us\": \"long\"}\n}"), ContainsSubstring("cfg.json:2: pulse.tau_us: expected a number"));
  CHECK_THAT(config_error("{\n\"chain\": {\"n_atoms\": 2}}"), ContainsSubstring("cfg.json:2: chain:"));
  CHECK_THAT(config_error("{\n\"protocol\": {\"model\": \"ising\"}}"), ContainsSubstring("protocol"));
  CHECK_THAT(config_error("{\n\"protocol\": {\"dt_us\": 0.01}}"), ContainsSubstring("tau / 1000"));
  CHECK_THAT(config_error("{\"a\": 1,\n\n  \"b\" 2}"), ContainsSubstring("cfg.json:3: malformed JSON"));
  CHECK_THAT(config_error("[1]"), ContainsSubstring("top level must be an object"));
  CHECK_THAT(config_error("{\"c_nu\": {\"x\": 1}}"), ContainsSubstring("keys must be integers"));
  CHECK_THAT(config_error("{\"fit_c\": {\"nu\": [4]}}"), ContainsSubstring("odd"));
  CHECK_THAT(config_error("{\"sweep\": {\"tau_us\": []}}"), ContainsSubstring("grid is empty"));
  CHECK_THAT(config_error("{\"interaction\": {\"b_mhz\": 1, \"c6_mhz_um6\": 1}}"), ContainsSubstring("not both"));
  CHECK_THAT(config_error("{\"seed\": -3}"), ContainsSubstring("seed"));
  CHECK_THROWS_AS(load_config("/nonexistent/afmgate.json"), ConfigError);
}

TEST_CASE("csv formatting", "[config]") {
  CHECK(fmt_num(0.1) == "0.1");
  CHECK(fmt_num(1.0 / 3.0) == "0.3333333333333333");
  CHECK(std::stod(fmt_num(M_PI)) == M_PI);
  CsvTable t({"a", "b"});
  t.comment("k", 2.5);
  t.row() << 1 << "x";
  CHECK(t.str() == "# k: 2.5\na,b\n1,x\n");
  t.row() << 1;
  CHECK_THROWS_AS(t.str(), MisuseError);
}
