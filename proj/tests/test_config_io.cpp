#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "latinfe/outputs.hpp"
#include "latinfe/scenarios.hpp"

#include <random>

using namespace latinfe;

TEST_CASE("minimal config gets documented defaults") {
  RunConfig cfg = parse_config_text("{\"scenario\": \"dcb\"}");
  CHECK(cfg.scenario == "dcb");
  CHECK(cfg.solver.eta_tol == doctest::Approx(1e-3));
  CHECK(cfg.solver.relaxation == doctest::Approx(0.8));
  CHECK(cfg.interface.k_n0 == doctest::Approx(1e5));
  CHECK(cfg.interface.Yc == doctest::Approx(0.4));
  CHECK(cfg.geometry.cracks.size() == 1u);
}

TEST_CASE("schema violations name the key and constraint") {
  CHECK_THROWS_WITH_AS(
      parse_config_text(
          "{\"scenario\":\"dcb\",\"interface\":{\"Yc\":-1.0}}"),
      "Y_c must be > 0", InputError);
  CHECK_THROWS_AS(
      parse_config_text("{\"scenario\":\"dcb\",\"bogus\":1}"), InputError);
  CHECK_THROWS_AS(
      parse_config_text("{\"scenario\":\"dcb\",\"solver\":{\"nope\":1}}"),
      InputError);
  CHECK_THROWS_AS(parse_config_text("{\"scenario\":\"unknown_name\"}"),
                  InputError);
  CHECK_THROWS_AS(parse_config_text("{not json"), InputError);
  CHECK_THROWS_AS(parse_config_text("{}"), InputError);
}

TEST_CASE("round-trip: parse, serialize, parse is the identity") {
  std::mt19937 rng(41);
  std::vector<std::string> names = scenario_names();
  std::uniform_int_distribution<int> pick(0, int(names.size()) - 1);
  std::uniform_real_distribution<double> un(0.1, 3.0);
  for (int trial = 0; trial < 25; ++trial) {
    json overrides;
    overrides["scenario"] = names[pick(rng)];
    overrides["solver"]["eta_tol"] = 1e-3 * un(rng);
    overrides["geometry"]["length"] = 10.0 * un(rng);
    overrides["load"]["magnitude"] = un(rng);
    RunConfig c1 = parse_config_text(overrides.dump());
    std::string s1 = serialize_config(c1);
    RunConfig c2 = parse_config_text(s1);
    std::string s2 = serialize_config(c2);
    CHECK(s1 == s2);
    CHECK(config_hash(c1) == config_hash(c2));
  }
}

TEST_CASE("curve csv: header, hash line, empty run") {
  ArtifactBundle empty;
  empty.config = RunConfig::from_json(scenario_defaults("custom"));
  std::string csv = curve_csv(empty);
  auto nl = csv.find('\n');
  CHECK(csv.substr(0, 14) == "# config_hash=");
  CHECK(csv.substr(nl + 1) == "step,load_N,disp_mm,crack_mm,dissipated_Nmm\n");

  ArtifactBundle one = empty;
  one.curve.push_back({1, 1.5, 0.25, 0.0, 0.0});
  std::string csv2 = curve_csv(one);
  CHECK(csv2.find("1,1.5,0.25,0,0\n") != std::string::npos);
}

TEST_CASE("outputs are written with provenance") {
  RunConfig cfg = RunConfig::from_json(scenario_defaults("custom"));
  cfg.geometry.nx = 4;
  cfg.geometry.nz_per_ply = 1;
  cfg.partition.cuts_x = 2;
  cfg.solver.steps = 1;
  cfg.solver.eta_tol = 1e-4;
  cfg.solver.max_latin_iterations = 300;
  cfg.load.magnitude = 1e-4;
  auto bundle = run_scenario(cfg);
  REQUIRE(bundle.success);
  auto paths = write_outputs(bundle, "test_out_cfg");
  REQUIRE(paths.size() == 4u);
  std::ifstream is(paths[0]);
  std::string line;
  std::getline(is, line);
  CHECK(line == "# config_hash=" + config_hash(cfg));
}

TEST_CASE("scenario defaults exist and validate for every name") {
  for (const auto& name : scenario_names()) {
    RunConfig cfg = RunConfig::from_json(scenario_defaults(name));
    CHECK(cfg.scenario == name);
  }
}

TEST_CASE("sweep key editing") {
  json base = json::parse("{\"scenario\":\"bending\"}");
  json mod = set_config_key(base, "partition.cuts_x", "32");
  RunConfig cfg = parse_config_text(mod.dump());
  CHECK(cfg.partition.cuts_x == 32);
}
