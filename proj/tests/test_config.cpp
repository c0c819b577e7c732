#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <nlohmann/json.hpp>

#include "thermalize/config.hpp"

using namespace thermalize;
using nlohmann::json;

namespace {

const char* kFullConfig = R"({
  "system": {"kind": "harmonic", "omega": 0.001, "M": 51},
  "bath": {"N": 50, "frequency": 0.001, "quantum_unit": 0.001, "kappa_target": 5e-6},
  "shell": {"E": 0.5, "delta": 1e-5},
  "run": {"seed": 7, "samples": 16, "mode": "analytic", "fit_window": [1, 3],
          "kappa_list": [5e-6, 5e-5, 5e-4], "cap": 100000, "level_cut": "bare"},
  "output": {"format": "csv", "path": "out.csv"}
})";

}  // namespace

TEST_CASE("parse and round-trip") {
    const ExperimentConfig cfg = parse_config_text(kFullConfig, "test");
    REQUIRE(cfg.system.has_value());
    CHECK(cfg.system->kind == "harmonic");
    CHECK(cfg.system->levels == 51);
    REQUIRE(cfg.bath.has_value());
    CHECK(cfg.bath->modes == 50);
    CHECK(cfg.bath->frequency.scalar == 0.001);
    CHECK(cfg.bath->frequency.values.size() == 50);
    CHECK_FALSE(cfg.bath->strength.has_value());
    CHECK(cfg.run.seed == 7);
    CHECK(cfg.run.fit_window == std::pair<int, int>{1, 3});

    const ExperimentConfig again = config_from_json(config_to_json(cfg));
    CHECK(again == cfg);
    CHECK(config_hash(again) == config_hash(cfg));
}

TEST_CASE("round-trip preserves list-valued bath fields") {
    const char* text = R"({
      "bath": {"N": 3, "frequency": [1.0, 2.0, 3.0], "strength": [0.1, 0.2, 0.3],
               "quantum_unit": 1.0},
      "run": {},
      "output": {}
    })";
    const ExperimentConfig cfg = parse_config_text(text, "test");
    REQUIRE(cfg.bath.has_value());
    CHECK_FALSE(cfg.bath->frequency.scalar.has_value());
    CHECK(cfg.bath->frequency.values == std::vector<double>{1.0, 2.0, 3.0});
    REQUIRE(cfg.bath->strength.has_value());
    const ExperimentConfig again = config_from_json(config_to_json(cfg));
    CHECK(again == cfg);
}

TEST_CASE("unknown keys are rejected everywhere") {
    CHECK_THROWS_AS(parse_config_text(R"({"sytem": {}})", "t"), ConfigError);
    CHECK_THROWS_AS(
        parse_config_text(R"({"system": {"kind": "harmonic", "omega": 1, "M": 2, "x": 0}})", "t"),
        ConfigError);
    CHECK_THROWS_AS(
        parse_config_text(R"({"run": {"seeds": 3}})", "t"), ConfigError);
    CHECK_THROWS_AS(
        parse_config_text(R"({"shell": {"E": 1, "delta": 0.1, "width": 2}})", "t"),
        ConfigError);
}

TEST_CASE("parse errors carry a line number") {
    const char* broken = "{\n  \"system\": {\n  \"kind\": oops\n}\n}";
    try {
        parse_config_text(broken, "cfg.json");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("cfg.json:3") != std::string::npos);
    }
}

TEST_CASE("semantic validation") {
    CHECK_THROWS_AS(parse_config_text(R"({"system": {"kind": "spin"}})", "t"), ConfigError);
    CHECK_THROWS_AS(
        parse_config_text(R"({"system": {"kind": "harmonic", "omega": 1, "M": 0}})", "t"),
        ConfigError);
    CHECK_THROWS_AS(
        parse_config_text(
            R"({"bath": {"N": 2, "frequency": [1.0], "quantum_unit": 1.0}})", "t"),
        ConfigError);
    CHECK_THROWS_AS(
        parse_config_text(R"({"run": {"mode": "montecarlo"}})", "t"), ConfigError);
    CHECK_THROWS_AS(
        parse_config_text(R"({"run": {"fit_window": [5, 1]}})", "t"), ConfigError);
    CHECK_THROWS_AS(
        parse_config_text(R"({"run": {"seed": -4}})", "t"), ConfigError);
    CHECK_THROWS_AS(
        parse_config_text(R"({"output": {"format": "xml"}})", "t"), ConfigError);
    CHECK_THROWS_AS(
        parse_config_text(R"({"two_level": {"beta": 1, "delta": 1, "f_grid": []}})", "t"),
        ConfigError);
}

TEST_CASE("builders") {
    const ExperimentConfig cfg = parse_config_text(kFullConfig, "test");
    const SystemSpec sys = build_system(*cfg.system);
    CHECK(sys.size() == 51);
    const BathSpec bath = build_bath(*cfg.bath);
    CHECK(bath.modes() == 50);
    // kappa_target applied exactly
    CHECK(std::abs(bath.kappa() - 5e-6) <= 1e-12 * 5e-6);
    const ShellWindow shell = build_shell(*cfg.shell);
    CHECK(shell.energy == 0.5);

    SUBCASE("explicit system") {
        const char* text = R"({
          "system": {"kind": "explicit", "energies": [0.0, 0.5], "couplings": [0.0, 2.0]},
          "run": {}, "output": {}
        })";
        const ExperimentConfig c = parse_config_text(text, "t");
        const SystemSpec s = build_system(*c.system);
        CHECK(s.energies[1] == 0.5);
        CHECK(s.couplings[1] == 2.0);
    }
    SUBCASE("kappa_target with zero strengths is rejected") {
        const char* text = R"({
          "bath": {"N": 2, "frequency": 1.0, "strength": 0.0, "quantum_unit": 1.0,
                   "kappa_target": 1e-4},
          "run": {}, "output": {}
        })";
        const ExperimentConfig c = parse_config_text(text, "t");
        CHECK_THROWS_AS(build_bath(*c.bath), Error);
    }
}

TEST_CASE("config hash is stable and input-sensitive") {
    const ExperimentConfig a = parse_config_text(kFullConfig, "t");
    ExperimentConfig b = a;
    CHECK(config_hash(a) == config_hash(b));
    b.run.seed = 8;
    CHECK(config_hash(a) != config_hash(b));
    CHECK(config_hash(a).size() == 16);
}
