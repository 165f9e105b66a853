#include <string>

#include "doctest.h"
#include "vacuum/config.hpp"

using namespace vacuum;

namespace {

const char* kMinimal = R"(# minimal
[gas]
gamma = 2
g = 1
M = 1
[grid]
n_cells = 64
)";

int error_line(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}

std::string error_message(const std::string& text, const std::map<std::string, std::string>& o = {}) {
  try {
    parse_config(text, o);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("minimal config takes the documented defaults") {
  const auto spec = parse_config(kMinimal);
  const auto& rc = spec.run_config;
  CHECK(spec.name == "experiment");
  CHECK(spec.output_dir == "out");
  CHECK(spec.seed == 0);
  CHECK(rc.params.gamma == 2.0);
  CHECK(rc.grid.n_cells() == 64);
  CHECK(rc.model == Model::EulerDamped);
  CHECK(rc.t_final == 40.0);
  CHECK(rc.dt == 0.0);
  CHECK(rc.output_every == 0);
  CHECK(rc.cfl_safety == 0.5);
  CHECK(rc.init.family == InitFamily::SineMode);
  CHECK(rc.init.amplitude == 1e-3);
  CHECK(rc.init.mode == 1);
  CHECK(spec.analyses.decay_fit);
  CHECK(spec.analyses.convergence_levels == 0);
  CHECK(spec.fit_t_lo() == doctest::Approx(10.0));
  CHECK(spec.fit_t_hi() == doctest::Approx(36.0));
  CHECK(spec.identities.dims == std::vector<int>{2, 3});
  CHECK(spec.identities.samples == 20);
}

TEST_CASE("validation errors name the key") {
  std::string text = kMinimal;
  text.replace(text.find("gamma = 2"), 9, "gamma = 0.9");
  const auto msg = error_message(text);
  CHECK(msg.find("gamma must exceed 1") != std::string::npos);
  CHECK(msg.find("'gamma'") != std::string::npos);
  CHECK(error_message(kMinimal, {{"n_cells", "4"}}).find("n_cells") != std::string::npos);
  CHECK(error_message(kMinimal, {{"g", "-1"}}).find("'g'") != std::string::npos);
  CHECK(error_message(kMinimal, {{"name", "a/b"}}).find("name") != std::string::npos);
  CHECK(error_message(kMinimal, {{"convergence_levels", "1"}}).find("convergence_levels") !=
        std::string::npos);
  CHECK(error_message(kMinimal, {{"dt", "fast"}}).find("dt") != std::string::npos);
}

TEST_CASE("parse errors cite the line") {
  CHECK(error_line(std::string(kMinimal) + "[run]\ndt 0.01\n") == 9);
  CHECK(error_line(std::string(kMinimal) + "bogus = 1\n") == 8);
  CHECK(error_line(std::string(kMinimal) + "n_cells = 32\n") == 8);
  CHECK(error_line(std::string(kMinimal) + "[run]\ngamma = 3\n") == 9);
  CHECK(error_line(std::string(kMinimal) + "[nowhere]\n") == 8);
  CHECK(error_line("[gas\n") == 1);
  CHECK(error_line("gamma =\n") == 1);
}

TEST_CASE("missing required key") {
  CHECK(error_message("[gas]\ngamma = 2\ng = 1\n").find("missing required key") != std::string::npos);
}

TEST_CASE("overrides replace config values and reject unknown keys") {
  const auto spec = parse_config(kMinimal, {{"n_cells", "32"}, {"dt", "0.01"}, {"model", "darcy"},
                                            {"output_dir", "elsewhere"}, {"seed", "12"}});
  CHECK(spec.run_config.grid.n_cells() == 32);
  CHECK(spec.run_config.dt == 0.01);
  CHECK(spec.run_config.model == Model::Darcy);
  CHECK(spec.output_dir == "elsewhere");
  CHECK(spec.seed == 12);
  CHECK_THROWS_AS(parse_config(kMinimal, {{"colour", "red"}}), ConfigError);
}

TEST_CASE("raw parser keeps lines and sections") {
  const auto raw = parse_raw_config("name = a # trailing\n\n[gas]\n  gamma = 3  \n");
  CHECK(raw.at("name").value == "a");
  CHECK(raw.at("name").line == 1);
  CHECK(raw.at("gamma").value == "3");
  CHECK(raw.at("gamma").line == 4);
}

TEST_CASE("identity config does not need gas keys") {
  const auto job = parse_identity_config("seed = 7\n[identities]\ndims = 3\nsamples = 4\n");
  CHECK(job.seed == 7);
  CHECK(job.settings.dims == std::vector<int>{3});
  CHECK(job.settings.samples == 4);
  CHECK(job.settings.points_per_dim == 16);
  const auto defaults = parse_identity_config("");
  CHECK(defaults.settings.dims == std::vector<int>{2, 3});
  CHECK_THROWS_AS(parse_identity_config("[identities]\ndims = 4\n"), ConfigError);
  CHECK_THROWS_AS(parse_identity_config("", {{"samples", "0"}}), ConfigError);
}

TEST_CASE("reference lists every section") {
  const auto ref = config_reference();
  for (const char* s : {"[gas]", "[grid]", "[run]", "[initial]", "[analysis]", "[identities]"})
    CHECK(ref.find(s) != std::string::npos);
}
