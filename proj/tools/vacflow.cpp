#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "vacuum/commands.hpp"
#include "vacuum/config.hpp"
#include "vacuum/errors.hpp"

namespace {

using namespace vacuum;
namespace fs = std::filesystem;

struct Globals {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  bool seed_given = false;
  bool quiet = false;
  std::vector<std::string> sets;
};

std::map<std::string, std::string> parse_overrides(const std::vector<std::string>& sets) {
  std::map<std::string, std::string> out;
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
    auto trim = [](std::string v) {
      const auto b = v.find_first_not_of(" \t");
      const auto e = v.find_last_not_of(" \t");
      return b == std::string::npos ? std::string{} : v.substr(b, e - b + 1);
    };
    out[trim(s.substr(0, eq))] = trim(s.substr(eq + 1));
  }
  return out;
}

std::string read_config_text(const Globals& g) {
  if (g.config.empty()) return {};
  std::ifstream in(g.config, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + g.config + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::map<std::string, std::string> all_overrides(const Globals& g) {
  auto overrides = parse_overrides(g.sets);
  if (!g.out.empty()) overrides["output_dir"] = g.out;
  if (g.seed_given) overrides["seed"] = std::to_string(g.seed);
  return overrides;
}

ExperimentSpec load_spec(const Globals& g) {
  if (g.config.empty()) throw ConfigError("--config is required for this command");
  fs::path base = fs::path(g.config).parent_path();
  if (base.empty()) base = ".";
  return parse_config(read_config_text(g), all_overrides(g), base);
}

IdentityJob load_identity_job(const Globals& g) {
  return parse_identity_config(read_config_text(g), all_overrides(g));
}

fs::path error_dir(const Globals& g) {
  if (!g.out.empty()) return g.out;
  try {
    return load_identity_job(g).output_dir;
  } catch (...) {
    return {};
  }
}

int report_error(const Globals& g, const std::string& kind, const std::string& message, int code) {
  const auto j = error_json(kind, message, code);
  std::cerr << j.dump() << "\n";
  const fs::path dir = error_dir(g);
  if (!dir.empty()) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    std::ofstream out(dir / "error.json");
    if (out) out << j.dump(2) << "\n";
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lagrangian vacuum free-boundary Euler solver and verification suites.\n\n" +
               config_reference()};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--config", g.config, "experiment config file");
  app.add_option("--out", g.out, "output directory (overrides output_dir)");
  app.add_option_function<std::uint64_t>(
      "--seed", [&g](std::uint64_t s) { g.seed = s, g.seed_given = true; }, "seed for randomized suites");
  app.add_flag("--quiet", g.quiet, "suppress progress output");
  app.add_option("--set", g.sets, "override a config key, key=value (repeatable)");

  auto* sim = app.add_subcommand("simulate", "run one experiment and write series.csv, summary.json");
  bool svg = false;
  sim->add_flag("--svg", svg, "also write energy.svg");

  auto* fit = app.add_subcommand("decay-fit", "fit E_total = C exp(-delta t) to an existing series.csv");
  std::string series;
  double t_lo = -1.0, t_hi = -1.0;
  fit->add_option("series", series, "series.csv to read")->required();
  fit->add_option("--t-lo", t_lo, "window start (default 0.25 T)");
  fit->add_option("--t-hi", t_hi, "window end (default 0.9 T)");

  auto* ids = app.add_subcommand("verify-identities", "check the flow-map identities on random fields");
  std::vector<int> dims;
  int samples = 0;
  ids->add_option("--dims", dims, "dimensions to test")->delimiter(',')->check(CLI::IsMember({2, 3}));
  ids->add_option("--samples", samples, "fields per dimension")->check(CLI::PositiveNumber);

  auto* conv = app.add_subcommand("convergence", "refinement study over N, 2N, 4N, ...");
  int levels = 0;
  conv->add_option("--levels", levels, "number of levels (default 3)")->check(CLI::Range(2, 6));

  app.add_subcommand("darcy-compare", "twin runs of the damped Euler and Darcy models");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error(g, "usage", e.what(), kExitConfig);
  }

  try {
    if (sim->parsed()) {
      auto spec = load_spec(g);
      spec.svg = spec.svg || svg;
      return cmd_simulate(spec, g.quiet);
    }
    if (fit->parsed()) {
      const fs::path out = g.out.empty() ? fs::path(series).parent_path() : fs::path(g.out);
      return cmd_decay_fit(series, t_lo, t_hi, out.empty() ? "." : out, g.quiet);
    }
    if (ids->parsed()) {
      auto job = load_identity_job(g);
      if (!dims.empty()) job.settings.dims = dims;
      if (samples > 0) job.settings.samples = samples;
      return cmd_verify_identities(job.settings, job.seed, job.output_dir, g.quiet);
    }
    if (conv->parsed()) {
      auto spec = load_spec(g);
      if (levels > 0) spec.analyses.convergence_levels = levels;
      return cmd_convergence(spec, g.quiet);
    }
    return cmd_darcy_compare(load_spec(g), g.quiet);
  } catch (const ConfigError& e) {
    return report_error(g, "config", e.what(), kExitConfig);
  } catch (const AssertionFailure& e) {
    return report_error(g, "assertion", e.what(), kExitAssertion);
  } catch (const SolverError& e) {
    std::string msg = e.what();
    if (e.time()) msg += " (t = " + format_double(*e.time()) + ")";
    return report_error(g, SolverError::kind_name(e.kind()), msg, kExitRuntime);
  } catch (const std::exception& e) {
    return report_error(g, "runtime", e.what(), kExitRuntime);
  }
}
