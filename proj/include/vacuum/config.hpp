#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "vacuum/solver1d.hpp"

namespace vacuum {

/// Malformed or invalid configuration. line is 0 when the problem is not
/// tied to a particular line (missing keys, command-line overrides).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, int line = 0, std::string key = {})
      : std::runtime_error(what), line_(line), key_(std::move(key)) {}
  int line() const noexcept { return line_; }
  const std::string& key() const noexcept { return key_; }

 private:
  int line_;
  std::string key_;
};

struct AnalysisSet {
  bool decay_fit = true;
  bool pointwise_bounds = true;
  bool darcy_compare = false;
  /// 0 disables; otherwise the number of refinement levels (>= 2).
  int convergence_levels = 0;
  /// Fit window; negative entries mean the default [0.25 T, 0.9 T].
  double fit_t_lo = -1.0;
  double fit_t_hi = -1.0;
};

struct IdentitySettings {
  std::vector<int> dims{2, 3};
  int samples = 20;
  int points_per_dim = 16;
  double dt_probe = 1e-2;
  double horizon = 5.0;
};

struct ExperimentSpec {
  std::string name = "experiment";
  RunConfig run_config;
  AnalysisSet analyses;
  IdentitySettings identities;
  std::filesystem::path output_dir = "out";
  bool svg = false;
  std::uint64_t seed = 0;

  double fit_t_lo() const;
  double fit_t_hi() const;
};

/// key = value pairs as written, after section resolution.
struct RawEntry {
  std::string value;
  int line = 0;
};
using RawConfig = std::map<std::string, RawEntry>;

/// Splits the text into entries. Accepts `[section]` headers, `#` comments and
/// blank lines; keys must belong to their section (or appear before any header).
RawConfig parse_raw_config(std::string_view text);

/// Parses and validates a config, applying `overrides` (key -> value, as given
/// by --set) on top. Relative table paths resolve against base_dir.
ExperimentSpec parse_config(std::string_view text,
                            const std::map<std::string, std::string>& overrides = {},
                            const std::filesystem::path& base_dir = ".");

struct IdentityJob {
  IdentitySettings settings;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "out";
};

/// Reads only the [identities] keys plus seed and output_dir; the gas and grid
/// keys are not required.
IdentityJob parse_identity_config(std::string_view text,
                                  const std::map<std::string, std::string>& overrides = {});

/// The documented keys, their sections and defaults (for --help).
std::string config_reference();

const char* to_string(Model model);
const char* to_string(Spacing spacing);
const char* to_string(InitFamily family);

}  // namespace vacuum
