#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "vacuum/config.hpp"
#include "vacuum/energy.hpp"
#include "vacuum/solver1d.hpp"

namespace vacuum {

/// A check the command was asked to enforce did not hold (exit code 4).
class AssertionFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitRuntime = 3, kExitAssertion = 4 };

/// Shortest decimal that round-trips to the same double.
std::string format_double(double x);

/// Column names of series.csv in order.
std::vector<std::string> series_columns();
std::string series_csv(const RunResult& result);

/// Worker count for independent runs: VEL_NUM_THREADS, 0 or unset = hardware.
unsigned sweep_threads();

/// Runs task(k) for k in [0, count) on up to sweep_threads() workers.
/// Each task writes only to its own result slot.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& task);

struct SimulateOutput {
  RunResult result;
  nlohmann::json summary;
};

SimulateOutput simulate(const ExperimentSpec& spec);
int cmd_simulate(const ExperimentSpec& spec, bool quiet);

nlohmann::json decay_fit_from_csv(const std::filesystem::path& series, double t_lo, double t_hi);
int cmd_decay_fit(const std::filesystem::path& series, double t_lo, double t_hi,
                  const std::filesystem::path& out_dir, bool quiet);

/// Exactness-class residuals above this fail verify-identities.
inline constexpr double kIdentityTolerance = 1e-10;

nlohmann::json identity_report(const IdentitySettings& settings, std::uint64_t seed);
int cmd_verify_identities(const IdentitySettings& settings, std::uint64_t seed,
                          const std::filesystem::path& out_dir, bool quiet);

/// Observed orders from levels N, 2N, ..., 2^(L-1) N.
nlohmann::json convergence_report(const ExperimentSpec& spec, int levels);
int cmd_convergence(const ExperimentSpec& spec, bool quiet);

struct DarcyComparison {
  std::vector<double> t;
  std::vector<double> diff_inf;
  std::vector<double> e_euler;
  std::vector<double> e_darcy;
};

DarcyComparison darcy_compare(const ExperimentSpec& spec);
int cmd_darcy_compare(const ExperimentSpec& spec, bool quiet);

/// Log-scale energy plot.
std::string energy_svg(const RunResult& result);

nlohmann::json error_json(const std::string& kind, const std::string& message, int exit_code);

}  // namespace vacuum
