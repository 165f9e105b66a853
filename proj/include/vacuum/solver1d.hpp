#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "vacuum/energy.hpp"
#include "vacuum/model.hpp"
#include "vacuum/weighted_calc.hpp"

namespace vacuum {

/// Lagrangian perturbation omega = x - y and its velocity v = d_t omega.
/// Node 0 is the fixed bottom, the last node is the vacuum boundary.
struct State1D {
  double time = 0.0;
  std::vector<double> omega;
  std::vector<double> vel;

  static State1D zero(const Grid1D& grid);
};

enum class InitFamily { SineMode, PolynomialBump, CustomTable };

/// Smooth initial perturbations vanishing at the bottom.
///   sine_mode:       omega0 = eps sin((2k-1) pi y / (2 hbar)), v0 = eps_v * same
///   polynomial_bump: omega0 = eps s^3 (4 - 3s) with s = y/hbar, v0 = eps_v * same
///                    (flat at the top, vanishing to second order at the bottom)
///   custom_table:    (y, omega, v) samples, linearly interpolated onto the grid
struct InitialData {
  InitFamily family = InitFamily::SineMode;
  double amplitude = 1e-3;
  int mode = 1;
  double vel_amplitude = 0.0;
  std::vector<double> table_y;
  std::vector<double> table_omega;
  std::vector<double> table_vel;
};

/// Largest admissible max |d_y omega0|.
inline constexpr double kMaxInitialSlope = 0.4;

/// Samples the initial data on the grid. Throws DomainError if the data does
/// not vanish at y = 0 or exceeds the smallness gate.
State1D make_initial_state(const Grid1D& grid, const InitialData& init);

enum class Model { EulerDamped, Darcy };

struct RunConfig {
  GasParams params;
  Grid1D grid;
  Model model = Model::EulerDamped;
  InitialData init;
  double t_final = 40.0;
  /// 0 selects the time step from the stability limit.
  double dt = 0.0;
  double cfl_safety = 0.5;
  /// 0 records roughly every 0.1 time units.
  int output_every = 0;
  /// Test hook: disables the frictional damping term.
  bool damping = true;
};

void validate(const RunConfig& config);

/// d_t^2 omega = -v - sigma^-iota d_y(sigma^(iota+1) Phi), Phi = (1+d_y omega)^-gamma - 1,
/// in flux form: Phi on cell midpoints, fluxes sigma^(iota+1) Phi, and the exact
/// sigma^iota mass of each node's control volume as the denominator.
std::vector<double> rhs_acceleration(const GasParams& params, const Grid1D& grid,
                                     const State1D& state, bool damping = true);

/// The pressure/gravity part alone: -sigma^-iota d_y(sigma^(iota+1) Phi).
std::vector<double> flux_force(const GasParams& params, const Grid1D& grid,
                               std::span<const double> omega);

/// d_t^3 omega from the time-differentiated equation, given accel = d_t^2 omega.
std::vector<double> rhs_jerk(const GasParams& params, const Grid1D& grid, const State1D& state,
                             std::span<const double> accel, bool damping = true);

/// Largest stable step for the damped Euler model.
double cfl_limit_euler(const GasParams& params, const Grid1D& grid, const State1D& state,
                       double cfl_safety);

/// Largest stable step for the Darcy model.
double cfl_limit_darcy(const GasParams& params, const Grid1D& grid, double cfl_safety);

/// One Strang-split step: exact damping half-steps around a velocity-Verlet
/// kick-drift-kick of the flux force.
State1D step_euler_damped(const RunConfig& config, const State1D& state, double dt);

/// One explicit Euler step of sigma^iota d_t omega = -d_y(sigma^(iota+1) Phi).
/// The velocity slot holds d_t omega.
State1D step_darcy(const RunConfig& config, const State1D& state, double dt);

struct Snapshot {
  State1D state;
  EnergyReport energy;
  double boundary = 0.0;
  double mass_rel_err = 0.0;
};

struct RunResult {
  double dt = 0.0;
  int output_every = 0;
  std::vector<Snapshot> snapshots;
};

/// Chosen (dt, output_every) for a config after applying the automatic rules.
struct Stepping {
  double dt;
  int output_every;
  std::int64_t n_steps;
};
Stepping plan_stepping(const RunConfig& config, const State1D& initial);

/// Integrates to t_final, recording a snapshot every output_every steps and at
/// the final time. Failures are rethrown as SolverError carrying the time.
RunResult run(const RunConfig& config);
RunResult run(const RunConfig& config, const State1D& initial);

}  // namespace vacuum
