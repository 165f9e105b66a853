#include "vacuum/solver1d.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "vacuum/errors.hpp"

namespace vacuum {

namespace {

constexpr double kRecordInterval = 0.1;
constexpr double kAutoStepFraction = 0.9;
constexpr double kSoundSpeedFloor = 1e-12;

[[noreturn]] void throw_crossing(double stretch, double y) {
  std::ostringstream msg;
  msg << "particle crossing: 1 + d_y omega = " << stretch << " at y = " << y;
  throw SolverError(SolverError::Kind::ParticleCrossing, msg.str());
}

// Midpoint slopes of omega plus node slopes (three-point stencils).
struct Slopes {
  std::vector<double> half;
  std::vector<double> node;
};

Slopes slopes_of(const Grid1D& grid, std::span<const double> f) {
  const auto y = grid.nodes();
  Slopes s;
  s.half.resize(y.size() - 1);
  for (std::size_t j = 0; j + 1 < y.size(); ++j) s.half[j] = (f[j + 1] - f[j]) / (y[j + 1] - y[j]);
  s.node = derivative(grid, f);
  return s;
}

void check_stretch(const Grid1D& grid, const Slopes& s) {
  const auto y = grid.nodes();
  for (std::size_t j = 0; j < s.half.size(); ++j)
    if (!(1.0 + s.half[j] > 0.0)) throw_crossing(1.0 + s.half[j], 0.5 * (y[j] + y[j + 1]));
  for (std::size_t j = 0; j < s.node.size(); ++j)
    if (!(1.0 + s.node[j] > 0.0)) throw_crossing(1.0 + s.node[j], y[j]);
}

// (1 + w)^-gamma - 1 without cancellation for small w.
double phi_of(double gamma, double w) { return std::expm1(-gamma * std::log1p(w)); }

// -sigma^-iota d_y(sigma^(iota+1) Phi) in flux form: cell-midpoint fluxes
// sigma^(iota+1) Phi divided by the exact sigma^iota mass of each node's
// control volume. The vacuum node has zero outer flux and a half volume.
std::vector<double> flux_from_phi(const GasParams& params, const Grid1D& grid,
                                  std::span<const double> phi_half) {
  const auto y = grid.nodes();
  const std::size_t n = y.size();
  const double hbar = grid.hbar();
  const double nu = grid.nu();
  const double iota = params.iota;
  const auto column_mass = [&](double at) {
    return std::pow(nu, iota) * std::pow(hbar - at, iota + 1.0) / (iota + 1.0);
  };
  std::vector<double> flux(n);  // flux[j] at the midpoint of cell [y_{j-1}, y_j]
  std::vector<double> above(n);  // mass above the midpoint of cell [y_{j-1}, y_j]
  for (std::size_t j = 1; j < n; ++j) {
    const double mid = 0.5 * (y[j - 1] + y[j]);
    flux[j] = std::pow(nu * (hbar - mid), iota + 1.0) * phi_half[j - 1];
    above[j] = column_mass(mid);
  }
  std::vector<double> force(n, 0.0);
  for (std::size_t j = 1; j < n; ++j) {
    const double outer_flux = j + 1 < n ? flux[j + 1] : 0.0;
    const double outer_mass = j + 1 < n ? above[j + 1] : 0.0;
    force[j] = -(outer_flux - flux[j]) / (above[j] - outer_mass);
  }
  return force;
}

// Time derivatives of Phi along (d_t w, d_t^2 w) where w = d_y omega:
//   Phi_t  = -gamma s^(-gamma-1) w_t
//   Phi_tt = gamma (gamma+1) s^(-gamma-2) w_t^2 - gamma s^(-gamma-1) w_tt,   s = 1 + w
double phi_rate(double gamma, double w, double wt) {
  return -gamma * std::pow(1.0 + w, -gamma - 1.0) * wt;
}

double phi_rate2(double gamma, double w, double wt, double wtt) {
  const double s = 1.0 + w;
  return gamma * (gamma + 1.0) * std::pow(s, -gamma - 2.0) * wt * wt -
         gamma * std::pow(s, -gamma - 1.0) * wtt;
}

void check_finite(const State1D& s) {
  for (std::size_t j = 0; j < s.omega.size(); ++j) {
    if (!std::isfinite(s.omega[j]) || !std::isfinite(s.vel[j])) {
      throw SolverError(SolverError::Kind::NonFinite, "non-finite state after step", s.time);
    }
  }
}

void check_sizes(const Grid1D& grid, const State1D& state) {
  if (state.omega.size() != grid.size() || state.vel.size() != grid.size())
    throw DomainError("state size does not match grid");
}

double interp_table(std::span<const double> xs, std::span<const double> fs, double x) {
  if (x <= xs.front()) return fs.front();
  if (x >= xs.back()) return fs.back();
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const auto k = static_cast<std::size_t>(it - xs.begin());
  const double t = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
  return (1.0 - t) * fs[k - 1] + t * fs[k];
}

}  // namespace

State1D State1D::zero(const Grid1D& grid) {
  State1D s;
  s.omega.assign(grid.size(), 0.0);
  s.vel.assign(grid.size(), 0.0);
  return s;
}

State1D make_initial_state(const Grid1D& grid, const InitialData& init) {
  State1D s = State1D::zero(grid);
  const auto y = grid.nodes();
  const double hbar = grid.hbar();
  switch (init.family) {
    case InitFamily::SineMode: {
      if (init.mode < 1) throw DomainError("sine_mode requires mode >= 1");
      const double k = (2.0 * init.mode - 1.0) * std::numbers::pi / (2.0 * hbar);
      for (std::size_t j = 0; j < y.size(); ++j) {
        const double shape = std::sin(k * y[j]);
        s.omega[j] = init.amplitude * shape;
        s.vel[j] = init.vel_amplitude * shape;
      }
      break;
    }
    case InitFamily::PolynomialBump: {
      for (std::size_t j = 0; j < y.size(); ++j) {
        const double u = y[j] / hbar;
        const double shape = u * u * u * (4.0 - 3.0 * u);
        s.omega[j] = init.amplitude * shape;
        s.vel[j] = init.vel_amplitude * shape;
      }
      break;
    }
    case InitFamily::CustomTable: {
      const auto& ty = init.table_y;
      if (ty.size() < 2 || init.table_omega.size() != ty.size() || init.table_vel.size() != ty.size())
        throw DomainError("custom_table needs at least two rows of (y, omega, v)");
      if (!std::is_sorted(ty.begin(), ty.end()) ||
          std::adjacent_find(ty.begin(), ty.end()) != ty.end())
        throw DomainError("custom_table y values must be strictly increasing");
      if (ty.front() != 0.0 || std::abs(ty.back() - hbar) > 1e-12 * std::max(1.0, hbar))
        throw DomainError("custom_table must span [0, hbar]");
      for (std::size_t j = 0; j < y.size(); ++j) {
        s.omega[j] = interp_table(ty, init.table_omega, y[j]);
        s.vel[j] = interp_table(ty, init.table_vel, y[j]);
      }
      break;
    }
  }
  if (s.omega[0] != 0.0 || s.vel[0] != 0.0)
    throw DomainError("initial data must vanish at y = 0");
  for (std::size_t j = 0; j < y.size(); ++j)
    if (!std::isfinite(s.omega[j]) || !std::isfinite(s.vel[j]))
      throw DomainError("initial data is not finite");

  double max_slope = 0.0;
  for (double w : derivative(grid, s.omega)) max_slope = std::max(max_slope, std::abs(w));
  if (max_slope > kMaxInitialSlope) {
    std::ostringstream msg;
    msg << "initial data too large: max |d_y omega0| = " << max_slope << " exceeds "
        << kMaxInitialSlope;
    throw DomainError(msg.str());
  }
  return s;
}

void validate(const RunConfig& c) {
  if (!(c.t_final > 0.0) || !std::isfinite(c.t_final)) throw DomainError("t_final must be positive");
  if (!(c.dt >= 0.0) || !std::isfinite(c.dt)) throw DomainError("dt must be positive (or 0 for auto)");
  if (!(c.cfl_safety > 0.0 && c.cfl_safety <= 1.0))
    throw DomainError("cfl_safety must lie in (0, 1]");
  if (c.output_every < 0) throw DomainError("output_every must be non-negative");
  if (c.grid.hbar() != c.params.hbar || c.grid.nu() != c.params.nu)
    throw DomainError("grid was built for different gas parameters");
}

std::vector<double> flux_force(const GasParams& params, const Grid1D& grid,
                               std::span<const double> omega) {
  const Slopes s = slopes_of(grid, omega);
  check_stretch(grid, s);
  std::vector<double> phi_half(s.half.size());
  for (std::size_t j = 0; j < s.half.size(); ++j) phi_half[j] = phi_of(params.gamma, s.half[j]);
  return flux_from_phi(params, grid, phi_half);
}

namespace {

// d_t of flux_force along omega_t = v.
std::vector<double> flux_rate(const GasParams& params, const Grid1D& grid,
                              std::span<const double> omega, std::span<const double> v) {
  const Slopes s = slopes_of(grid, omega);
  const Slopes sv = slopes_of(grid, v);
  std::vector<double> half(s.half.size());
  for (std::size_t j = 0; j < half.size(); ++j) half[j] = phi_rate(params.gamma, s.half[j], sv.half[j]);
  return flux_from_phi(params, grid, half);
}

// d_t^2 of flux_force along omega_t = v, omega_tt = a.
std::vector<double> flux_rate2(const GasParams& params, const Grid1D& grid,
                               std::span<const double> omega, std::span<const double> v,
                               std::span<const double> a) {
  const Slopes s = slopes_of(grid, omega);
  const Slopes sv = slopes_of(grid, v);
  const Slopes sa = slopes_of(grid, a);
  std::vector<double> half(s.half.size());
  for (std::size_t j = 0; j < half.size(); ++j)
    half[j] = phi_rate2(params.gamma, s.half[j], sv.half[j], sa.half[j]);
  return flux_from_phi(params, grid, half);
}

}  // namespace

std::vector<double> rhs_acceleration(const GasParams& params, const Grid1D& grid,
                                     const State1D& state, bool damping) {
  check_sizes(grid, state);
  auto a = flux_force(params, grid, state.omega);
  if (damping)
    for (std::size_t j = 0; j < a.size(); ++j) a[j] -= state.vel[j];
  a[0] = 0.0;
  return a;
}

std::vector<double> rhs_jerk(const GasParams& params, const Grid1D& grid, const State1D& state,
                             std::span<const double> accel, bool damping) {
  check_sizes(grid, state);
  auto jerk = flux_rate(params, grid, state.omega, state.vel);
  if (damping)
    for (std::size_t j = 0; j < jerk.size(); ++j) jerk[j] -= accel[j];
  jerk[0] = 0.0;
  return jerk;
}

double cfl_limit_euler(const GasParams& params, const Grid1D& grid, const State1D& state,
                       double cfl_safety) {
  const auto sigma = grid.sigma();
  const auto w = derivative(grid, state.omega);
  double c_max = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    const double stretch = 1.0 + w[j];
    if (!(stretch > 0.0)) throw_crossing(stretch, grid.nodes()[j]);
    c_max = std::max(c_max, std::sqrt(params.gamma * sigma[j] * std::pow(stretch, -params.gamma - 1.0)));
  }
  return cfl_safety * grid.min_spacing() / (c_max + kSoundSpeedFloor);
}

double cfl_limit_darcy(const GasParams& params, const Grid1D& grid, double cfl_safety) {
  const double h = grid.min_spacing();
  return cfl_safety * h * h / (2.0 * params.gamma * grid.sigma()[0]);
}

State1D step_euler_damped(const RunConfig& config, const State1D& state, double dt) {
  const auto& params = config.params;
  const auto& grid = config.grid;
  check_sizes(grid, state);
  if (dt > cfl_limit_euler(params, grid, state, config.cfl_safety) * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "time step " << dt << " violates the CFL limit";
    throw SolverError(SolverError::Kind::CflViolation, msg.str(), state.time);
  }

  State1D next = state;
  auto& w = next.omega;
  auto& v = next.vel;
  const double decay = config.damping ? std::exp(-0.5 * dt) : 1.0;

  for (double& x : v) x *= decay;
  auto force = flux_force(params, grid, w);
  for (std::size_t j = 0; j < v.size(); ++j) v[j] += 0.5 * dt * force[j];
  v[0] = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) w[j] += dt * v[j];
  w[0] = 0.0;
  force = flux_force(params, grid, w);
  for (std::size_t j = 0; j < v.size(); ++j) v[j] += 0.5 * dt * force[j];
  for (double& x : v) x *= decay;
  v[0] = 0.0;

  next.time = state.time + dt;
  check_finite(next);
  return next;
}

State1D step_darcy(const RunConfig& config, const State1D& state, double dt) {
  const auto& params = config.params;
  const auto& grid = config.grid;
  check_sizes(grid, state);
  if (dt > cfl_limit_darcy(params, grid, config.cfl_safety) * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "time step " << dt << " violates the parabolic step limit";
    throw SolverError(SolverError::Kind::CflViolation, msg.str(), state.time);
  }
  State1D next = state;
  const auto rate = flux_force(params, grid, state.omega);
  for (std::size_t j = 0; j < rate.size(); ++j) next.omega[j] += dt * rate[j];
  next.omega[0] = 0.0;
  next.vel = flux_force(params, grid, next.omega);
  next.vel[0] = 0.0;
  next.time = state.time + dt;
  check_finite(next);
  return next;
}

Stepping plan_stepping(const RunConfig& config, const State1D& initial) {
  const double limit = config.model == Model::EulerDamped
                           ? cfl_limit_euler(config.params, config.grid, initial, config.cfl_safety)
                           : cfl_limit_darcy(config.params, config.grid, config.cfl_safety);
  Stepping s{};
  if (config.dt > 0.0) {
    s.dt = config.dt;
    s.output_every = config.output_every > 0
                         ? config.output_every
                         : std::max(1, static_cast<int>(std::lround(kRecordInterval / s.dt)));
  } else if (config.output_every > 0) {
    s.dt = kAutoStepFraction * limit;
    s.output_every = config.output_every;
  } else {
    // Whole number of steps per record interval so output times are round.
    const double k = std::ceil(kRecordInterval / (kAutoStepFraction * limit));
    s.dt = kRecordInterval / k;
    s.output_every = static_cast<int>(k);
  }
  s.n_steps = static_cast<std::int64_t>(std::ceil(config.t_final / s.dt - 1e-9));
  return s;
}

namespace {

Snapshot make_snapshot(const RunConfig& config, const State1D& state) {
  const auto& params = config.params;
  const auto& grid = config.grid;
  Snapshot snap;
  snap.state = state;
  if (config.model == Model::EulerDamped) {
    const auto accel = rhs_acceleration(params, grid, state, config.damping);
    snap.energy = energy_report(params, grid, state, accel);
  } else {
    const auto accel = flux_rate(params, grid, state.omega, state.vel);
    const auto jerk = flux_rate2(params, grid, state.omega, state.vel, accel);
    snap.energy = energy_report(params, grid, state, accel, jerk);
  }
  snap.boundary = grid.hbar() + state.omega.back();
  const auto field = reconstruct_eulerian(params, grid, state);
  snap.mass_rel_err = std::abs(eulerian_mass(field) - params.total_mass) / params.total_mass;
  return snap;
}

}  // namespace

RunResult run(const RunConfig& config) {
  validate(config);
  return run(config, make_initial_state(config.grid, config.init));
}

RunResult run(const RunConfig& config, const State1D& initial) {
  validate(config);
  const Stepping plan = plan_stepping(config, initial);
  RunResult result;
  result.dt = plan.dt;
  result.output_every = plan.output_every;

  State1D state = initial;
  if (config.model == Model::Darcy) {
    state.vel = flux_force(config.params, config.grid, state.omega);
    state.vel[0] = 0.0;
  }
  try {
    result.snapshots.push_back(make_snapshot(config, state));
    for (std::int64_t step = 1; step <= plan.n_steps; ++step) {
      const double dt = step == plan.n_steps ? config.t_final - state.time : plan.dt;
      if (dt <= 0.0) break;
      state = config.model == Model::EulerDamped ? step_euler_damped(config, state, dt)
                                                 : step_darcy(config, state, dt);
      state.time = step == plan.n_steps ? config.t_final : static_cast<double>(step) * plan.dt;
      if (step % plan.output_every == 0 || step == plan.n_steps)
        result.snapshots.push_back(make_snapshot(config, state));
    }
  } catch (const SolverError& e) {
    throw e.at_time(state.time);
  }
  return result;
}

}  // namespace vacuum
