#pragma once

#include <array>
#include <span>
#include <utility>
#include <vector>

#include "vacuum/model.hpp"
#include "vacuum/weighted_calc.hpp"

namespace vacuum {

struct State1D;

/// Highest m + i retained in the energy tables.
inline constexpr int kOrderCap = 2;

/// One E^{m,i} entry split into its three squared weighted norms:
///   |sigma^((iota+i)/2) d_t^(m+1) d_y^i omega|^2
///   |sigma^((iota+i)/2) d_t^m d_y^i omega|^2
///   |sigma^((iota+i+1)/2) d_t^m d_y^(i+1) omega|^2
/// D^{m,i} is the first plus the third.
struct EnergyEntry {
  int m = 0;
  int i = 0;
  std::array<double, 3> parts{};

  double e() const { return parts[0] + parts[1] + parts[2]; }
  double d() const { return parts[0] + parts[2]; }
};

struct EnergyReport {
  double time = 0.0;
  /// Ordered (0,0), (1,0), (0,1), (2,0), (1,1), (0,2).
  std::vector<EnergyEntry> entries;
  /// Cut-off localized dissipations, same ordering as entries.
  std::vector<double> d1;
  std::vector<double> d2;
  double e_total = 0.0;
  double d_total = 0.0;

  double e(int m, int i) const;
  double d(int m, int i) const;
};

/// (m, i) pairs with m + i <= kOrderCap in report order.
std::vector<std::pair<int, int>> energy_indices();

/// Evaluates the E/D tables. accel must be d_t^2 omega of this state; jerk
/// (d_t^3 omega) is derived from the time-differentiated equation.
EnergyReport energy_report(const GasParams& params, const Grid1D& grid, const State1D& state,
                           std::span<const double> accel);

/// Same, with an explicitly supplied d_t^3 omega (used for the Darcy model).
EnergyReport energy_report(const GasParams& params, const Grid1D& grid, const State1D& state,
                           std::span<const double> accel, std::span<const double> jerk);

struct DecayFit {
  double delta = 0.0;
  double amplitude = 0.0;
  double r_squared = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
  int samples = 0;
};

/// Least-squares line through (t, log E) restricted to [t_lo, t_hi].
/// Throws DomainError for fewer than 10 samples or non-positive energies.
DecayFit fit_decay(std::span<const double> t, std::span<const double> energy, double t_lo,
                   double t_hi);

struct BoundRatios {
  /// sup_y |rho - rho_bar| / (hbar - y)^iota over the reference scale.
  double density = 0.0;
  double velocity = 0.0;
  double boundary = 0.0;
  /// sqrt(e^{-delta t} E(0)).
  double scale = 0.0;
};

/// Empirical constants of the pointwise convergence bounds at one instant.
BoundRatios pointwise_bound_report(const GasParams& params, const Grid1D& grid,
                                   const State1D& state, const DecayFit& fit, double e0);

/// sup_y |rho - rho_bar| / (hbar - y)^iota without the time scaling.
double density_deviation_weighted(const GasParams& params, const Grid1D& grid,
                                  const State1D& state);

}  // namespace vacuum
