#pragma once

#include <vector>

namespace vacuum {

class Grid1D;
struct State1D;

/// Polytropic gas p = rho^gamma under uniform gravity g, together with the
/// constants of the equilibrium slab rho = (nu (hbar - y))^iota.
struct GasParams {
  double gamma = 0.0;
  double g = 0.0;
  double total_mass = 0.0;
  double nu = 0.0;
  double hbar = 0.0;
  double iota = 0.0;
};

/// Lower/upper bound on the supported adiabatic exponent. Near gamma = 1 the
/// exponent iota blows up and discrete weighted norms stop meaning anything.
inline constexpr double kGammaMin = 1.0 + 1e-3;
inline constexpr double kGammaMax = 10.0;

/// Builds GasParams from (gamma, g, M) using the closed forms
///   nu = g (gamma-1)/gamma,  hbar = gamma/(gamma-1) g^-1 (M g)^((gamma-1)/gamma)
/// and checks that the stationary profile carries mass M (relative 1e-10).
/// Throws DomainError for non-finite or out-of-range input.
GasParams derive_constants(double gamma, double g, double total_mass);

/// Mass of the stationary profile, integral of (nu (hbar-y))^iota over [0, hbar],
/// by tanh-sinh quadrature.
double stationary_mass(const GasParams& params);

/// rho_bar(y) = (nu (hbar - y))^iota for y in [0, hbar].
double stationary_profile(const GasParams& params, double y);

/// d(c^2)/dx of the stationary state at the vacuum boundary: -gamma nu.
double physical_vacuum_slope(const GasParams& params);

/// Eulerian fields at the particle positions x_j = y_j + omega_j.
struct EulerianField {
  std::vector<double> positions;
  std::vector<double> density;
  std::vector<double> velocity;
  double boundary = 0.0;
};

/// Maps Lagrangian data back to physical space: rho_j = rho_bar(y_j)/(1 + d_y omega)_j.
/// Throws SolverError(ParticleCrossing) if 1 + d_y omega <= 0 anywhere.
EulerianField reconstruct_eulerian(const GasParams& params, const Grid1D& grid,
                                   const State1D& state);

/// Trapezoid integral of density over the moved positions.
double eulerian_mass(const EulerianField& field);

}  // namespace vacuum
