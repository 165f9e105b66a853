#include "vacuum/model.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <sstream>

#include "vacuum/errors.hpp"
#include "vacuum/solver1d.hpp"
#include "vacuum/weighted_calc.hpp"

namespace vacuum {

namespace {

constexpr double kMassRelTol = 1e-10;

void require_finite_positive(double value, const char* name) {
  if (!std::isfinite(value) || value <= 0.0) {
    std::ostringstream msg;
    msg << name << " must be finite and positive (got " << value << ")";
    throw DomainError(msg.str());
  }
}

}  // namespace

GasParams derive_constants(double gamma, double g, double total_mass) {
  if (!std::isfinite(gamma)) throw DomainError("gamma must be finite");
  if (gamma <= 1.0) throw DomainError("gamma must exceed 1");
  if (gamma <= kGammaMin || gamma > kGammaMax) {
    std::ostringstream msg;
    msg << "gamma must lie in (" << kGammaMin << ", " << kGammaMax << "] (got " << gamma << ")";
    throw DomainError(msg.str());
  }
  require_finite_positive(g, "g");
  require_finite_positive(total_mass, "total_mass");

  GasParams p;
  p.gamma = gamma;
  p.g = g;
  p.total_mass = total_mass;
  p.nu = g * (gamma - 1.0) / gamma;
  p.hbar = gamma / (gamma - 1.0) / g * std::pow(total_mass * g, (gamma - 1.0) / gamma);
  p.iota = 1.0 / (gamma - 1.0);

  const double mass = stationary_mass(p);
  if (!(std::abs(mass - total_mass) <= kMassRelTol * total_mass)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "stationary profile mass " << mass << " does not match M = " << total_mass;
    throw DomainError(msg.str());
  }
  return p;
}

double stationary_mass(const GasParams& params) {
  // Substitute s = (hbar - y)/hbar so the endpoint power sits at s = 0.
  boost::math::quadrature::tanh_sinh<double> integrator;
  const double scale = std::pow(params.nu * params.hbar, params.iota) * params.hbar;
  const double iota = params.iota;
  const double unit = integrator.integrate([iota](double s) { return std::pow(s, iota); },
                                           0.0, 1.0);
  return scale * unit;
}

double stationary_profile(const GasParams& params, double y) {
  if (!(y >= 0.0 && y <= params.hbar)) {
    std::ostringstream msg;
    msg << "y = " << y << " outside [0, " << params.hbar << "]";
    throw DomainError(msg.str());
  }
  return std::pow(params.nu * (params.hbar - y), params.iota);
}

double physical_vacuum_slope(const GasParams& params) {
  // c^2 = gamma rho^(gamma-1) = gamma nu (hbar - x) near the top.
  return -params.gamma * params.nu;
}

EulerianField reconstruct_eulerian(const GasParams& params, const Grid1D& grid,
                                   const State1D& state) {
  if (state.omega.size() != grid.size() || state.vel.size() != grid.size())
    throw DomainError("state size does not match grid");

  const auto y = grid.nodes();
  const auto dw = derivative(grid, state.omega);

  EulerianField out;
  out.positions.resize(grid.size());
  out.density.resize(grid.size());
  out.velocity.assign(state.vel.begin(), state.vel.end());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double stretch = 1.0 + dw[j];
    if (!(stretch > 0.0)) {
      std::ostringstream msg;
      msg << "particle crossing: 1 + d_y omega = " << stretch << " at y = " << y[j];
      throw SolverError(SolverError::Kind::ParticleCrossing, msg.str(), state.time);
    }
    out.positions[j] = y[j] + state.omega[j];
    // sigma is exactly zero at the top node, so rho_bar there is exactly zero.
    out.density[j] = std::pow(grid.sigma()[j], params.iota) / stretch;
  }
  out.boundary = out.positions.back();
  return out;
}

double eulerian_mass(const EulerianField& field) {
  double mass = 0.0;
  for (std::size_t j = 0; j + 1 < field.positions.size(); ++j) {
    mass += 0.5 * (field.density[j] + field.density[j + 1]) *
            (field.positions[j + 1] - field.positions[j]);
  }
  return mass;
}

}  // namespace vacuum
