#include "vacuum/energy.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "vacuum/errors.hpp"
#include "vacuum/solver1d.hpp"

namespace vacuum {

namespace {

// integral of c^2 sigma^a f^2 (trapezoid); c = 1 when cutoff is empty.
double localized_sq(const Grid1D& grid, std::span<const double> f, double a,
                    std::span<const double> cutoff) {
  const auto sigma = grid.sigma();
  const auto w = grid.quad_weights();
  double sum = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) {
    double weight = a == 0.0 ? 1.0 : std::pow(sigma[j], a);
    if (!cutoff.empty()) weight *= cutoff[j] * cutoff[j];
    sum += w[j] * weight * f[j] * f[j];
  }
  return sum;
}

}  // namespace

double EnergyReport::e(int m, int i) const {
  for (const auto& entry : entries)
    if (entry.m == m && entry.i == i) return entry.e();
  throw DomainError("energy index out of range");
}

double EnergyReport::d(int m, int i) const {
  for (const auto& entry : entries)
    if (entry.m == m && entry.i == i) return entry.d();
  throw DomainError("energy index out of range");
}

std::vector<std::pair<int, int>> energy_indices() {
  std::vector<std::pair<int, int>> out;
  for (int order = 0; order <= kOrderCap; ++order)
    for (int i = 0; i <= order; ++i) out.emplace_back(order - i, i);
  return out;
}

EnergyReport energy_report(const GasParams& params, const Grid1D& grid, const State1D& state,
                           std::span<const double> accel) {
  const auto jerk = rhs_jerk(params, grid, state, accel);
  return energy_report(params, grid, state, accel, jerk);
}

EnergyReport energy_report(const GasParams& params, const Grid1D& grid, const State1D& state,
                           std::span<const double> accel, std::span<const double> jerk) {
  const std::size_t n = grid.size();
  if (state.omega.size() != n || state.vel.size() != n || accel.size() != n || jerk.size() != n)
    throw DomainError("energy_report: state does not live on this grid");

  // levels[m][k] = d_y^k d_t^m omega
  const std::array<std::span<const double>, 4> time_levels{
      std::span<const double>(state.omega), std::span<const double>(state.vel), accel, jerk};
  std::array<std::array<std::vector<double>, kOrderCap + 2>, kOrderCap + 2> levels;
  for (int m = 0; m <= kOrderCap + 1; ++m) {
    levels[m][0].assign(time_levels[m].begin(), time_levels[m].end());
    for (int k = 1; k + m <= kOrderCap + 2 && k <= kOrderCap + 1; ++k)
      levels[m][k] = derivative(grid, levels[m][k - 1]);
  }

  const CutoffPair cut = make_cutoffs(grid);
  const double iota = params.iota;

  EnergyReport report;
  report.time = state.time;
  for (const auto& [m, i] : energy_indices()) {
    const auto& upper = levels[m + 1][i];     // d_t^(m+1) d_y^i
    const auto& lower = levels[m][i];         // d_t^m d_y^i
    const auto& lower_y = levels[m][i + 1];   // d_t^m d_y^(i+1)
    EnergyEntry entry;
    entry.m = m;
    entry.i = i;
    entry.parts[0] = localized_sq(grid, upper, iota + i, {});
    entry.parts[1] = localized_sq(grid, lower, iota + i, {});
    entry.parts[2] = localized_sq(grid, lower_y, iota + i + 1, {});
    report.entries.push_back(entry);
    report.d1.push_back(localized_sq(grid, upper, 0.0, cut.zeta1) +
                        localized_sq(grid, lower_y, 0.0, cut.zeta1));
    report.d2.push_back(localized_sq(grid, upper, iota + i, cut.zeta2) +
                        localized_sq(grid, lower_y, iota + i + 1, cut.zeta2));
    report.e_total += entry.e();
    report.d_total += entry.d();
  }
  return report;
}

DecayFit fit_decay(std::span<const double> t, std::span<const double> energy, double t_lo,
                   double t_hi) {
  if (t.size() != energy.size()) throw DomainError("fit_decay: series length mismatch");
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (t[k] < t_lo || t[k] > t_hi) continue;
    if (!(energy[k] > 0.0)) {
      std::ostringstream msg;
      msg << "fit_decay: non-positive energy " << energy[k] << " at t = " << t[k];
      throw DomainError(msg.str());
    }
    xs.push_back(t[k]);
    ys.push_back(std::log(energy[k]));
  }
  if (xs.size() < 10) {
    std::ostringstream msg;
    msg << "fit_decay: need at least 10 samples in [" << t_lo << ", " << t_hi << "], got "
        << xs.size();
    throw DomainError(msg.str());
  }

  const double count = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    mx += xs[k];
    my += ys[k];
  }
  mx /= count;
  my /= count;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxx += (xs[k] - mx) * (xs[k] - mx);
    sxy += (xs[k] - mx) * (ys[k] - my);
    syy += (ys[k] - my) * (ys[k] - my);
  }
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double ss_res = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double r = ys[k] - (intercept + slope * xs[k]);
    ss_res += r * r;
  }

  DecayFit fit;
  fit.delta = slope == 0.0 ? 0.0 : -slope;
  fit.amplitude = std::exp(intercept);
  // A flat series has no variance to explain; report 0 by convention.
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 0.0;
  fit.t_lo = t_lo;
  fit.t_hi = t_hi;
  fit.samples = static_cast<int>(xs.size());
  return fit;
}

double density_deviation_weighted(const GasParams& params, const Grid1D& grid,
                                  const State1D& state) {
  const auto field = reconstruct_eulerian(params, grid, state);
  const auto y = grid.nodes();
  const auto w = derivative(grid, state.omega);
  double sup = 0.0;
  for (std::size_t j = 0; j < y.size(); ++j) {
    const double depth = params.hbar - y[j];
    double ratio;
    if (depth > 0.0) {
      const double rho_bar = std::pow(grid.sigma()[j], params.iota);
      ratio = std::abs(field.density[j] - rho_bar) / std::pow(depth, params.iota);
    } else {
      // Limit of the ratio at the vacuum node: nu^iota |w| / (1 + w).
      ratio = std::pow(params.nu, params.iota) * std::abs(w[j]) / (1.0 + w[j]);
    }
    sup = std::max(sup, ratio);
  }
  return sup;
}

BoundRatios pointwise_bound_report(const GasParams& params, const Grid1D& grid,
                                   const State1D& state, const DecayFit& fit, double e0) {
  if (!(e0 > 0.0)) throw DomainError("pointwise_bound_report: E(0) must be positive");
  BoundRatios r;
  r.scale = std::sqrt(std::exp(-fit.delta * state.time) * e0);
  r.density = density_deviation_weighted(params, grid, state) / r.scale;
  double vmax = 0.0;
  for (double v : state.vel) vmax = std::max(vmax, std::abs(v));
  r.velocity = vmax / r.scale;
  r.boundary = std::abs(state.omega.back()) / r.scale;
  return r;
}

}  // namespace vacuum
