#pragma once

#include <span>
#include <vector>

#include "vacuum/model.hpp"

namespace vacuum {

enum class Spacing { Uniform, TopRefined };

/// Nodes on [0, hbar] with the degenerate weight sigma(y) = nu (hbar - y).
///
/// Top-refined grids are the image of a uniform parameter s in [0, 1] under
/// y = hbar (1 - (1-s)^2), so cells shrink linearly toward the vacuum node.
/// Trapezoid weights are stored on the grid; Simpson weights (taken in the
/// uniform parameter) are available for standalone checks.
class Grid1D {
 public:
  Grid1D(const GasParams& params, int n_cells, Spacing spacing);

  int n_cells() const { return n_cells_; }
  std::size_t size() const { return nodes_.size(); }
  Spacing spacing() const { return spacing_; }
  double hbar() const { return hbar_; }
  double nu() const { return nu_; }

  std::span<const double> nodes() const { return nodes_; }
  std::span<const double> sigma() const { return sigma_; }
  std::span<const double> quad_weights() const { return quad_weights_; }
  std::span<const double> simpson_weights() const { return simpson_weights_; }

  double min_spacing() const;

  /// Same node set (used to reject states from another grid).
  bool same_as(const Grid1D& other) const;

 private:
  int n_cells_;
  Spacing spacing_;
  double hbar_;
  double nu_;
  std::vector<double> nodes_;
  std::vector<double> sigma_;
  std::vector<double> quad_weights_;
  std::vector<double> simpson_weights_;
};

/// Throws DomainError when n_cells < 8.
Grid1D make_grid(const GasParams& params, int n_cells, Spacing spacing);

/// First derivative at the nodes: three-point Lagrange stencils, central in the
/// interior and one-sided at both ends. Exact for quadratics.
std::vector<double> derivative(const Grid1D& grid, std::span<const double> f);

/// k-fold application of derivative().
std::vector<double> derivative(const Grid1D& grid, std::span<const double> f, int order);

enum class Quadrature { Trapezoid, Simpson };

/// Sum of w_j f_j over the chosen rule.
double integrate(const Grid1D& grid, std::span<const double> f,
                 Quadrature rule = Quadrature::Trapezoid);

/// Integral of sigma^a f^2.
double weighted_l2_sq(const Grid1D& grid, std::span<const double> f, double a,
                      Quadrature rule = Quadrature::Trapezoid);

/// sum_{k <= b} integral sigma^a |d^k f|^2. b is capped at 3.
double weighted_norm_sq(const Grid1D& grid, std::span<const double> f, double a, int b,
                        Quadrature rule = Quadrature::Trapezoid);

/// [int sigma^k f^2] / [int sigma^(k+2) (f^2 + |f'|^2)]. Needs k > -1; throws
/// DomainError when the denominator vanishes.
double hardy_ratio(const Grid1D& grid, std::span<const double> f, double k,
                   Quadrature rule = Quadrature::Simpson);

/// Cut-offs with zeta1 = 1 on [0, hbar/2], 0 on [3hbar/4, hbar] and
/// zeta2 = 0 on [0, hbar/4], 1 on [hbar/2, hbar]. Transition bands use the
/// quintic smoothstep 6t^5 - 15t^4 + 10t^3 (C^2).
struct CutoffPair {
  std::vector<double> zeta1;
  std::vector<double> zeta2;
};

double smoothstep5(double t);
double cutoff_zeta1(double y, double hbar);
double cutoff_zeta2(double y, double hbar);

CutoffPair make_cutoffs(const Grid1D& grid);

}  // namespace vacuum
