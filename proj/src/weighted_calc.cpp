#include "vacuum/weighted_calc.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "vacuum/errors.hpp"

namespace vacuum {

namespace {

// Composite Simpson weights on n_cells uniform intervals of unit parameter
// length; odd counts close with a 3/8 panel.
std::vector<double> simpson_unit_weights(int n_cells) {
  std::vector<double> w(static_cast<std::size_t>(n_cells) + 1, 0.0);
  const double h = 1.0 / n_cells;
  int simpson_cells = n_cells;
  if (n_cells % 2 == 1) simpson_cells -= 3;
  for (int j = 0; j < simpson_cells; j += 2) {
    w[j] += h / 3.0;
    w[j + 1] += 4.0 * h / 3.0;
    w[j + 2] += h / 3.0;
  }
  if (simpson_cells != n_cells) {
    const int j = simpson_cells;
    w[j] += 3.0 * h / 8.0;
    w[j + 1] += 9.0 * h / 8.0;
    w[j + 2] += 9.0 * h / 8.0;
    w[j + 3] += 3.0 * h / 8.0;
  }
  return w;
}

// Derivative of the three-point Lagrange interpolant through (x0,x1,x2) at x.
double lagrange3_slope(double x, double x0, double x1, double x2, double f0, double f1,
                       double f2) {
  const double l0 = ((x - x1) + (x - x2)) / ((x0 - x1) * (x0 - x2));
  const double l1 = ((x - x0) + (x - x2)) / ((x1 - x0) * (x1 - x2));
  const double l2 = ((x - x0) + (x - x1)) / ((x2 - x0) * (x2 - x1));
  return l0 * f0 + l1 * f1 + l2 * f2;
}

}  // namespace

Grid1D::Grid1D(const GasParams& params, int n_cells, Spacing spacing)
    : n_cells_(n_cells), spacing_(spacing), hbar_(params.hbar), nu_(params.nu) {
  if (n_cells < 8) {
    std::ostringstream msg;
    msg << "n_cells must be at least 8 (got " << n_cells << ")";
    throw DomainError(msg.str());
  }
  const auto count = static_cast<std::size_t>(n_cells) + 1;
  nodes_.resize(count);
  sigma_.resize(count);
  quad_weights_.assign(count, 0.0);

  // Jacobian dy/ds of the node map, used for Simpson in the parameter.
  std::vector<double> jac(count);
  for (std::size_t j = 0; j < count; ++j) {
    const double s = static_cast<double>(j) / n_cells;
    if (spacing == Spacing::Uniform) {
      nodes_[j] = hbar_ * s;
      jac[j] = hbar_;
    } else {
      nodes_[j] = hbar_ * (1.0 - (1.0 - s) * (1.0 - s));
      jac[j] = 2.0 * hbar_ * (1.0 - s);
    }
  }
  nodes_.front() = 0.0;
  nodes_.back() = hbar_;
  for (std::size_t j = 0; j < count; ++j) sigma_[j] = nu_ * (hbar_ - nodes_[j]);

  for (std::size_t j = 0; j + 1 < count; ++j) {
    const double h = nodes_[j + 1] - nodes_[j];
    quad_weights_[j] += 0.5 * h;
    quad_weights_[j + 1] += 0.5 * h;
  }

  simpson_weights_ = simpson_unit_weights(n_cells);
  for (std::size_t j = 0; j < count; ++j) simpson_weights_[j] *= jac[j];
}

double Grid1D::min_spacing() const {
  double h = nodes_[1] - nodes_[0];
  for (std::size_t j = 1; j + 1 < nodes_.size(); ++j) h = std::min(h, nodes_[j + 1] - nodes_[j]);
  return h;
}

bool Grid1D::same_as(const Grid1D& other) const {
  return n_cells_ == other.n_cells_ && spacing_ == other.spacing_ && hbar_ == other.hbar_ &&
         nu_ == other.nu_;
}

Grid1D make_grid(const GasParams& params, int n_cells, Spacing spacing) {
  return Grid1D(params, n_cells, spacing);
}

std::vector<double> derivative(const Grid1D& grid, std::span<const double> f) {
  const auto y = grid.nodes();
  const std::size_t n = y.size();
  if (f.size() != n) throw DomainError("field size does not match grid");
  std::vector<double> df(n);
  df[0] = lagrange3_slope(y[0], y[0], y[1], y[2], f[0], f[1], f[2]);
  for (std::size_t j = 1; j + 1 < n; ++j)
    df[j] = lagrange3_slope(y[j], y[j - 1], y[j], y[j + 1], f[j - 1], f[j], f[j + 1]);
  df[n - 1] = lagrange3_slope(y[n - 1], y[n - 3], y[n - 2], y[n - 1], f[n - 3], f[n - 2], f[n - 1]);
  return df;
}

std::vector<double> derivative(const Grid1D& grid, std::span<const double> f, int order) {
  std::vector<double> out(f.begin(), f.end());
  for (int k = 0; k < order; ++k) out = derivative(grid, out);
  return out;
}

double integrate(const Grid1D& grid, std::span<const double> f, Quadrature rule) {
  const auto w = rule == Quadrature::Trapezoid ? grid.quad_weights() : grid.simpson_weights();
  if (f.size() != w.size()) throw DomainError("field size does not match grid");
  double sum = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) sum += w[j] * f[j];
  return sum;
}

double weighted_l2_sq(const Grid1D& grid, std::span<const double> f, double a, Quadrature rule) {
  const auto sigma = grid.sigma();
  std::vector<double> integrand(f.size());
  for (std::size_t j = 0; j < f.size(); ++j) {
    // 0^0 = 1 so a = 0 gives the plain L2 norm up to the top node.
    const double w = a == 0.0 ? 1.0 : std::pow(sigma[j], a);
    integrand[j] = w * f[j] * f[j];
  }
  return integrate(grid, integrand, rule);
}

double weighted_norm_sq(const Grid1D& grid, std::span<const double> f, double a, int b,
                        Quadrature rule) {
  if (!(a >= 0.0)) throw DomainError("weight exponent a must be non-negative");
  if (b < 0 || b > 3) throw DomainError("derivative order b must be in [0, 3]");
  std::vector<double> dk(f.begin(), f.end());
  double total = weighted_l2_sq(grid, dk, a, rule);
  for (int k = 1; k <= b; ++k) {
    dk = derivative(grid, dk);
    total += weighted_l2_sq(grid, dk, a, rule);
  }
  return total;
}

double hardy_ratio(const Grid1D& grid, std::span<const double> f, double k, Quadrature rule) {
  if (!(k > -1.0)) throw DomainError("Hardy exponent k must exceed -1");
  const auto sigma = grid.sigma();
  const auto df = derivative(grid, f);
  std::vector<double> num(f.size()), den(f.size());
  for (std::size_t j = 0; j < f.size(); ++j) {
    // For -1 < k < 0 the top-node weight is infinite; the continuum integrand
    // is integrable there and the node carries no quadrature mass in the limit.
    num[j] = sigma[j] > 0.0 || k > 0.0 ? std::pow(sigma[j], k) * f[j] * f[j]
                                       : (k == 0.0 ? f[j] * f[j] : 0.0);
    den[j] = std::pow(sigma[j], k + 2.0) * (f[j] * f[j] + df[j] * df[j]);
  }
  const double denominator = integrate(grid, den, rule);
  if (!(denominator > 0.0)) throw DomainError("Hardy ratio: denominator vanishes");
  return integrate(grid, num, rule) / denominator;
}

double smoothstep5(double t) {
  t = std::clamp(t, 0.0, 1.0);
  return t * t * t * (t * (6.0 * t - 15.0) + 10.0);
}

double cutoff_zeta1(double y, double hbar) {
  return 1.0 - smoothstep5((y - 0.5 * hbar) / (0.25 * hbar));
}

double cutoff_zeta2(double y, double hbar) {
  return smoothstep5((y - 0.25 * hbar) / (0.25 * hbar));
}

CutoffPair make_cutoffs(const Grid1D& grid) {
  CutoffPair c;
  c.zeta1.reserve(grid.size());
  c.zeta2.reserve(grid.size());
  for (double y : grid.nodes()) {
    c.zeta1.push_back(cutoff_zeta1(y, grid.hbar()));
    c.zeta2.push_back(cutoff_zeta2(y, grid.hbar()));
  }
  return c;
}

}  // namespace vacuum
