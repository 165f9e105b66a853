#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace vacuum {

using Point = std::array<double, 3>;

/// Closed-form scalar field sum_t amp_t prod_d sin(kappa_td y_d + phase_td) + linear . y
/// with exact first and second derivatives.
class TrigField {
 public:
  struct Term {
    double amp = 0.0;
    std::array<double, 3> kappa{};
    std::array<double, 3> phase{};
  };

  TrigField() = default;
  TrigField(int dim, std::vector<Term> terms, std::array<double, 3> linear = {})
      : dim_(dim), terms_(std::move(terms)), linear_(linear) {}

  int dim() const { return dim_; }
  const std::vector<Term>& terms() const { return terms_; }

  double value(const Point& y) const;
  Eigen::VectorXd gradient(const Point& y) const;
  Eigen::MatrixXd hessian(const Point& y) const;

  TrigField scaled(double c) const;

 private:
  int dim_ = 0;
  std::vector<Term> terms_;
  std::array<double, 3> linear_{};
};

/// n-component field built from TrigFields. jacobian(y)(r, s) = d_s F^r.
class TrigVectorField {
 public:
  TrigVectorField() = default;
  explicit TrigVectorField(std::vector<TrigField> components);

  int dim() const { return static_cast<int>(components_.size()); }
  const TrigField& component(int r) const { return components_[static_cast<std::size_t>(r)]; }

  Eigen::VectorXd value(const Point& y) const;
  Eigen::MatrixXd jacobian(const Point& y) const;
  /// d_r of the jacobian: (i, k) entry is d_r d_k F^i.
  Eigen::MatrixXd jacobian_derivative(const Point& y, int r) const;

  TrigVectorField scaled(double c) const;

 private:
  std::vector<TrigField> components_;
};

/// Random field on T^(n-1) x (0, hbar): integer transverse wave numbers on
/// the unit torus; with clamp_bottom every term vanishes at y_n = 0.
TrigVectorField random_trig_field(int dim, double hbar, std::mt19937_64& rng, int terms,
                                  bool clamp_bottom);
TrigField random_trig_scalar(int dim, double hbar, std::mt19937_64& rng, int terms);

/// Displacement omega (plus optional velocity, probe field F and its rate dF/dt)
/// sampled on a tensor grid, periodic in the first n-1 directions.
struct FlowSample {
  int dim = 2;
  int points_per_dim = 16;
  double hbar = 1.0;
  TrigVectorField omega;
  std::optional<TrigVectorField> vel;
  std::optional<TrigVectorField> probe;
  std::optional<TrigVectorField> probe_rate;

  std::vector<Point> nodes() const;
};

/// Invertibility margin: max Frobenius norm of d omega on the nodes.
inline constexpr double kMaxDisplacementGradient = 0.4;

/// Seeded sample whose omega is scaled to max |d omega| = target_slope.
FlowSample make_flow_sample(int dim, std::uint64_t seed, int points_per_dim = 16,
                            double hbar = 1.0, double target_slope = 0.3);

double max_displacement_gradient(const FlowSample& sample);

/// Largest |F(y) - F(y + e_d)| over the transverse seams.
double seam_mismatch(const FlowSample& sample);

struct JacobianField {
  std::vector<double> det;
  /// A = (dx/dy)^-1, A(k, i) = dy^k/dx^i.
  std::vector<Eigen::MatrixXd> inverse;
};

/// J and A at every node by dense LU. Throws DomainError on a singular node or
/// when the invertibility margin is violated.
JacobianField jacobian_and_inverse(const FlowSample& sample);

/// Flat curl of a matrix of derivatives D(k, j) = d_j F^k:
/// n = 2 gives one component, n = 3 three.
Eigen::VectorXd curl_of(const Eigen::MatrixXd& grad);

/// Adjugate of a 3x3 matrix built row-wise from cross products of its columns.
Eigen::Matrix3d adjugate_by_columns(const Eigen::Matrix3d& m);

struct JacobianCheck {
  /// max |J - expansion|
  double expansion = 0.0;
  /// max |J A - ((1 + div omega) I - d omega + delta_n3 B)|
  double adjugate = 0.0;
};

JacobianCheck verify_jacobian_expansion(const FlowSample& sample);

struct NabResiduals {
  double nab = 0.0;
  double nabt = 0.0;
};

/// Checks the gradient/curl identity along the flow map exactly, and its time
/// derivative by central differences with omega(t) = omega + t v and
/// F(t) = F + t dF/dt. Requires vel, probe and probe_rate.
NabResiduals verify_nab_identities(const FlowSample& sample, double dt_probe);

/// log2(res(h) / res(h/2)) of the time-derivative identity.
double measure_nabt_order(const FlowSample& sample, double dt_probe);

/// Integrates the velocity gradient under frozen A with damping and a
/// time-dependent gradient force,
///   d_t v = -v - grad_x q,   q = cos(t) q0(y),
/// by RK4 and returns max |curl_x v(T) - e^{-T} curl_x v(0)|. steps = 0 uses
/// 100 steps per unit time.
double verify_curl_transport(const FlowSample& sample, double horizon, int steps = 0,
                             std::uint64_t forcing_seed = 0);

/// Exact-exponential stepping of w' = -w for a single value.
double curl_decay_scalar(double w0, double horizon, int steps);

}  // namespace vacuum
