#include "vacuum/identities.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "vacuum/errors.hpp"

namespace vacuum {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_dim(int dim) {
  if (dim != 2 && dim != 3) throw DomainError("flow samples support n = 2 or n = 3 only");
}

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

double TrigField::value(const Point& y) const {
  double sum = 0.0;
  for (int d = 0; d < dim_; ++d) sum += linear_[d] * y[d];
  for (const auto& t : terms_) {
    double prod = t.amp;
    for (int d = 0; d < dim_; ++d) prod *= std::sin(t.kappa[d] * y[d] + t.phase[d]);
    sum += prod;
  }
  return sum;
}

Eigen::VectorXd TrigField::gradient(const Point& y) const {
  Eigen::VectorXd g(dim_);
  for (int d = 0; d < dim_; ++d) g(d) = linear_[d];
  for (const auto& t : terms_) {
    std::array<double, 3> s{}, c{};
    for (int d = 0; d < dim_; ++d) {
      s[d] = std::sin(t.kappa[d] * y[d] + t.phase[d]);
      c[d] = std::cos(t.kappa[d] * y[d] + t.phase[d]);
    }
    for (int a = 0; a < dim_; ++a) {
      double prod = t.amp * t.kappa[a] * c[a];
      for (int d = 0; d < dim_; ++d)
        if (d != a) prod *= s[d];
      g(a) += prod;
    }
  }
  return g;
}

Eigen::MatrixXd TrigField::hessian(const Point& y) const {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim_, dim_);
  for (const auto& t : terms_) {
    std::array<double, 3> s{}, c{};
    for (int d = 0; d < dim_; ++d) {
      s[d] = std::sin(t.kappa[d] * y[d] + t.phase[d]);
      c[d] = std::cos(t.kappa[d] * y[d] + t.phase[d]);
    }
    for (int a = 0; a < dim_; ++a) {
      for (int b = 0; b < dim_; ++b) {
        double prod = t.amp;
        for (int d = 0; d < dim_; ++d) {
          if (d == a && d == b) prod *= -t.kappa[d] * t.kappa[d] * s[d];
          else if (d == a || d == b) prod *= t.kappa[d] * c[d];
          else prod *= s[d];
        }
        h(a, b) += prod;
      }
    }
  }
  return h;
}

TrigField TrigField::scaled(double c) const {
  auto terms = terms_;
  for (auto& t : terms) t.amp *= c;
  auto linear = linear_;
  for (auto& x : linear) x *= c;
  return TrigField(dim_, std::move(terms), linear);
}

TrigVectorField::TrigVectorField(std::vector<TrigField> components)
    : components_(std::move(components)) {
  require_dim(dim());
  for (const auto& c : components_)
    if (c.dim() != dim()) throw DomainError("component dimension mismatch");
}

Eigen::VectorXd TrigVectorField::value(const Point& y) const {
  Eigen::VectorXd v(dim());
  for (int r = 0; r < dim(); ++r) v(r) = components_[r].value(y);
  return v;
}

Eigen::MatrixXd TrigVectorField::jacobian(const Point& y) const {
  Eigen::MatrixXd m(dim(), dim());
  for (int r = 0; r < dim(); ++r) m.row(r) = components_[r].gradient(y).transpose();
  return m;
}

Eigen::MatrixXd TrigVectorField::jacobian_derivative(const Point& y, int r) const {
  Eigen::MatrixXd m(dim(), dim());
  for (int i = 0; i < dim(); ++i) m.row(i) = components_[i].hessian(y).row(r);
  return m;
}

TrigVectorField TrigVectorField::scaled(double c) const {
  std::vector<TrigField> comps;
  for (const auto& f : components_) comps.push_back(f.scaled(c));
  return TrigVectorField(std::move(comps));
}

TrigField random_trig_scalar(int dim, double hbar, std::mt19937_64& rng, int terms) {
  return random_trig_field(dim, hbar, rng, terms, false).component(0);
}

TrigVectorField random_trig_field(int dim, double hbar, std::mt19937_64& rng, int terms,
                                  bool clamp_bottom) {
  require_dim(dim);
  std::uniform_real_distribution<double> amp(-1.0, 1.0);
  std::uniform_real_distribution<double> phase(0.0, kTwoPi);
  std::uniform_int_distribution<int> wave(1, 3);
  std::uniform_real_distribution<double> vertical(0.5, 2.5);

  std::vector<TrigField> comps;
  for (int r = 0; r < dim; ++r) {
    std::vector<TrigField::Term> ts;
    for (int k = 0; k < terms; ++k) {
      TrigField::Term t;
      t.amp = amp(rng);
      for (int d = 0; d + 1 < dim; ++d) {
        t.kappa[d] = kTwoPi * wave(rng);
        t.phase[d] = phase(rng);
      }
      t.kappa[dim - 1] = vertical(rng) * std::numbers::pi / hbar;
      t.phase[dim - 1] = clamp_bottom ? 0.0 : phase(rng);
      ts.push_back(t);
    }
    comps.emplace_back(dim, std::move(ts));
  }
  return TrigVectorField(std::move(comps));
}

std::vector<Point> FlowSample::nodes() const {
  require_dim(dim);
  const int p = points_per_dim;
  std::vector<Point> out;
  const auto transverse = [p](int k) { return static_cast<double>(k) / p; };
  const auto vertical = [this, p](int k) { return hbar * k / (p - 1); };
  if (dim == 2) {
    for (int a = 0; a < p; ++a)
      for (int b = 0; b < p; ++b) out.push_back({transverse(a), vertical(b), 0.0});
  } else {
    for (int a = 0; a < p; ++a)
      for (int b = 0; b < p; ++b)
        for (int c = 0; c < p; ++c) out.push_back({transverse(a), transverse(b), vertical(c)});
  }
  return out;
}

double max_displacement_gradient(const FlowSample& sample) {
  double m = 0.0;
  for (const auto& y : sample.nodes()) m = std::max(m, sample.omega.jacobian(y).norm());
  return m;
}

FlowSample make_flow_sample(int dim, std::uint64_t seed, int points_per_dim, double hbar,
                            double target_slope) {
  require_dim(dim);
  if (points_per_dim < 4) throw DomainError("points_per_dim must be at least 4");
  if (!(target_slope > 0.0 && target_slope <= kMaxDisplacementGradient))
    throw DomainError("target_slope must lie in (0, 0.4]");
  std::mt19937_64 rng(seed);
  FlowSample s;
  s.dim = dim;
  s.points_per_dim = points_per_dim;
  s.hbar = hbar;
  s.omega = random_trig_field(dim, hbar, rng, 3, true);
  s.omega = s.omega.scaled(target_slope / max_displacement_gradient(s));

  // Velocity and probe fields normalized to unit gradient scale.
  const auto unit_gradient = [&s](const TrigVectorField& f) {
    double m = 0.0;
    for (const auto& y : s.nodes()) m = std::max(m, f.jacobian(y).norm());
    return f.scaled(1.0 / m);
  };
  s.vel = unit_gradient(random_trig_field(dim, hbar, rng, 3, true));
  s.probe = unit_gradient(random_trig_field(dim, hbar, rng, 3, false));
  s.probe_rate = unit_gradient(random_trig_field(dim, hbar, rng, 3, false));
  return s;
}

double seam_mismatch(const FlowSample& sample) {
  double worst = 0.0;
  for (const auto& y : sample.nodes()) {
    for (int d = 0; d + 1 < sample.dim; ++d) {
      Point shifted = y;
      shifted[d] += 1.0;
      worst = std::max(worst, max_abs(sample.omega.value(y) - sample.omega.value(shifted)));
    }
  }
  return worst;
}

JacobianField jacobian_and_inverse(const FlowSample& sample) {
  require_dim(sample.dim);
  const double margin = max_displacement_gradient(sample);
  if (margin > kMaxDisplacementGradient) {
    std::ostringstream msg;
    msg << "displacement gradient " << margin << " exceeds the invertibility margin";
    throw DomainError(msg.str());
  }
  JacobianField out;
  const int n = sample.dim;
  for (const auto& y : sample.nodes()) {
    const Eigen::MatrixXd dx = Eigen::MatrixXd::Identity(n, n) + sample.omega.jacobian(y);
    const auto lu = dx.partialPivLu();
    const double det = lu.determinant();
    if (!(std::abs(det) > 1e-14)) throw DomainError("singular Jacobian at a sample node");
    out.det.push_back(det);
    out.inverse.push_back(lu.inverse());
  }
  return out;
}

Eigen::VectorXd curl_of(const Eigen::MatrixXd& d) {
  if (d.rows() == 2) {
    Eigen::VectorXd c(1);
    c(0) = d(1, 0) - d(0, 1);
    return c;
  }
  // [curl]_i = eps_ijk d_j F^k = eps_ijk D(k, j)
  Eigen::VectorXd c(3);
  c(0) = d(2, 1) - d(1, 2);
  c(1) = d(0, 2) - d(2, 0);
  c(2) = d(1, 0) - d(0, 1);
  return c;
}

Eigen::Matrix3d adjugate_by_columns(const Eigen::Matrix3d& m) {
  Eigen::Matrix3d b;
  b.row(0) = m.col(1).cross(m.col(2)).transpose();
  b.row(1) = m.col(2).cross(m.col(0)).transpose();
  b.row(2) = m.col(0).cross(m.col(1)).transpose();
  return b;
}

JacobianCheck verify_jacobian_expansion(const FlowSample& sample) {
  const JacobianField jf = jacobian_and_inverse(sample);
  const int n = sample.dim;
  const auto nodes = sample.nodes();
  JacobianCheck check;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const Eigen::MatrixXd m = sample.omega.jacobian(nodes[k]);  // m(r, s) = d_s omega^r
    const double div = m.trace();
    const double curl_sq = curl_of(m).squaredNorm();
    const double grad_sq = m.squaredNorm();
    double expansion = 1.0 + div + 0.5 * (div * div + curl_sq - grad_sq);
    Eigen::MatrixXd adj = (1.0 + div) * Eigen::MatrixXd::Identity(n, n) - m;
    if (n == 3) {
      const Eigen::Matrix3d b = adjugate_by_columns(m);
      double contraction = 0.0;  // B^s_r d_s omega^r
      for (int s = 0; s < 3; ++s)
        for (int r = 0; r < 3; ++r) contraction += b(s, r) * m(r, s);
      expansion += contraction / 3.0;
      adj += b;
    }
    check.expansion = std::max(check.expansion, std::abs(jf.det[k] - expansion));
    check.adjugate = std::max(check.adjugate, max_abs(jf.det[k] * jf.inverse[k] - adj));
  }
  return check;
}

namespace {

// |grad_x F|^2 - |curl_x F|^2 with grad_x F = dF A.
double grad_minus_curl(const Eigen::MatrixXd& df, const Eigen::MatrixXd& a) {
  const Eigen::MatrixXd p = df * a;
  return p.squaredNorm() - curl_of(p).squaredNorm();
}

// A^k_r A^s_i (d_s F^r)(d_k G^i), summed index by index.
double contracted(const Eigen::MatrixXd& a, const Eigen::MatrixXd& df, const Eigen::MatrixXd& dg) {
  const int n = static_cast<int>(a.rows());
  double sum = 0.0;
  for (int k = 0; k < n; ++k)
    for (int r = 0; r < n; ++r)
      for (int s = 0; s < n; ++s)
        for (int i = 0; i < n; ++i) sum += a(k, r) * a(s, i) * df(r, s) * dg(i, k);
  return sum;
}

}  // namespace

NabResiduals verify_nab_identities(const FlowSample& sample, double dt_probe) {
  if (!sample.vel || !sample.probe || !sample.probe_rate)
    throw DomainError("verify_nab_identities needs velocity, probe and probe_rate fields");
  if (!(dt_probe > 0.0)) throw DomainError("dt_probe must be positive");
  const int n = sample.dim;
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  NabResiduals res;
  for (const auto& y : sample.nodes()) {
    const Eigen::MatrixXd dw = sample.omega.jacobian(y);
    const Eigen::MatrixXd dv = sample.vel->jacobian(y);
    const Eigen::MatrixXd df = sample.probe->jacobian(y);
    const Eigen::MatrixXd dft = sample.probe_rate->jacobian(y);

    const Eigen::MatrixXd a = (id + dw).inverse();
    const double lhs = contracted(a, df, df);
    res.nab = std::max(res.nab, std::abs(lhs - grad_minus_curl(df, a)));

    const double h = dt_probe;
    const Eigen::MatrixXd a_plus = (id + dw + h * dv).inverse();
    const Eigen::MatrixXd a_minus = (id + dw - h * dv).inverse();
    const double rate = (grad_minus_curl(df + h * dft, a_plus) -
                         grad_minus_curl(df - h * dft, a_minus)) / (2.0 * h);
    // [grad_x F^r]_i [grad_x v^s]_r [grad_x F^i]_s
    const Eigen::MatrixXd p = df * a;
    const Eigen::MatrixXd q = dv * a;
    double cubic = 0.0;
    for (int r = 0; r < n; ++r)
      for (int i = 0; i < n; ++i)
        for (int s = 0; s < n; ++s) cubic += p(r, i) * q(s, r) * p(i, s);
    const double lhs_t = contracted(a, df, dft);
    res.nabt = std::max(res.nabt, std::abs(lhs_t - (0.5 * rate + cubic)));
  }
  return res;
}

double measure_nabt_order(const FlowSample& sample, double dt_probe) {
  const double coarse = verify_nab_identities(sample, dt_probe).nabt;
  const double fine = verify_nab_identities(sample, 0.5 * dt_probe).nabt;
  return std::log2(coarse / fine);
}

namespace {

template <int N>
double curl_transport_fixed(const FlowSample& sample, const TrigField& q0, double horizon, int steps) {
  using Mat = Eigen::Matrix<double, N, N>;
  const double dt = horizon / steps;
  double worst = 0.0;
  for (const auto& y : sample.nodes()) {
    const Mat a = (Mat::Identity() + Mat(sample.omega.jacobian(y))).inverse();
    // h(k, r) = d_r [grad_x q0]_k with d_r A = -A (d_r dx/dy) A.
    const Eigen::Matrix<double, N, 1> dq = q0.gradient(y);
    const Mat hq = q0.hessian(y);
    Mat h;
    for (int r = 0; r < N; ++r) {
      const Mat da = -a * Mat(sample.omega.jacobian_derivative(y, r)) * a;
      h.col(r) = da.transpose() * dq + a.transpose() * hq.col(r);
    }

    const auto rhs = [&h](double t, const Mat& dv) -> Mat { return -dv - std::cos(t) * h; };
    Mat dv = sample.vel->jacobian(y);
    const Eigen::VectorXd w0 = curl_of(Eigen::MatrixXd(dv * a));
    double t = 0.0;
    for (int k = 0; k < steps; ++k) {
      const Mat k1 = rhs(t, dv);
      const Mat k2 = rhs(t + 0.5 * dt, dv + 0.5 * dt * k1);
      const Mat k3 = rhs(t + 0.5 * dt, dv + 0.5 * dt * k2);
      const Mat k4 = rhs(t + dt, dv + dt * k3);
      dv += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      t = (k + 1) * dt;
    }
    const Eigen::VectorXd w = curl_of(Eigen::MatrixXd(dv * a));
    worst = std::max(worst, (w - std::exp(-horizon) * w0).cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace

double verify_curl_transport(const FlowSample& sample, double horizon, int steps,
                             std::uint64_t forcing_seed) {
  if (!sample.vel) throw DomainError("verify_curl_transport needs a velocity field");
  if (!(horizon >= 0.0) || steps < 0) throw DomainError("invalid integration horizon");
  if (steps == 0) steps = std::max(1, static_cast<int>(std::ceil(100.0 * horizon)));
  std::mt19937_64 rng(forcing_seed);
  const TrigField q0 = random_trig_scalar(sample.dim, sample.hbar, rng, 3);
  return sample.dim == 2 ? curl_transport_fixed<2>(sample, q0, horizon, steps)
                         : curl_transport_fixed<3>(sample, q0, horizon, steps);
}

double curl_decay_scalar(double w0, double horizon, int steps) {
  if (steps < 1) throw DomainError("steps must be positive");
  const double factor = std::exp(-horizon / steps);
  double w = w0;
  for (int k = 0; k < steps; ++k) w *= factor;
  return w;
}

}  // namespace vacuum
