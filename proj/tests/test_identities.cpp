#include <cmath>
#include <random>

#include "doctest.h"
#include "vacuum/errors.hpp"
#include "vacuum/identities.hpp"

using namespace vacuum;

namespace {

TrigVectorField zero_field(int dim) {
  return TrigVectorField(std::vector<TrigField>(static_cast<std::size_t>(dim), TrigField(dim, {})));
}

// omega^r(y) = sum_s m(r, s) y_s
TrigVectorField linear_field(const Eigen::MatrixXd& m) {
  std::vector<TrigField> comps;
  const int n = static_cast<int>(m.rows());
  for (int r = 0; r < n; ++r) {
    std::array<double, 3> lin{};
    for (int s = 0; s < n; ++s) lin[s] = m(r, s);
    comps.emplace_back(n, std::vector<TrigField::Term>{}, lin);
  }
  return TrigVectorField(std::move(comps));
}

FlowSample sample_with(int dim, TrigVectorField omega, int ppd = 8) {
  FlowSample s;
  s.dim = dim;
  s.points_per_dim = ppd;
  s.omega = std::move(omega);
  return s;
}

}  // namespace

TEST_CASE("zero displacement gives J = 1 and A = I") {
  for (int dim : {2, 3}) {
    const auto jf = jacobian_and_inverse(sample_with(dim, zero_field(dim)));
    for (std::size_t k = 0; k < jf.det.size(); ++k) {
      CHECK(jf.det[k] == 1.0);
      CHECK((jf.inverse[k] - Eigen::MatrixXd::Identity(dim, dim)).norm() == 0.0);
    }
    const auto check = verify_jacobian_expansion(sample_with(dim, zero_field(dim)));
    CHECK(check.expansion == 0.0);
    CHECK(check.adjugate == 0.0);
  }
}

TEST_CASE("diagonal linear field in 2D") {
  const double a = 0.13, b = -0.21;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  const auto s = sample_with(2, linear_field(m));
  const auto jf = jacobian_and_inverse(s);
  for (double det : jf.det) CHECK(det == doctest::Approx((1 + a) * (1 + b)).epsilon(1e-15));
  CHECK(verify_jacobian_expansion(s).expansion < 1e-15);
}

TEST_CASE("general linear field in 3D matches det(I + M)") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-0.12, 0.12);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::MatrixXd m(3, 3);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) m(r, c) = u(rng);
    const double det = (Eigen::Matrix3d::Identity() + Eigen::Matrix3d(m)).determinant();
    const auto s = sample_with(3, linear_field(m), 4);
    const auto jf = jacobian_and_inverse(s);
    CHECK(jf.det.front() == doctest::Approx(det).epsilon(1e-14));
    const auto check = verify_jacobian_expansion(s);
    CHECK(check.expansion < 1e-14);
    CHECK(check.adjugate < 1e-14);
  }
}

TEST_CASE("adjugate by columns equals det times inverse") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::Matrix3d m;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) m(r, c) = u(rng);
    const Eigen::Matrix3d oracle = m.determinant() * m.inverse();
    CHECK((adjugate_by_columns(m) - oracle).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("random samples: inverse, periodicity and margin") {
  for (int dim : {2, 3}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto s = make_flow_sample(dim, seed, 8);
      CHECK(max_displacement_gradient(s) == doctest::Approx(0.3));
      CHECK(seam_mismatch(s) < 1e-12);
      const auto jf = jacobian_and_inverse(s);
      const auto nodes = s.nodes();
      for (std::size_t k = 0; k < nodes.size(); ++k) {
        const Eigen::MatrixXd dx = Eigen::MatrixXd::Identity(dim, dim) + s.omega.jacobian(nodes[k]);
        CHECK((jf.inverse[k] * dx - Eigen::MatrixXd::Identity(dim, dim)).cwiseAbs().maxCoeff() < 1e-12);
      }
      // Bottom clamp: omega vanishes on y_n = 0.
      CHECK(s.omega.value(nodes.front()).cwiseAbs().maxCoeff() < 1e-15);
    }
  }
  CHECK_THROWS_AS(make_flow_sample(2, 1, 8, 1.0, 0.5), DomainError);
  CHECK_THROWS_AS(make_flow_sample(4, 1), DomainError);
  auto s = make_flow_sample(3, 1, 6);
  s.omega = s.omega.scaled(2.0);
  CHECK_THROWS_AS(jacobian_and_inverse(s), DomainError);
}

TEST_CASE("Jacobian expansion is exact on random fields at two resolutions") {
  for (int dim : {2, 3}) {
    for (int ppd : {16, 24}) {
      for (std::uint64_t seed = 10; seed < 13; ++seed) {
        const auto check = verify_jacobian_expansion(make_flow_sample(dim, seed, ppd));
        CHECK(check.expansion < 1e-12);
        CHECK(check.adjugate < 1e-12);
      }
    }
  }
}

TEST_CASE("flat gradient/curl identity") {
  // sum_rs d_s F^r d_r F^s = |dF|^2 - |curl F|^2 for any matrix, n = 2, 3.
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int n : {2, 3}) {
    Eigen::MatrixXd d(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) d(r, c) = u(rng);
    double lhs = 0.0;
    for (int r = 0; r < n; ++r)
      for (int s = 0; s < n; ++s) lhs += d(r, s) * d(s, r);
    CHECK(lhs == doctest::Approx(d.squaredNorm() - curl_of(d).squaredNorm()).epsilon(1e-14));
  }
}

TEST_CASE("nab identities: trivial cases") {
  for (int dim : {2, 3}) {
    auto s = make_flow_sample(dim, 3, 8);
    auto zero_probe = s;
    zero_probe.probe = zero_field(dim);
    zero_probe.probe_rate = zero_field(dim);
    const auto r0 = verify_nab_identities(zero_probe, 1e-2);
    CHECK(r0.nab == 0.0);
    CHECK(r0.nabt == 0.0);

    auto flat = s;
    flat.omega = zero_field(dim);
    CHECK(verify_nab_identities(flat, 1e-2).nab < 1e-13);
  }
}

TEST_CASE("nab identities: exactness and second-order time probe") {
  for (int dim : {2, 3}) {
    for (std::uint64_t seed = 20; seed < 25; ++seed) {
      const auto s = make_flow_sample(dim, seed, 10);
      const auto r = verify_nab_identities(s, 1e-2);
      CHECK(r.nab < 1e-12);
      CHECK(r.nabt > 0.0);
      const double order = measure_nabt_order(s, 1e-2);
      CHECK(order >= 1.9);
      CHECK(order <= 2.2);
    }
  }
  auto bare = make_flow_sample(2, 1, 8);
  bare.probe.reset();
  CHECK_THROWS_AS(verify_nab_identities(bare, 1e-2), DomainError);
  CHECK_THROWS_AS(verify_nab_identities(make_flow_sample(2, 1, 8), 0.0), DomainError);
}

TEST_CASE("scalar curl decay") {
  CHECK(std::abs(curl_decay_scalar(1.0, 2.0, 1000) - 0.1353352832366127) < 1e-10);
  CHECK(curl_decay_scalar(0.0, 5.0, 10) == 0.0);
  CHECK_THROWS_AS(curl_decay_scalar(1.0, 1.0, 0), DomainError);
}

TEST_CASE("curl transport") {
  for (int dim : {2, 3}) {
    auto s = make_flow_sample(dim, 42, 8);
    CHECK(verify_curl_transport(s, 5.0) <= 1e-8);
    // Zero initial velocity: the gradient forcing is curl-free, so w stays 0.
    s.vel = zero_field(dim);
    CHECK(verify_curl_transport(s, 5.0) <= 1e-12);
  }
  auto bare = make_flow_sample(2, 1, 8);
  bare.vel.reset();
  CHECK_THROWS_AS(verify_curl_transport(bare, 1.0), DomainError);
}

TEST_CASE("curl transport error shrinks with the step count") {
  const auto s = make_flow_sample(3, 8, 6);
  const double coarse = verify_curl_transport(s, 5.0, 50);
  const double fine = verify_curl_transport(s, 5.0, 100);
  CHECK(fine < coarse);
  CHECK(std::log2(coarse / fine) > 3.5);
}
