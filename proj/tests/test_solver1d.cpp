#include <cmath>
#include <numbers>

#include "doctest.h"
#include "vacuum/errors.hpp"
#include "vacuum/solver1d.hpp"

using namespace vacuum;

namespace {

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

RunConfig make_config(int n, double M = 1.0, Model model = Model::EulerDamped) {
  const auto p = derive_constants(2.0, 1.0, M);
  RunConfig c{.params = p, .grid = Grid1D(p, n, Spacing::Uniform)};
  c.model = model;
  return c;
}

// Semi-discrete energy of the flux form, built from closed-form cell masses:
//   1/2 sum m_j v_j^2 + sum_cells h sigma_mid^(iota+1) Q(w), Q' = 1 - (1+w)^-gamma.
double scheme_energy(const RunConfig& c, const State1D& s) {
  const auto& p = c.params;
  const auto y = c.grid.nodes();
  const std::size_t n = y.size();
  const auto above = [&](double at) { return std::pow(p.nu, p.iota) * std::pow(p.hbar - at, p.iota + 1) / (p.iota + 1); };
  double kinetic = 0.0, potential = 0.0;
  for (std::size_t j = 1; j < n; ++j) {
    const double lo = 0.5 * (y[j - 1] + y[j]);
    const double hi = j + 1 < n ? 0.5 * (y[j] + y[j + 1]) : p.hbar;
    kinetic += 0.5 * (above(lo) - above(hi)) * s.vel[j] * s.vel[j];
    const double h = y[j] - y[j - 1];
    const double w = (s.omega[j] - s.omega[j - 1]) / h;
    const double q = w + (std::pow(1 + w, 1 - p.gamma) - 1) / (p.gamma - 1);
    potential += h * std::pow(p.nu * (p.hbar - lo), p.iota + 1) * q;
  }
  return kinetic + potential;
}

}  // namespace

TEST_CASE("zero state is an exact fixed point of both models for 1e4 steps") {
  for (auto model : {Model::EulerDamped, Model::Darcy}) {
    const auto c = make_config(40, 1.0, model);
    State1D s = State1D::zero(c.grid);
    const double dt = 0.5 * (model == Model::EulerDamped ? cfl_limit_euler(c.params, c.grid, s, c.cfl_safety)
                                                         : cfl_limit_darcy(c.params, c.grid, c.cfl_safety));
    for (int k = 0; k < 10000; ++k)
      s = model == Model::EulerDamped ? step_euler_damped(c, s, dt) : step_darcy(c, s, dt);
    CHECK(max_abs(s.omega) == 0.0);
    CHECK(max_abs(s.vel) == 0.0);
  }
}

TEST_CASE("zero displacement with velocity gives pure damping") {
  const auto c = make_config(30);
  State1D s = State1D::zero(c.grid);
  for (std::size_t j = 1; j < s.vel.size(); ++j) s.vel[j] = std::sin(3.0 * c.grid.nodes()[j]);
  const auto a = rhs_acceleration(c.params, c.grid, s);
  for (std::size_t j = 0; j < a.size(); ++j) CHECK(a[j] == -s.vel[j]);
}

TEST_CASE("acceleration matches the linearization for small data") {
  // omega = eps phi with phi = s^3 (4 - 3s), s = y / hbar. The linear operator is
  // gamma sigma phi'' - nu (iota + 1) gamma phi'.
  const auto c = make_config(20000);
  const auto& p = c.params;
  const double eps = 1e-6;
  State1D s = State1D::zero(c.grid);
  std::vector<double> lin(c.grid.size());
  for (std::size_t j = 0; j < s.omega.size(); ++j) {
    const double y = c.grid.nodes()[j];
    const double u = y / p.hbar;
    s.omega[j] = eps * u * u * u * (4 - 3 * u);
    s.vel[j] = j == 0 ? 0.0 : 1e-7 * u;
    const double d1 = eps * (12 * u * u - 12 * u * u * u) / p.hbar;
    const double d2 = eps * (24 * u - 36 * u * u) / (p.hbar * p.hbar);
    lin[j] = -s.vel[j] + p.gamma * p.nu * (p.hbar - y) * d2 - p.nu * (p.iota + 1) * p.gamma * d1;
  }
  lin[0] = 0.0;
  const auto a = rhs_acceleration(p, c.grid, s);
  // The nodes next to the vacuum see first-order consistency only.
  double err = 0.0, edge = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double d = std::abs(a[j] - lin[j]);
    if (c.grid.nodes()[j] <= 0.99 * p.hbar) err = std::max(err, d);
    else edge = std::max(edge, d);
  }
  CHECK(err / max_abs(lin) < 1e-5);
  CHECK(edge / max_abs(lin) < 1e-3);
}

TEST_CASE("bottom node stays pinned after every step") {
  auto c = make_config(60);
  c.init.vel_amplitude = 2e-3;
  State1D s = make_initial_state(c.grid, c.init);
  const double dt = 0.8 * cfl_limit_euler(c.params, c.grid, s, c.cfl_safety);
  for (int k = 0; k < 500; ++k) {
    s = step_euler_damped(c, s, dt);
    REQUIRE(s.omega[0] == 0.0);
    REQUIRE(s.vel[0] == 0.0);
  }
  auto d = make_config(30, 1.0, Model::Darcy);
  State1D r = make_initial_state(d.grid, d.init);
  const double ddt = cfl_limit_darcy(d.params, d.grid, d.cfl_safety);
  for (int k = 0; k < 500; ++k) {
    r = step_darcy(d, r, ddt);
    REQUIRE(r.omega[0] == 0.0);
    REQUIRE(r.vel[0] == 0.0);
  }
}

TEST_CASE("one step from pure velocity matches a fine reference") {
  const auto c = make_config(50);
  State1D s = State1D::zero(c.grid);
  for (std::size_t j = 1; j < s.vel.size(); ++j) s.vel[j] = 1e-3 * std::sin(0.7 * c.grid.nodes()[j]);
  const double dt = 0.5 * cfl_limit_euler(c.params, c.grid, s, c.cfl_safety);
  const State1D coarse = step_euler_damped(c, s, dt);
  State1D fine = s;
  for (int k = 0; k < 1000; ++k) fine = step_euler_damped(c, fine, dt / 1000);
  double diff = 0.0, damp = 0.0;
  for (std::size_t j = 0; j < s.vel.size(); ++j) {
    diff = std::max(diff, std::abs(coarse.vel[j] - fine.vel[j]));
    damp = std::max(damp, std::abs(coarse.vel[j] - std::exp(-dt) * s.vel[j]));
  }
  CHECK(diff < 1e-3 * dt * dt * 10);
  // The flux correction is O(dt^2) relative to the damped velocity.
  CHECK(damp < 1e-3 * dt * dt * 10);
}

TEST_CASE("time step above the stability limit is rejected") {
  const auto c = make_config(40);
  const State1D s = make_initial_state(c.grid, c.init);
  const double limit = cfl_limit_euler(c.params, c.grid, s, c.cfl_safety);
  try {
    (void)step_euler_damped(c, s, 1.01 * limit);
    FAIL("expected a CFL violation");
  } catch (const SolverError& e) {
    CHECK(e.kind() == SolverError::Kind::CflViolation);
  }
  const auto d = make_config(40, 1.0, Model::Darcy);
  CHECK_THROWS_AS(step_darcy(d, s, 1.01 * cfl_limit_darcy(d.params, d.grid, d.cfl_safety)), SolverError);
}

TEST_CASE("Euler stability limit follows the documented formula") {
  const auto c = make_config(40);
  const State1D s = State1D::zero(c.grid);
  const double cmax = std::sqrt(c.params.gamma * c.grid.sigma()[0]);
  CHECK(cfl_limit_euler(c.params, c.grid, s, 0.5) == doctest::Approx(0.5 * c.grid.min_spacing() / (cmax + 1e-12)));
  CHECK(cfl_limit_darcy(c.params, c.grid, 0.5) ==
        doctest::Approx(0.5 * std::pow(c.grid.min_spacing(), 2) / (2 * c.params.gamma * c.grid.sigma()[0])));
}

TEST_CASE("damped run decays") {
  auto c = make_config(200);
  c.t_final = 30.0;
  const auto r = run(c);
  double v5 = -1, v30 = -1;
  for (const auto& snap : r.snapshots) {
    if (std::abs(snap.state.time - 5.0) < 1e-9) v5 = max_abs(snap.state.vel);
    if (std::abs(snap.state.time - 30.0) < 1e-9) v30 = max_abs(snap.state.vel);
  }
  REQUIRE(v5 > 0.0);
  CHECK(v30 < v5);
  CHECK(r.snapshots.back().state.time == 30.0);
}

TEST_CASE("scheme energy decreases step by step at small amplitude") {
  auto c = make_config(100);
  c.init.amplitude = 1e-4;
  State1D s = make_initial_state(c.grid, c.init);
  const double dt = 0.9 * cfl_limit_euler(c.params, c.grid, s, c.cfl_safety);
  double e = scheme_energy(c, s);
  for (int k = 0; k < 4000; ++k) {
    s = step_euler_damped(c, s, dt);
    const double next = scheme_energy(c, s);
    REQUIRE(next <= e + 1e-9);
    e = next;
  }
}

TEST_CASE("undamped leapfrog conserves the scheme energy to second order") {
  auto c = make_config(60);
  c.damping = false;
  const State1D s0 = make_initial_state(c.grid, c.init);
  const double e0 = scheme_energy(c, s0);
  const double base = 0.8 * cfl_limit_euler(c.params, c.grid, s0, c.cfl_safety);
  std::vector<double> drift;
  for (double dt : {base, base / 2, base / 4}) {
    State1D s = s0;
    double worst = 0.0;
    const int steps = static_cast<int>(std::round(3.0 / dt));
    for (int k = 0; k < steps; ++k) {
      s = step_euler_damped(c, s, dt);
      worst = std::max(worst, std::abs(scheme_energy(c, s) - e0) / e0);
    }
    drift.push_back(worst);
  }
  CHECK(drift[0] < 1e-2);
  CHECK(std::log2(drift[0] / drift[1]) == doctest::Approx(2.0).epsilon(0.1));
  CHECK(std::log2(drift[1] / drift[2]) == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("Darcy flow relaxes a compressed state") {
  auto c = make_config(40, 1.0, Model::Darcy);
  c.init.amplitude = -1e-4;
  c.init.family = InitFamily::PolynomialBump;
  State1D s = make_initial_state(c.grid, c.init);
  const double dt = cfl_limit_darcy(c.params, c.grid, c.cfl_safety);
  double prev = max_abs(derivative(c.grid, s.omega));
  for (int k = 0; k < 20000; ++k) {
    s = step_darcy(c, s, dt);
    if (k % 100 == 99) {
      const double now = max_abs(derivative(c.grid, s.omega));
      REQUIRE(now < prev);
      prev = now;
    }
  }
}

TEST_CASE("Darcy and damped Euler runs approach each other") {
  auto e = make_config(40);
  e.t_final = 20.0;
  auto d = e;
  d.model = Model::Darcy;
  const auto re = run(e);
  const auto rd = run(d);
  const auto diff_at = [&](double t) {
    for (std::size_t k = 0; k < re.snapshots.size(); ++k)
      if (std::abs(re.snapshots[k].state.time - t) < 1e-9)
        for (const auto& s : rd.snapshots)
          if (std::abs(s.state.time - t) < 1e-9) {
            double m = 0.0;
            for (std::size_t j = 0; j < s.state.omega.size(); ++j)
              m = std::max(m, std::abs(s.state.omega[j] - re.snapshots[k].state.omega[j]));
            return m;
          }
    return -1.0;
  };
  const double d1 = diff_at(1.0), d20 = diff_at(20.0);
  REQUIRE(d1 > 0.0);
  REQUIRE(d20 >= 0.0);
  CHECK(d20 < d1);
}

TEST_CASE("automatic stepping records on round times") {
  auto c = make_config(50);
  c.t_final = 2.0;
  const auto r = run(c);
  REQUIRE(r.snapshots.size() == 21);
  for (std::size_t k = 0; k < r.snapshots.size(); ++k)
    CHECK(r.snapshots[k].state.time == doctest::Approx(0.1 * k).epsilon(1e-12));
  const State1D s0 = make_initial_state(c.grid, c.init);
  CHECK(r.dt <= 0.9 * cfl_limit_euler(c.params, c.grid, s0, c.cfl_safety) * (1 + 1e-12));
}

TEST_CASE("runs are bitwise reproducible") {
  auto c = make_config(80);
  c.t_final = 3.0;
  const auto a = run(c);
  const auto b = run(c);
  REQUIRE(a.snapshots.size() == b.snapshots.size());
  for (std::size_t k = 0; k < a.snapshots.size(); ++k) {
    CHECK(a.snapshots[k].state.omega == b.snapshots[k].state.omega);
    CHECK(a.snapshots[k].energy.e_total == b.snapshots[k].energy.e_total);
  }
}

TEST_CASE("zero data run stays at equilibrium") {
  auto c = make_config(40);
  c.init.amplitude = 0.0;
  c.t_final = 5.0;
  for (const auto& s : run(c).snapshots) {
    CHECK(s.boundary == c.params.hbar);
    CHECK(s.energy.e_total == 0.0);
  }
}

TEST_CASE("initial data gates") {
  const auto c = make_config(40);
  InitialData big;
  big.amplitude = 0.5;  // slope 0.5 * pi / 4 ~ 0.39 passes, 0.6 does not
  CHECK_NOTHROW(make_initial_state(c.grid, big));
  big.amplitude = 0.6;
  CHECK_THROWS_AS(make_initial_state(c.grid, big), DomainError);

  InitialData table;
  table.family = InitFamily::CustomTable;
  table.table_y = {0.0, 1.0, 2.0};
  table.table_omega = {1e-3, 0.0, 0.0};
  table.table_vel = {0.0, 0.0, 0.0};
  CHECK_THROWS_WITH_AS(make_initial_state(c.grid, table), doctest::Contains("vanish"), DomainError);
  table.table_omega = {0.0, 1e-3, 2e-3};
  CHECK_NOTHROW(make_initial_state(c.grid, table));
  table.table_y = {0.0, 1.0, 1.5};
  CHECK_THROWS_AS(make_initial_state(c.grid, table), DomainError);
}

TEST_CASE("a collapsing run reports the failure time") {
  auto c = make_config(40);
  State1D s = State1D::zero(c.grid);
  for (std::size_t j = 1; j < s.vel.size(); ++j) s.vel[j] = -3.0 * std::pow(c.grid.nodes()[j] / c.params.hbar, 8);
  c.t_final = 5.0;
  try {
    (void)run(c, s);
    FAIL("expected the run to break down");
  } catch (const SolverError& e) {
    REQUIRE(e.time().has_value());
    CHECK(*e.time() > 0.0);
    CHECK(*e.time() < 5.0);
  }
}

TEST_CASE("config validation") {
  auto c = make_config(20);
  c.t_final = -1;
  CHECK_THROWS_AS(validate(c), DomainError);
  c = make_config(20);
  c.cfl_safety = 1.5;
  CHECK_THROWS_AS(validate(c), DomainError);
  c = make_config(20);
  c.params = derive_constants(2.0, 1.0, 2.0);  // grid built for another hbar
  CHECK_THROWS_AS(validate(c), DomainError);
}
