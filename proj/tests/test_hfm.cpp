#include <doctest.h>

#include <cmath>
#include <numeric>

#include "shockrom/error.hpp"
#include "shockrom/hfm.hpp"

using namespace shockrom;

namespace {

EulerianField sample(const Grid1D& grid, auto&& fn) {
  std::vector<double> v(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) v[j] = fn(grid.node(j));
  return EulerianField(grid, 0.0, std::move(v));
}

double total_variation(const std::vector<double>& v) {
  double tv = 0.0;
  for (std::size_t j = 1; j < v.size(); ++j) tv += std::abs(v[j] - v[j - 1]);
  return tv;
}

}  // namespace

TEST_CASE("upwind leaves a constant state unchanged") {
  const Grid1D grid(0.0, 1.0, 11);
  const EulerianField f(grid, 0.0, std::vector<double>(11, 0.7));
  const auto next = upwind_step(f, FluxModel::burgers(), 0.05);
  for (double v : next.values) CHECK(v == 0.7);
  CHECK(next.t == doctest::Approx(0.05));
}

TEST_CASE("upwind step on [2,2,0,0] by hand") {
  const Grid1D grid(0.0, 3.0, 4);  // dx = 1
  const EulerianField f(grid, 0.0, {2.0, 2.0, 0.0, 0.0});
  const auto next = upwind_step(f, FluxModel::burgers(), 0.25);
  CHECK(next.values[1] == doctest::Approx(2.0));
  CHECK(next.values[2] == doctest::Approx(0.5));
  CHECK(next.values[0] == doctest::Approx(2.0));
  CHECK(next.values[3] == doctest::Approx(0.0));
}

TEST_CASE("interface flux picks the upwind side for positive speeds") {
  const FluxModel m = FluxModel::burgers();
  CHECK(interface_flux(m, 2.0, 0.0) == doctest::Approx(2.0));
  CHECK(interface_flux(m, 1.0, 3.0) == doctest::Approx(0.5));
  CHECK(interface_flux(m, -1.0, -3.0) == doctest::Approx(4.5));
}

TEST_CASE("CFL violation reports the admissible step") {
  const Grid1D grid(0.0, 1.0, 11);
  const EulerianField f(grid, 0.0, std::vector<double>(11, 2.0));
  try {
    (void)upwind_step(f, FluxModel::burgers(), 0.1);
    FAIL("expected StepRejected");
  } catch (const StepRejected& e) {
    CHECK(e.category() == ErrorCategory::step_rejected);
    CHECK(e.admissible_dt() == doctest::Approx(0.05));
    CHECK(e.requested_dt() == doctest::Approx(0.1));
  }
}

TEST_CASE("upwind mass changes only by the boundary fluxes") {
  const Grid1D grid(0.0, 2.0, 401);
  auto field = sample(grid, [](double x) { return 0.5 + 0.5 * std::exp(-(x - 0.3) * (x - 0.3) / 0.01); });
  const FluxModel m = FluxModel::burgers();
  const BoundaryStates ghosts{field.values.front(), field.values.back()};
  const double dt = 0.9 * max_stable_dt(field, m, ghosts);
  for (int n = 0; n < 200; ++n) {
    const double before = field.mass();
    const double inflow = interface_flux(m, ghosts.left, field.values.front());
    const double outflow = interface_flux(m, field.values.back(), ghosts.right);
    field = upwind_step(field, m, dt, ghosts);
    CHECK(std::abs(field.mass() - (before - dt * (outflow - inflow))) < 1e-12);
  }
}

TEST_CASE("riemann shock travels at the Rankine-Hugoniot speed") {
  const Grid1D grid(-0.5, 1.5, 801);
  const auto u0 = sample(grid, [](double x) { return x < 0.0 ? 2.0 : 0.0; });
  const FluxModel m = FluxModel::burgers();
  const std::size_t steps = 1000;  // CFL 0.8
  double tv = total_variation(u0.values);
  bool tv_ok = true;
  std::vector<double> last;
  march_upwind(u0, m, steps, 1.0, {}, [&](std::size_t, const EulerianField& f) {
    const double now = total_variation(f.values);
    tv_ok = tv_ok && now <= tv + 1e-12;
    tv = now;
    last = f.values;
  });
  CHECK(tv_ok);
  // Shock centre: where u crosses the mean state.
  std::size_t j = 0;
  while (last[j] > 1.0) ++j;
  const double x_shock = grid.node(j - 1) + (last[j - 1] - 1.0) / (last[j - 1] - last[j]) * grid.dx();
  CHECK(std::abs(x_shock - 1.0) < 2.0 * grid.dx());
}

TEST_CASE("run_upwind returns N+1 fields and keeps constant data") {
  const Grid1D grid(0.0, 1.0, 21);
  const auto fields = run_upwind([](double) { return 0.3; }, grid, 10, 0.5, FluxModel::burgers());
  REQUIRE(fields.size() == 11);
  CHECK(fields.back().t == doctest::Approx(0.5));
  for (const auto& f : fields) {
    for (double v : f.values) CHECK(v == 0.3);
  }
}

TEST_CASE("substeps keep a coarse output cadence stable") {
  const Grid1D grid(0.0, 2.0, 201);
  const auto u0 = sample(grid, [](double x) { return 0.5 * (1.0 - std::tanh((x - 1.0) / 0.05)); });
  const FluxModel bl = FluxModel::buckley_leverett(0.5);
  CHECK_THROWS_AS(run_upwind(u0, bl, 50, 0.5), StepRejected);
  UpwindOptions opt;
  opt.substeps = 3;
  opt.record_every = 10;
  const auto fields = run_upwind(u0, bl, 50, 0.5, opt);
  CHECK(fields.size() == 6);
  CHECK(fields.back().t == doctest::Approx(0.5));
}

TEST_CASE("naive Lagrangian step translates with the carried speed") {
  MovingGrid g{0.0, {0.0, 1.0, 2.0}, {0.5, 0.5, 0.5}};
  const auto next = naive_lagrangian_step(g, 0.2);
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(next.x[j] == doctest::Approx(g.x[j] + 0.1));
    CHECK(next.u[j] == g.u[j]);
  }
  const auto single = naive_lagrangian_step(MovingGrid{0.0, {0.0}, {1.0}}, 0.1);
  CHECK(single.x[0] == doctest::Approx(0.1));
}

TEST_CASE("naive Lagrangian grid overturns after the shock time") {
  const std::size_t n = 400;
  MovingGrid g;
  for (std::size_t j = 0; j < n; ++j) {
    const double x = 2.0 * static_cast<double>(j) / static_cast<double>(n - 1);
    g.x.push_back(x);
    g.u.push_back(0.5 + 0.5 * std::exp(-(x - 0.3) * (x - 0.3) / 0.01));
  }
  const auto early = run_lagrangian(g, 0.01, 10, LagrangianScheme::naive);
  CHECK(early.back().is_monotone());
  const auto late = run_lagrangian(g, 0.01, 50, LagrangianScheme::naive);
  CHECK_FALSE(late.back().is_monotone());
  CHECK(late.back().u == g.u);
}

TEST_CASE("BSLM step on a hat by hand") {
  MovingGrid g{0.0, {0.0, 1.0, 2.0}, {0.0, 1.0, 0.0}};
  BslmDiagnostics diag;
  const auto next = bslm_step(g, 0.5, FluxModel::burgers(), &diag);
  // x* = 1.25; u(x*, t^n) = 0.75; predictor grid {0, 1.5, 2} gives 1.25/1.5.
  CHECK(next.x[1] == doctest::Approx(1.0 + 0.25 * (0.75 + 1.25 / 1.5)));
  CHECK(next.x[0] == doctest::Approx(0.0));
  CHECK(next.x[2] == doctest::Approx(2.0));
  CHECK(next.u == g.u);
  CHECK(diag.clamped_queries == 0);
}

TEST_CASE("BSLM translates constant data and flags clamped queries") {
  MovingGrid g{0.0, {0.0, 0.5, 1.0}, {1.0, 1.0, 1.0}};
  BslmDiagnostics diag;
  const auto next = bslm_step(g, 0.1, FluxModel::burgers(), &diag);
  for (std::size_t j = 0; j < 3; ++j) CHECK(next.x[j] == doctest::Approx(g.x[j] + 0.1));
  CHECK(diag.clamped_queries >= 1);  // the last node looks beyond the grid
}

TEST_CASE("BSLM keeps the Gaussian grid single-valued past the shock time") {
  const std::size_t n = 400;
  MovingGrid g;
  for (std::size_t j = 0; j < n; ++j) {
    const double x = 2.0 * static_cast<double>(j) / static_cast<double>(n - 1);
    g.x.push_back(x);
    g.u.push_back(0.5 + 0.5 * std::exp(-(x - 0.3) * (x - 0.3) / 0.01));
  }
  const auto traj = run_lagrangian(g, 0.002, 250, LagrangianScheme::bslm);
  CHECK(traj.back().u == g.u);
  std::size_t reversals = 0;
  for (std::size_t j = 1; j < n; ++j) reversals += traj.back().x[j] < traj.back().x[j - 1];
  const auto naive = run_lagrangian(g, 0.002, 250, LagrangianScheme::naive);
  std::size_t naive_reversals = 0;
  for (std::size_t j = 1; j < n; ++j) naive_reversals += naive.back().x[j] < naive.back().x[j - 1];
  CHECK(reversals < naive_reversals);
}

TEST_CASE("characteristics of a linear branch") {
  const auto b = make_branch(Direction::decreasing, {0.0, 1.0}, 11, [](double u) { return -u; });
  const auto at0 = solve_characteristics(b, FluxModel::burgers(), 0.0);
  for (std::size_t k = 0; k < b.size(); ++k) CHECK(at0.x[k] == b.x_of_u[k]);
  const auto half = solve_characteristics(b, FluxModel::burgers(), 0.5);
  for (std::size_t k = 0; k < b.size(); ++k) {
    CHECK(half.x[k] == doctest::Approx(-0.5 * b.u_mesh[k]));
  }
  try {
    (void)solve_characteristics(b, FluxModel::burgers(), 1.0);
    FAIL("expected shock_formed");
  } catch (const Error& e) {
    CHECK(e.category() == ErrorCategory::shock_formed);
  }
}

TEST_CASE("tanh branch stays decreasing before t* = delta") {
  const double delta = 0.01;
  const auto b = make_branch(Direction::decreasing, {1e-6, 2.0 - 1e-6}, 2001,
                             [&](double u) { return 0.5 * delta * std::log((2.0 - u) / u); });
  const auto g = solve_characteristics(b, FluxModel::burgers(), 0.5 * delta);
  bool decreasing = true;
  for (std::size_t k = 1; k < g.size(); ++k) decreasing = decreasing && g.x[k] < g.x[k - 1];
  CHECK(decreasing);
  // dx/du = x0' + t f' at every level.
  const auto evolved = evolve_branch(b, FluxModel::burgers(), 0.5 * delta);
  const auto s0 = b.slopes();
  const auto s1 = evolved.slopes();
  for (std::size_t k = 1; k + 1 < b.size(); k += 50) {
    CHECK(std::abs(s1[k] - (s0[k] + 0.5 * delta)) < 1e-6);
  }
}

TEST_CASE("periodic runs conserve mass and keep the seam consistent") {
  const double two_pi = 2.0 * M_PI;
  const Grid1D grid(0.0, two_pi, 401);
  auto u0 = sample(grid, [](double x) { return 1.0 + std::sin(x); });
  u0.values.back() = u0.values.front();  // sin(2 pi) is not exactly zero
  auto mass = [](const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end() - 1, 0.0);
  };
  UpwindOptions opt;
  opt.periodic = true;
  const auto fields = run_upwind(u0, FluxModel::burgers(), 200, 0.8, opt);
  for (const auto& f : fields) {
    CHECK(f.values.front() == f.values.back());
    CHECK(std::abs(mass(f.values) - mass(u0.values)) < 1e-10);
  }
}
