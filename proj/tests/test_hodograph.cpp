#include <doctest.h>

#include <cmath>
#include <numbers>

#include "shockrom/error.hpp"
#include "shockrom/hodograph.hpp"

using namespace shockrom;

namespace {

EulerianField sample(const Grid1D& grid, auto&& fn, double t = 0.0) {
  std::vector<double> v(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) v[j] = fn(grid.node(j));
  return EulerianField(grid, t, std::move(v));
}

double gaussian(double x) { return 0.5 + 0.5 * std::exp(-(x - 0.3) * (x - 0.3) / 0.01); }

// Hodograph of 1 - tanh(x / delta) on a range trimmed away from 0 and 2.
MonotoneBranch tanh_branch(double delta, std::size_t points, double trim = 1e-8) {
  return make_branch(Direction::decreasing, {trim, 2.0 - trim}, points,
                     [&](double u) { return 0.5 * delta * std::log((2.0 - u) / u); });
}

// u(x, t) of a pre-shock Burgers profile: root of x0(u) + t u = x.
double solve_level(const std::function<double(double)>& x0, double t, double x, double lo,
                   double hi) {
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if ((x0(mid) + t * mid - x > 0.0) == (x0(lo) + t * lo - x > 0.0)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("sine splits into three branches at its extrema") {
  const double two_pi = 2.0 * std::numbers::pi;
  const Grid1D grid(0.0, two_pi, 2000);
  const auto d = decompose_field(sample(grid, [](double x) { return 1.0 + std::sin(x); }), 500);
  REQUIRE(d.branches.size() == 3);
  CHECK(d.branches[0].direction == Direction::increasing);
  CHECK(d.branches[1].direction == Direction::decreasing);
  CHECK(d.branches[2].direction == Direction::increasing);
  CHECK(std::abs(grid.node(d.node_ranges[0].second) - std::numbers::pi / 2) < grid.dx());
  CHECK(std::abs(grid.node(d.node_ranges[1].second) - 1.5 * std::numbers::pi) < grid.dx());
  // Adjacent branches share the extremum node.
  CHECK(d.node_ranges[0].second == d.node_ranges[1].first);
  CHECK(d.branches[0].u_hi == d.branches[1].u_hi);
  for (const auto& b : d.branches) {
    CHECK(b.size() == 500);
    CHECK_NOTHROW(b.validate());
  }
}

TEST_CASE("monotone data give a single branch") {
  const Grid1D grid(0.0, 1.0, 101);
  const auto d = decompose_field(sample(grid, [](double x) { return 1.0 - x * x; }), 50);
  REQUIRE(d.branches.size() == 1);
  CHECK(d.branches[0].direction == Direction::decreasing);
  CHECK(d.branches[0].u_lo == doctest::Approx(0.0));
  CHECK(d.branches[0].u_hi == doctest::Approx(1.0));
}

TEST_CASE("gaussian splits at its peak and strips the flat tail") {
  const Grid1D grid(0.0, 2.0, 2000);
  const auto d = decompose_field(sample(grid, gaussian), 2000);
  REQUIRE(d.branches.size() == 2);
  CHECK(d.branches[0].direction == Direction::increasing);
  CHECK(d.branches[1].direction == Direction::decreasing);
  CHECK(std::abs(grid.node(d.node_ranges[0].second) - 0.3) < grid.dx());
  CHECK(d.far_field.right == 0.5);
  CHECK(d.far_field.left == doctest::Approx(gaussian(0.0)));
}

TEST_CASE("wide plateaus are not invertible") {
  const Grid1D grid(0.0, 1.0, 101);
  const auto f = sample(grid, [](double x) {
    if (x < 0.4) return 2.0 - x;
    if (x < 0.6) return 1.6;
    return 1.6 - (x - 0.6);
  });
  try {
    (void)decompose_monotone(f, 50);
    FAIL("expected non_invertible_data");
  } catch (const Error& e) {
    CHECK(e.category() == ErrorCategory::non_invertible_data);
  }
}

TEST_CASE("round trip through the hodograph is second-order accurate") {
  double prev = 0.0;
  for (std::size_t j : {201, 401, 801}) {
    const Grid1D grid(0.0, 1.0, j);
    auto u = [](double x) { return std::exp(-x) + 0.2 * x; };
    const auto f = sample(grid, u);
    const auto b = decompose_monotone(f, j).front();
    const auto back = sample_branch(b, grid.nodes());
    double err = 0.0;
    for (std::size_t i = 0; i < j; ++i) err = std::max(err, std::abs(back[i] - f.values[i]));
    const double h = std::max(grid.dx(), b.du());
    CHECK(err <= 1.0 * h * h);
    if (prev > 0.0) CHECK(err < 0.5 * prev);
    prev = err;
  }
}

TEST_CASE("shock formation time of tanh data is delta") {
  for (double delta : {0.05, 0.01, 0.002}) {
    const auto ft = shock_formation_time(tanh_branch(delta, 2000), FluxModel::burgers());
    CHECK(std::abs(ft.t_star - delta) < 1e-6);
    CHECK(ft.u_star == doctest::Approx(1.0).epsilon(1e-3));
  }
}

TEST_CASE("linear hodograph: flat minimum resolves to the midpoint") {
  const auto b = make_branch(Direction::decreasing, {0.0, 1.0}, 101, [](double u) { return -u; });
  const auto ft = shock_formation_time(b, FluxModel::burgers());
  CHECK(ft.t_star == doctest::Approx(1.0));
  CHECK(ft.u_star == doctest::Approx(0.5));
}

TEST_CASE("spreading branches never form shocks; coarse ones are rejected") {
  const auto up = make_branch(Direction::increasing, {0.0, 1.0}, 11, [](double u) { return u; });
  CHECK(std::isinf(shock_formation_time(up, FluxModel::burgers()).t_star));
  const auto coarse = make_branch(Direction::decreasing, {0.0, 1.0}, 4, [](double u) { return -u; });
  try {
    (void)shock_formation_time(coarse, FluxModel::burgers());
    FAIL("expected resolution error");
  } catch (const Error& e) {
    CHECK(e.category() == ErrorCategory::resolution);
  }
}

TEST_CASE("formation time of an evolved branch is unchanged") {
  const auto b = tanh_branch(0.05, 1000);
  const auto later = evolve_branch(b, FluxModel::burgers(), 0.02);
  CHECK(shock_formation_time(later, FluxModel::burgers()).t_star ==
        doctest::Approx(shock_formation_time(b, FluxModel::burgers()).t_star).epsilon(1e-9));
}

TEST_CASE("evolve_branch moves each level with its own speed") {
  const auto b = make_branch(Direction::decreasing, {0.0, 1.0}, 3, [](double u) { return -u; });
  CHECK(evolve_branch(b, FluxModel::burgers(), 0.0).x_of_u == b.x_of_u);
  const auto e = evolve_branch(b, FluxModel::burgers(), 0.2);
  CHECK(e.x_of_u[1] - b.x_of_u[1] == doctest::Approx(0.1));
  CHECK(e.t == doctest::Approx(0.2));
  // Exact slope update for Burgers: dx/du gains t at every mesh point.
  const auto lin = make_branch(Direction::decreasing, {0.0, 1.0}, 51,
                               [](double u) { return -2.0 * u + 0.3 * u * u; });
  const auto s0 = lin.slopes();
  const auto s1 = evolve_branch(lin, FluxModel::burgers(), 0.7).slopes();
  for (std::size_t k = 0; k < s0.size(); ++k) CHECK(std::abs(s1[k] - s0[k] - 0.7) < 1e-12);
}

TEST_CASE("shock limits open at u* and stay symmetric for odd data") {
  const FluxModel m = FluxModel::burgers();
  const auto b = tanh_branch(0.05, 4001);
  ShockState st = shock_at_formation(b, m);
  CHECK(st.u1 == st.u_star);
  CHECK(st.u2 == st.u_star);
  double last_u1 = st.u1;
  double last_u2 = st.u2;
  for (int n = 0; n < 50; ++n) {
    st = advance_shock_limits(st, b, b, m, 0.002);
    CHECK(std::abs(st.u1 + st.u2 - 2.0 * st.u_star) < 1e-8);
    CHECK(st.u1 >= last_u1);
    CHECK(st.u2 <= last_u2);
    CHECK(st.u1 >= st.u_star);
    CHECK(st.u2 <= st.u_star);
    last_u1 = st.u1;
    last_u2 = st.u2;
  }
  // x* stays at the centre of the symmetric fan of characteristics.
  CHECK(std::abs(st.x_star - st.t) < 1e-6);
}

TEST_CASE("limits pinned on the rails stay there") {
  const FluxModel m = FluxModel::burgers();
  const auto b = tanh_branch(1e-3, 2000, 1e-9);
  ShockState st;
  st.t = st.t_star = 0.1;
  st.u_star = 1.0;
  st.u1 = b.u_hi;
  st.u2 = b.u_lo;
  st.x_star = 0.1;
  for (int n = 0; n < 20; ++n) st = advance_shock_limits(st, b, b, m, 0.01);
  CHECK(std::abs(st.u1 - 2.0) < 1e-6);
  CHECK(std::abs(st.u2 - 0.0) < 1e-6);
  CHECK(st.x_star == doctest::Approx(0.3).epsilon(1e-6));
}

TEST_CASE("shock position uses the Rankine-Hugoniot speed") {
  ShockState st;
  st.u1 = 2.0;
  st.u2 = 0.0;
  st = advance_shock_position(st, FluxModel::burgers(), 0.5);
  CHECK(st.x_star == doctest::Approx(0.5));
  const FluxModel bl = FluxModel::buckley_leverett(0.5);
  ShockState front;
  front.u1 = std::sqrt(1.0 / 3.0);
  front.u2 = 0.0;
  front = advance_shock_position(front, bl, 1.0);
  CHECK(front.x_star == doctest::Approx(bl.speed(front.u1)).epsilon(1e-10));
  ShockState gone;
  gone.u2 = 0.3;
  gone.u1 = 0.3 + 1e-15;
  try {
    (void)advance_shock_position(gone, FluxModel::burgers(), 0.1);
    FAIL("expected shock_vanished");
  } catch (const Error& e) {
    CHECK(e.category() == ErrorCategory::shock_vanished);
  }
}

TEST_CASE("profile crossings") {
  const auto b = make_branch(Direction::decreasing, {0.0, 1.0}, 3, [](double u) { return -u; });
  const std::vector<MonotoneBranch> branches{b};
  const WaveProfile p(branches, {1.5, -0.5});
  // Spatial order: u = 1, 0.5, 0 at x = -1, -0.5, 0.
  REQUIRE(p.size() == 3);
  CHECK(p.x()[0] == -1.0);
  CHECK(p.first_crossing(-2.0).u == 1.5);
  CHECK(p.first_crossing(-0.75).u == doctest::Approx(0.75));
  CHECK(p.last_crossing(-0.75).u == doctest::Approx(0.75));
  CHECK(p.last_crossing(3.0).u == -0.5);
}

TEST_CASE("pre-shock assembly matches the characteristic solution") {
  const FluxModel m = FluxModel::burgers();
  const double delta = 0.05;
  const Grid1D grid(-0.5, 1.5, 2000);
  auto x0 = [&](double u) { return 0.5 * delta * std::log((2.0 - u) / u); };
  const double trim = 1e-6;
  const auto b = evolve_branch(tanh_branch(delta, 2000, trim), m, 0.5 * delta);
  const std::vector<MonotoneBranch> branches{b};
  const auto f = assemble_solution(branches, {}, grid, {2.0, 0.0}, 0.5 * delta);
  double err = 0.0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double x = grid.node(j);
    if (x < b.x_of_u.back() || x > b.x_of_u.front()) continue;
    err = std::max(err, std::abs(f.values[j] - solve_level(x0, 0.5 * delta, x, trim, 2.0 - trim)));
  }
  CHECK(err < 5e-3);
}

TEST_CASE("riemann shock assembly at t = 0.5") {
  const FluxModel m = FluxModel::burgers();
  const Grid1D grid(-0.5, 1.5, 2000);
  const auto b = evolve_branch(tanh_branch(0.005, 2000, 1e-10), m, 0.5);
  ShockState s;
  s.t = 0.5;
  s.x_star = 0.5;
  s.u1 = 2.0;
  s.u2 = 0.0;
  const std::vector<MonotoneBranch> branches{b};
  const std::vector<ShockState> shocks{s};
  const auto f = assemble_solution(branches, shocks, grid, {2.0, 0.0}, 0.5);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double x = grid.node(j);
    if (x < 0.5 - grid.dx()) CHECK(f.values[j] == doctest::Approx(2.0));
    if (x > 0.5 + grid.dx()) CHECK(f.values[j] == doctest::Approx(0.0));
  }
}

TEST_CASE("rarefaction fan assembly") {
  const FluxModel m = FluxModel::burgers();
  const double delta = 1e-4;
  const Grid1D grid(-1.0, 1.0, 2000);
  const double t = 0.5;
  // Hodograph of -tanh(x / delta): increasing from -1 to 1.
  const auto b0 = make_branch(Direction::increasing, {-1.0 + 1e-9, 1.0 - 1e-9}, 2000,
                              [&](double u) { return delta * std::atanh(u); });
  const std::vector<MonotoneBranch> branches{evolve_branch(b0, m, t)};
  const auto f = assemble_solution(branches, {}, grid, {-1.0, 1.0}, t);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double x = grid.node(j);
    const double exact = x < -t ? -1.0 : (x > t ? 1.0 : x / t);
    CHECK(std::abs(f.values[j] - exact) < 1e-2);
  }
}

TEST_CASE("overturned branches without a shock cannot be assembled") {
  const FluxModel m = FluxModel::burgers();
  const auto b = evolve_branch(tanh_branch(0.01, 500), m, 0.5);
  const std::vector<MonotoneBranch> branches{b};
  try {
    (void)assemble_solution(branches, {}, Grid1D(-0.5, 1.5, 100), {2.0, 0.0}, 0.5);
    FAIL("expected reconstruction error");
  } catch (const Error& e) {
    CHECK(e.category() == ErrorCategory::reconstruction);
  }
}

TEST_CASE("shock tracker agrees with the limit ODEs on the gaussian") {
  const FluxModel m = FluxModel::burgers();
  const Grid1D grid(0.0, 2.0, 2000);
  const auto d = decompose_field(sample(grid, gaussian), 2000);
  REQUIRE(d.branches.size() == 2);
  ShockTracker tracker(d.branches, d.far_field, m, 1);
  const double t_star = tracker.state().t_star;
  CHECK(t_star == doctest::Approx(0.2332).epsilon(5e-3));

  ShockState ode = shock_at_formation(d.branches[1], m);
  const double t_end = 0.35;  // before the shock reaches the peak
  const std::size_t steps = 200;
  const double h = (t_end - t_star) / steps;
  double u1_prev = ode.u1;
  double u2_prev = ode.u2;
  for (std::size_t n = 0; n < steps; ++n) {
    ode = advance_shock_limits(ode, d.branches[1], d.branches[1], m, h);
    CHECK(ode.u1 >= u1_prev - 1e-12);
    CHECK(ode.u2 <= u2_prev + 1e-12);
    u1_prev = ode.u1;
    u2_prev = ode.u2;
  }
  tracker.advance_to(t_end, h);
  CHECK(std::abs(tracker.state().x_star - ode.x_star) < 2e-4);
  CHECK(std::abs(tracker.state().u1 - ode.u1) < 2e-3);
  CHECK(std::abs(tracker.state().u2 - ode.u2) < 2e-3);

  // The absorbed levels are exactly those between the two limits.
  const auto profile = tracker.profile_at(t_end);
  std::vector<MonotoneBranch> now;
  for (const auto& b : d.branches) now.push_back(evolve_branch(b, m, t_end));
  const std::vector<ShockState> shocks{tracker.state()};
  const auto absorbed = absorbed_levels(now, shocks, d.far_field);
  const auto& dec = now[1];
  for (std::size_t k = 0; k < dec.size(); k += 37) {
    const double u = dec.u_mesh[k];
    const bool inside = u > tracker.state().u2 + 1e-3 && u < tracker.state().u1 - 1e-3;
    const bool outside = u < tracker.state().u2 - 1e-3 || u > tracker.state().u1 + 1e-3;
    if (inside) CHECK(absorbed[1][k]);
    if (outside) CHECK_FALSE(absorbed[1][k]);
  }
}

TEST_CASE("mass balance places the jump of a collapsed ramp") {
  // u0 = 1 - x on [0, 1], 1 to the left and 0 to the right: every
  // characteristic meets at t = 1, x = 1; afterwards the jump 1|0 moves at
  // speed 1/2. On [-1, 3] the mass starts at 1.5 and gains f(1) - f(0) = 1/2
  // per unit time.
  const FluxModel m = FluxModel::burgers();
  const auto ramp = make_branch(Direction::decreasing, {0.0, 1.0}, 101, [](double u) { return 1.0 - u; });
  const Interval domain{-1.0, 3.0};
  const BoundaryStates far{1.0, 0.0};

  const std::vector<MonotoneBranch> early{evolve_branch(ramp, m, 0.5)};
  const WaveProfile smooth(early, far);
  CHECK(selection_mass(smooth, 0.0, domain) == doctest::Approx(1.75).epsilon(1e-12));
  CHECK_FALSE(conserving_jump(smooth, 1.75, domain, 1.0));

  const double t = 2.0;
  const std::vector<MonotoneBranch> late{evolve_branch(ramp, m, t)};
  const WaveProfile folded(late, far);
  CHECK(selection_mass(folded, 1.2, domain) == doctest::Approx(2.2).epsilon(1e-12));
  const auto xs = conserving_jump(folded, 1.5 + 0.5 * t, domain, 1.4);
  REQUIRE(xs);
  CHECK(*xs == doctest::Approx(1.0 + 0.5 * (t - 1.0)).epsilon(1e-12));
  const ShockState s = shock_from_profile(folded, t, *xs);
  CHECK(s.u1 == doctest::Approx(1.0));
  CHECK(s.u2 == doctest::Approx(0.0));
  // A budget outside the fold's range has no compressive jump.
  CHECK_FALSE(conserving_jump(folded, 10.0, domain, 1.4));
}
