#include <doctest.h>

#include <cmath>

#include "shockrom/error.hpp"
#include "shockrom/rom.hpp"

using namespace shockrom;

namespace {

EulerianField sample(const Grid1D& grid, auto&& fn, double t = 0.0) {
  std::vector<double> v(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) v[j] = fn(grid.node(j));
  return EulerianField(grid, t, std::move(v));
}

// Lagrangian nodes translated rigidly with speed c.
SnapshotMatrix translation(std::size_t nodes, std::size_t snaps, double c, double dt) {
  Eigen::MatrixXd data(static_cast<Eigen::Index>(nodes), static_cast<Eigen::Index>(snaps));
  for (std::size_t n = 0; n < snaps; ++n) {
    for (std::size_t j = 0; j < nodes; ++j) {
      data(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(n)) =
          static_cast<double>(j) / static_cast<double>(nodes - 1) + c * dt * static_cast<double>(n);
    }
  }
  return SnapshotMatrix(std::move(data), dt, 0.0);
}

HodographProblem riemann_problem(std::size_t nodes, double delta) {
  const Grid1D grid(-0.5, 1.5, nodes);
  const double trim = 1e-10;
  HodographProblem p{FluxModel::burgers(), grid, {}, {2.0, 0.0}, {}};
  p.branches.push_back(make_branch(Direction::decreasing, {trim, 2.0 - trim}, nodes,
                                   [&](double u) { return 0.5 * delta * std::log((2.0 - u) / u); }));
  p.shock.kind = ShockSpec::Kind::pinned;
  p.shock.speed = 1.0;
  p.shock.u1 = 2.0;
  p.shock.u2 = 0.0;
  return p;
}

TrainingSet window(double t_end, std::size_t m) {
  TrainingSet ts;
  for (std::size_t k = 1; k <= m; ++k) ts.times.push_back(t_end * static_cast<double>(k) / static_cast<double>(m));
  return ts;
}

}  // namespace

TEST_CASE("relative L2 error") {
  const Grid1D grid(0.0, 1.0, 11);
  const auto r = sample(grid, [](double x) { return 1.0 + x; });
  const auto c = sample(grid, [](double x) { return 1.1 * (1.0 + x); });
  CHECK(relative_l2_error(r, r) == 0.0);
  CHECK(relative_l2_error(c, r) == doctest::Approx(0.1));
  bool absolute = false;
  const auto zero = sample(grid, [](double) { return 0.0; });
  CHECK(relative_l2_error(c, zero, &absolute) > 0.0);
  CHECK(absolute);
}

TEST_CASE("observable layouts") {
  const std::vector<std::size_t> one{400};
  const std::vector<std::vector<ShockComponent>> pinned{{ShockComponent::x_star}};
  const auto a = ObservableLayout::make(one, pinned);
  CHECK(a.total == 401);
  CHECK(a.shock_slots[0].offset == 400);

  const std::vector<std::size_t> two{300, 300};
  const std::vector<std::vector<ShockComponent>> triple{
      {ShockComponent::x_star, ShockComponent::u1, ShockComponent::u2}};
  const auto b = ObservableLayout::make(two, triple);
  CHECK(b.total == 603);
  CHECK(b.to_json()["shock_slots"][0]["components"][2] == "u2");

  ObservableLayout broken = b;
  broken.branch_slots[1].offset = 299;
  CHECK_THROWS_AS(broken.validate(), Error);
}

TEST_CASE("a single branch without shocks is its own observable") {
  const auto b = make_branch(Direction::decreasing, {0.0, 1.0}, 5, [](double u) { return -u; });
  const std::vector<MonotoneBranch> branches{b};
  const std::vector<std::size_t> sizes{5};
  const auto layout = ObservableLayout::make(sizes, {});
  const auto g = assemble_observables(branches, {}, layout, {1.0, 0.0});
  REQUIRE(g.size() == 5);
  for (std::size_t k = 0; k < 5; ++k) CHECK(g(static_cast<Eigen::Index>(k)) == b.x_of_u[k]);

  const auto d = decode_observables(g, layout, branches, {}, 0.0);
  CHECK(d.branches[0].x_of_u == b.x_of_u);
}

TEST_CASE("non-invertible branches are rejected at assembly") {
  auto b = make_branch(Direction::increasing, {0.0, 1.0}, 5, [](double u) { return u; });
  b.x_of_u[2] = b.x_of_u[1];
  const std::vector<MonotoneBranch> branches{b};
  const std::vector<std::size_t> sizes{5};
  const auto layout = ObservableLayout::make(sizes, {});
  try {
    (void)assemble_observables(branches, {}, layout, {0.0, 1.0});
    FAIL("expected observable-assembly error");
  } catch (const Error& e) {
    CHECK(e.category() == ErrorCategory::observable_assembly);
  }
}

TEST_CASE("moving grids map back onto eulerian nodes") {
  const Grid1D grid(0.0, 1.0, 5);
  const std::vector<double> x{0.5, 0.0, 1.0};
  const std::vector<double> u{2.0, 1.0, 3.0};
  const auto f = moving_to_eulerian(x, u, grid, 0.0);
  CHECK(f.values[0] == 1.0);
  CHECK(f.values[1] == doctest::Approx(1.5));
  CHECK(f.values[3] == doctest::Approx(2.5));
}

TEST_CASE("lagrangian DMD advances a translating grid rigidly") {
  const double c = 0.7;
  const double dt = 0.01;
  const auto snaps = translation(50, 20, c, dt);
  const std::vector<double> carried(50, c);
  const Grid1D grid(0.0, 2.0, 101);
  const std::vector<double> times{0.0, 0.5};
  const auto r = lagrangian_dmd(snaps, carried, grid, 1e-4, times);
  CHECK(r.rank <= 2);
  REQUIRE(r.model);
  const Eigen::VectorXd start = r.model->predict_at_time(0.0);
  CHECK((start - snaps.data.col(0)).norm() < 1e-8);
  const Eigen::VectorXd later = r.model->predict_at_time(0.5);
  CHECK(((later - snaps.data.col(0)).array() - c * 0.5).abs().maxCoeff() < 1e-6);
  CHECK(r.grid_monotone[0]);
  CHECK(r.grid_monotone[1]);
}

TEST_CASE("lagrangian POD reproduces rigid translation") {
  const double c = 0.7;
  const double dt = 0.01;
  const auto snaps = translation(50, 20, c, dt);
  const std::vector<double> carried(50, c);
  const Grid1D grid(0.0, 2.0, 101);
  const std::vector<double> times{0.0, 0.5};
  const auto r = lagrangian_pod(snaps, carried, grid, 1e-4, dt, FluxModel::burgers(), times);
  CHECK(r.rank == 2);
  const auto expected = sample(grid, [&](double) { return c; });
  CHECK(relative_l2_error(r.fields[0], expected) < 1e-12);
  CHECK(relative_l2_error(r.fields[1], expected) < 1e-12);
  CHECK(r.grid_monotone[1]);
}

TEST_CASE("lagrangian POD on a smooth Burgers profile") {
  // Exact pre-shock characteristics of u0 = 1 + 0.5 sin(x).
  const std::size_t nodes = 200;
  const double dt = 0.01;
  const std::size_t snaps = 40;
  Eigen::MatrixXd data(nodes, snaps);
  std::vector<double> carried(nodes);
  for (std::size_t j = 0; j < nodes; ++j) {
    const double x0 = 2.0 * M_PI * static_cast<double>(j) / static_cast<double>(nodes - 1);
    carried[j] = 1.0 + 0.5 * std::sin(x0);
    for (std::size_t n = 0; n < snaps; ++n) {
      data(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(n)) =
          x0 + carried[j] * dt * static_cast<double>(n);
    }
  }
  const SnapshotMatrix s(data, dt, 0.0);
  const Grid1D grid(0.0, 2.0 * M_PI, 300);
  const std::vector<double> times{0.0, 0.39, 1.0};
  const auto pod = lagrangian_pod(s, carried, grid, 1e-4, dt, FluxModel::burgers(), times);
  const auto dmd = lagrangian_dmd(s, carried, grid, 1e-4, times);
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double t = times[i];
    std::vector<double> x(nodes);
    for (std::size_t j = 0; j < nodes; ++j) x[j] = data(static_cast<Eigen::Index>(j), 0) + carried[j] * t;
    const auto exact = moving_to_eulerian(x, carried, grid, t);
    CHECK(relative_l2_error(pod.fields[i], exact) < 1e-8);
    CHECK(relative_l2_error(dmd.fields[i], exact) < 1e-6);
  }
}

TEST_CASE("pinned riemann shock: r = 2 and the shock lands at x = t") {
  const auto p = riemann_problem(400, 0.02);
  const auto training = window(0.25, 50);
  const std::vector<double> times{1.0};
  const auto r = physics_aware_dmd(p, training, 1e-4, times);
  CHECK(r.rank == 2);
  CHECK(r.metadata["layout"]["total"] == 401);
  const auto& f = r.fields[0];
  const double dx = p.grid.dx();
  for (std::size_t j = 0; j < p.grid.size(); ++j) {
    const double x = p.grid.node(j);
    if (x < 1.0 - 2.0 * dx) CHECK(f.values[j] > 1.0);
    if (x > 1.0 + 2.0 * dx) CHECK(f.values[j] < 1.0);
  }
  // Shock position in g2 stays affine with slope s = 1.
  const auto& track = r.metadata["shock"];
  CHECK(std::abs(track[0]["x_star"].get<double>() - 1.0) < 1e-6);
}

TEST_CASE("observed branches equal transported ones on exact data") {
  const FluxModel m = FluxModel::burgers();
  const Grid1D grid(0.0, 2.0, 2000);
  auto u0 = [](double x) { return 0.5 + 0.5 * std::exp(-(x - 0.3) * (x - 0.3) / 0.01); };
  const auto d = decompose_field(sample(grid, u0), 500);
  HodographProblem p{m, grid, d.branches, d.far_field, {}};
  const double t = 0.1;
  const auto field = hodograph_solution(p, t, 0.01);
  const auto observed = observe_branches(field, d.branches, {}, m, d.far_field);
  for (std::size_t b = 0; b < observed.size(); ++b) {
    const auto exact = evolve_branch(d.branches[b], m, t);
    for (std::size_t k = 0; k < exact.size(); ++k) {
      CHECK(std::abs(observed[b].x_of_u[k] - exact.x_of_u[k]) < 2.0 * grid.dx());
    }
  }
}
