#include <doctest.h>

#include <cmath>

#include "shockrom/error.hpp"
#include "shockrom/flux.hpp"

using namespace shockrom;

namespace {

double central_diff(auto&& fn, double u, double h = 1e-6) {
  return (fn(u + h) - fn(u - h)) / (2.0 * h);
}

// Plain bisection on the tangency condition F(u) - F(0) = u f(u), written
// independently of the library (speed from finite differences of F).
double tangency_oracle(double a) {
  auto flux = [a](double u) { return u * u / (u * u + a * (1 - u) * (1 - u)); };
  auto h = [&](double u) { return central_diff(flux, u, 1e-7) * u - flux(u); };
  double lo = 0.05, hi = 1.0;
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (lo + hi);
    ((h(mid) > 0) == (h(lo) > 0) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("burgers flux, speed and derivative") {
  const FluxModel m = FluxModel::burgers();
  CHECK(m.flux(2.0) == doctest::Approx(2.0));
  CHECK(m.speed(-1.5) == doctest::Approx(-1.5));
  CHECK(m.speed_derivative(0.3) == doctest::Approx(1.0));
  CHECK(m.convexity() == Convexity::monotone_convex);
  CHECK(m.shock_speed(2.0, 0.0) == doctest::Approx(1.0));
}

TEST_CASE("buckley-leverett derivatives match finite differences") {
  for (double a : {0.5, 1.0, 2.0}) {
    const FluxModel m = FluxModel::buckley_leverett(a);
    CHECK(m.params().at("a") == a);
    for (double u = 0.05; u < 0.96; u += 0.05) {
      const double fd = central_diff([&](double v) { return m.flux(v); }, u);
      const double fd2 = central_diff([&](double v) { return m.speed(v); }, u);
      CHECK(m.speed(u) == doctest::Approx(fd).epsilon(1e-7));
      CHECK(m.speed_derivative(u) == doctest::Approx(fd2).epsilon(1e-6).scale(1.0));
    }
    CHECK(m.flux(0.0) == 0.0);
    CHECK(m.flux(1.0) == doctest::Approx(1.0));
  }
}

TEST_CASE("buckley-leverett speed is unimodal with inverse on each side") {
  const FluxModel m = FluxModel::buckley_leverett(0.5);
  const auto [rising, falling] = m.monotone_speed_branches();
  CHECK(rising.hi == doctest::Approx(falling.lo));
  CHECK(std::abs(m.speed_derivative(rising.hi)) < 1e-8);
  for (double u : {0.1, 0.2, 0.3}) {
    CHECK(m.inverse_speed(m.speed(u), rising) == doctest::Approx(u).epsilon(1e-10));
  }
  for (double u : {0.5, 0.7, 0.9}) {
    CHECK(m.inverse_speed(m.speed(u), falling) == doctest::Approx(u).epsilon(1e-10));
  }
  CHECK_THROWS_AS(m.inverse_speed(10.0, rising), Error);
  CHECK(m.max_abs_speed({0.0, 1.0}) == doctest::Approx(m.speed(rising.hi)));
}

TEST_CASE("invalid mobility ratio is a parameter-domain error") {
  for (double a : {0.0, -1.0}) {
    try {
      (void)FluxModel::buckley_leverett(a);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.category() == ErrorCategory::parameter_domain);
    }
  }
}

TEST_CASE("welge front against an independent bisection") {
  for (double a : {0.5, 1.0, 2.0}) {
    const HullConstruction hull = welge_front(FluxModel::buckley_leverett(a), 1.0, 0.0);
    CHECK(hull.front_saturation == doctest::Approx(tangency_oracle(a)).epsilon(1e-6));
    CHECK(hull.front_saturation == doctest::Approx(std::sqrt(a / (1.0 + a))).epsilon(1e-10));
    const FluxModel m = FluxModel::buckley_leverett(a);
    // Tangency: chord slope from the right state equals the front speed.
    CHECK(hull.front_speed == doctest::Approx(m.flux(hull.front_saturation) / hull.front_saturation));
    CHECK(hull.rarefaction_interval.lo == hull.front_saturation);
    CHECK(hull.shock_interval.hi == hull.front_saturation);
  }
  const auto hull = welge_front(FluxModel::buckley_leverett(0.5), 1.0, 0.0);
  CHECK(std::abs(hull.front_saturation - 0.577350) < 1e-6);
}

TEST_CASE("welge front degenerates for a convex flux") {
  try {
    (void)welge_front(FluxModel::burgers(), 2.0, 0.0);
    FAIL("expected hull_degenerate");
  } catch (const Error& e) {
    CHECK(e.category() == ErrorCategory::hull_degenerate);
  }
  CHECK_THROWS_AS(welge_front(FluxModel::buckley_leverett(0.5), 0.0, 1.0), Error);
}
