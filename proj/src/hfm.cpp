#include "shockrom/hfm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <sstream>

#include "shockrom/error.hpp"

namespace shockrom {

double interface_flux(const FluxModel& model, double left, double right) noexcept {
  const double fl = model.flux(left);
  const double fr = model.flux(right);
  const double a = left == right ? model.speed(left) : (fr - fl) / (right - left);
  return 0.5 * (fl + fr) - 0.5 * std::abs(a) * (right - left);
}

double max_stable_dt(const EulerianField& field, const FluxModel& model,
                     BoundaryStates ghosts) {
  double vmax = std::max(std::abs(model.speed(ghosts.left)), std::abs(model.speed(ghosts.right)));
  for (double u : field.values) vmax = std::max(vmax, std::abs(model.speed(u)));
  if (vmax == 0.0) return std::numeric_limits<double>::infinity();
  return field.grid.dx() / vmax;
}

namespace {

// In-place update of `u` into `next`, with precomputed fluxes; no CFL check.
void upwind_update(const std::vector<double>& u, std::vector<double>& next,
                   std::vector<double>& flux_buf, const FluxModel& model, double ratio,
                   BoundaryStates ghosts) {
  const std::size_t n = u.size();
  flux_buf.resize(n + 1);
  // flux_buf[j] is the flux through the left face of cell j.
  flux_buf[0] = interface_flux(model, ghosts.left, u[0]);
  for (std::size_t j = 1; j < n; ++j) flux_buf[j] = interface_flux(model, u[j - 1], u[j]);
  flux_buf[n] = interface_flux(model, u[n - 1], ghosts.right);
  next.resize(n);
  for (std::size_t j = 0; j < n; ++j) next[j] = u[j] - ratio * (flux_buf[j + 1] - flux_buf[j]);
}

void check_cfl(const EulerianField& field, const FluxModel& model, double dt,
               BoundaryStates ghosts) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    fail(ErrorCategory::parameter_domain, "time step must be positive and finite");
  }
  const double admissible = max_stable_dt(field, model, ghosts);
  if (dt > admissible * (1.0 + 1e-12)) throw StepRejected(dt, admissible);
}

}  // namespace

EulerianField upwind_step(const EulerianField& field, const FluxModel& model, double dt,
                          BoundaryStates ghosts) {
  check_cfl(field, model, dt, ghosts);
  std::vector<double> next;
  std::vector<double> flux_buf;
  upwind_update(field.values, next, flux_buf, model, dt / field.grid.dx(), ghosts);
  return EulerianField(field.grid, field.t + dt, std::move(next));
}

EulerianField upwind_step(const EulerianField& field, const FluxModel& model, double dt) {
  return upwind_step(field, model, dt, {field.values.front(), field.values.back()});
}

void march_upwind(const EulerianField& initial, const FluxModel& model, std::size_t steps,
                  double T, const UpwindOptions& options,
                  const std::function<void(std::size_t, const EulerianField&)>& observe) {
  if (steps == 0 || !(T > 0.0)) {
    fail(ErrorCategory::parameter_domain, "run_upwind needs N >= 1 and T > 0");
  }
  const std::size_t sub = std::max<std::size_t>(options.substeps, 1);
  if (options.periodic && initial.values.size() < 3) {
    fail(ErrorCategory::parameter_domain, "periodic runs need at least three nodes");
  }
  BoundaryStates ghosts =
      options.ghosts.value_or(BoundaryStates{initial.values.front(), initial.values.back()});
  const double dt = T / static_cast<double>(steps);
  const double h = dt / static_cast<double>(sub);
  const double ratio = h / initial.grid.dx();

  EulerianField field = initial;
  std::vector<double> next;
  std::vector<double> flux_buf;
  observe(0, field);
  for (std::size_t n = 1; n <= steps; ++n) {
    for (std::size_t s = 0; s < sub; ++s) {
      if (options.periodic) {
        const auto& v = field.values;
        ghosts = {v[v.size() - 2], v[1]};
      }
      // Cheap CFL check each step; the throwing path recomputes the bound.
      double vmax = std::max(std::abs(model.speed(ghosts.left)), std::abs(model.speed(ghosts.right)));
      for (double u : field.values) vmax = std::max(vmax, std::abs(model.speed(u)));
      if (ratio * vmax > 1.0 + 1e-12) throw StepRejected(h, initial.grid.dx() / vmax);
      upwind_update(field.values, next, flux_buf, model, ratio, ghosts);
      field.values.swap(next);
    }
    field.t = initial.t + dt * static_cast<double>(n);
    observe(n, field);
  }
}

std::vector<EulerianField> run_upwind(const EulerianField& initial, const FluxModel& model,
                                      std::size_t steps, double T,
                                      const UpwindOptions& options) {
  const std::size_t every = std::max<std::size_t>(options.record_every, 1);
  std::vector<EulerianField> out;
  out.reserve(steps / every + 2);
  march_upwind(initial, model, steps, T, options,
               [&](std::size_t n, const EulerianField& f) {
                 if (n % every == 0 || n == steps) out.push_back(f);
               });
  return out;
}

std::vector<EulerianField> run_upwind(const std::function<double(double)>& u0,
                                      const Grid1D& grid, std::size_t steps, double T,
                                      const FluxModel& model) {
  std::vector<double> values(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) values[j] = u0(grid.node(j));
  return run_upwind(EulerianField(grid, 0.0, std::move(values)), model, steps, T);
}

MovingGrid naive_lagrangian_step(const MovingGrid& grid, double dt, const FluxModel& model) {
  MovingGrid out = grid;
  // u is carried, so the trapezoid average of the old and new speed is f(u).
  for (std::size_t j = 0; j < out.size(); ++j) out.x[j] += dt * model.speed(grid.u[j]);
  out.t += dt;
  return out;
}

namespace {

struct SortedSamples {
  std::vector<double> x;
  std::vector<double> u;

  SortedSamples(const std::vector<double>& xs, const std::vector<double>& us) {
    std::vector<std::size_t> order(xs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    x.reserve(xs.size());
    u.reserve(xs.size());
    for (std::size_t i : order) {
      x.push_back(xs[i]);
      u.push_back(us[i]);
    }
  }

  double operator()(double q, bool* clamped) const { return interpolate_sorted(x, u, q, clamped); }
};

}  // namespace

FieldHistory predictor_history(const MovingGrid& grid, double dt, const FluxModel& model) {
  const MovingGrid predicted = naive_lagrangian_step(grid, dt, model);
  auto now = std::make_shared<SortedSamples>(grid.x, grid.u);
  auto next = std::make_shared<SortedSamples>(predicted.x, predicted.u);
  return FieldHistory{[now](double q, bool* c) { return (*now)(q, c); },
                      [next](double q, bool* c) { return (*next)(q, c); }};
}

MovingGrid bslm_step(const MovingGrid& grid, const FieldHistory& history, double dt,
                     const FluxModel& model, BslmDiagnostics* diagnostics) {
  MovingGrid out = grid;
  std::size_t clamped_count = 0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double mid = grid.x[j] + 0.5 * dt * model.speed(grid.u[j]);
    bool c0 = false;
    bool c1 = false;
    const double u_now = history.current(mid, &c0);
    const double u_next = history.next(mid, &c1);
    clamped_count += (c0 ? 1 : 0) + (c1 ? 1 : 0);
    out.x[j] = grid.x[j] + 0.5 * dt * (model.speed(u_now) + model.speed(u_next));
  }
  out.t += dt;
  if (diagnostics) diagnostics->clamped_queries += clamped_count;
  return out;
}

MovingGrid bslm_step(const MovingGrid& grid, double dt, const FluxModel& model,
                     BslmDiagnostics* diagnostics) {
  return bslm_step(grid, predictor_history(grid, dt, model), dt, model, diagnostics);
}

std::vector<MovingGrid> run_lagrangian(const MovingGrid& initial, double dt, std::size_t steps,
                                       LagrangianScheme scheme, const FluxModel& model,
                                       std::size_t record_every, BslmDiagnostics* diagnostics) {
  const std::size_t every = std::max<std::size_t>(record_every, 1);
  std::vector<MovingGrid> out{initial};
  MovingGrid g = initial;
  for (std::size_t n = 1; n <= steps; ++n) {
    g = scheme == LagrangianScheme::naive ? naive_lagrangian_step(g, dt, model)
                                          : bslm_step(g, dt, model, diagnostics);
    if (n % every == 0) out.push_back(g);
  }
  return out;
}

MovingGrid solve_characteristics(const MonotoneBranch& branch, const FluxModel& model,
                                 double t) {
  if (branch.size() >= 5) {
    const FormationTime ft = shock_formation_time(branch, model);
    if (t >= ft.t_star) {
      std::ostringstream os;
      os << "characteristics cross at t* = " << ft.t_star << " (u* = " << ft.u_star
         << "); t = " << t << " needs the shock-aware hodograph solver";
      fail(ErrorCategory::shock_formed, os.str());
    }
  }
  const MonotoneBranch evolved = evolve_branch(branch, model, t - branch.t);
  MovingGrid out;
  out.t = t;
  out.x = evolved.x_of_u;
  out.u = evolved.u_mesh;
  return out;
}

}  // namespace shockrom
