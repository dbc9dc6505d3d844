#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "shockrom/flux.hpp"
#include "shockrom/grid.hpp"
#include "shockrom/hodograph.hpp"

namespace shockrom {

/// Murman-Roe numerical flux at the interface between two cells.
double interface_flux(const FluxModel& model, double left, double right) noexcept;

/// Largest admissible step for `field` (CFL number one).
double max_stable_dt(const EulerianField& field, const FluxModel& model,
                     BoundaryStates ghosts);

/// One conservative first-order upwind step. Ghost cells beyond both ends
/// hold `ghosts`. Throws StepRejected when the CFL bound is violated.
EulerianField upwind_step(const EulerianField& field, const FluxModel& model, double dt,
                          BoundaryStates ghosts);
/// Ghosts taken from the end values of `field`.
EulerianField upwind_step(const EulerianField& field, const FluxModel& model, double dt);

struct UpwindOptions {
  /// Internal steps per output step (keeps CFL when the output cadence is
  /// coarser than the stability limit).
  std::size_t substeps = 1;
  /// Keep every k-th output field (the first and the last are always kept).
  std::size_t record_every = 1;
  std::optional<BoundaryStates> ghosts;
  /// Periodic domain whose first and last nodes coincide; overrides ghosts.
  bool periodic = false;
};

/// Marches N steps of size T/N from `initial`; returns the recorded fields.
std::vector<EulerianField> run_upwind(const EulerianField& initial, const FluxModel& model,
                                      std::size_t steps, double T,
                                      const UpwindOptions& options = {});

/// Same, but samples u0 on the grid first and returns all N+1 fields.
std::vector<EulerianField> run_upwind(const std::function<double(double)>& u0,
                                      const Grid1D& grid, std::size_t steps, double T,
                                      const FluxModel& model);

/// Streaming variant: `observe(step, field)` is called for step 0..N.
void march_upwind(const EulerianField& initial, const FluxModel& model, std::size_t steps,
                  double T, const UpwindOptions& options,
                  const std::function<void(std::size_t, const EulerianField&)>& observe);

/// Explicit trapezoidal characteristic update: u is carried, x moves with
/// the average of the old and new speeds (equal for du/dt = 0).
MovingGrid naive_lagrangian_step(const MovingGrid& grid, double dt,
                                 const FluxModel& model = FluxModel::burgers());

/// Values of the solution at the current and the next time level.
struct FieldHistory {
  std::function<double(double, bool*)> current;
  std::function<double(double, bool*)> next;
};

struct BslmDiagnostics {
  std::size_t clamped_queries = 0;
};

/// Backward semi-Lagrangian mid-point step. Each node is advanced with the
/// mean speed sampled at the half-way point x* = x + dt/2 f(u).
MovingGrid bslm_step(const MovingGrid& grid, const FieldHistory& history, double dt,
                     const FluxModel& model = FluxModel::burgers(),
                     BslmDiagnostics* diagnostics = nullptr);

/// History built from the grid itself: linear interpolation on the sorted
/// nodes at t^n, and on the naive predictor grid for t^{n+1}.
FieldHistory predictor_history(const MovingGrid& grid, double dt,
                               const FluxModel& model = FluxModel::burgers());

MovingGrid bslm_step(const MovingGrid& grid, double dt,
                     const FluxModel& model = FluxModel::burgers(),
                     BslmDiagnostics* diagnostics = nullptr);

enum class LagrangianScheme { naive, bslm };

/// Trajectory of `steps` Lagrangian steps; every `record_every`-th grid kept
/// (the initial one included).
std::vector<MovingGrid> run_lagrangian(const MovingGrid& initial, double dt, std::size_t steps,
                                       LagrangianScheme scheme,
                                       const FluxModel& model = FluxModel::burgers(),
                                       std::size_t record_every = 1,
                                       BslmDiagnostics* diagnostics = nullptr);

/// Exact characteristic solution x(t, u) = x0(u) + t f(u) of one branch, in
/// the branch's level order. Throws shock_formed at or after t*.
MovingGrid solve_characteristics(const MonotoneBranch& branch, const FluxModel& model,
                                 double t);

}  // namespace shockrom
