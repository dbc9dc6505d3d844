#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "shockrom/flux.hpp"
#include "shockrom/grid.hpp"

namespace shockrom {

enum class Direction { increasing, decreasing };

/// One strictly monotone piece of a profile stored in hodograph form: the
/// position x(t, u) sampled on a uniform, ascending mesh of u values.
struct MonotoneBranch {
  Direction direction = Direction::decreasing;
  double u_lo = 0.0;
  double u_hi = 0.0;
  std::vector<double> u_mesh;
  std::vector<double> x_of_u;
  double t = 0.0;

  std::size_t size() const noexcept { return u_mesh.size(); }
  double du() const noexcept;

  /// x at an arbitrary level, piecewise-linear, clamped to the end values.
  double x_at(double u) const;
  /// dx/du at the mesh points: centred differences, one-sided at the ends.
  std::vector<double> slopes() const;
  double slope_at(double u) const;

  /// Consecutive x differences carry the branch sign with magnitude > tol
  /// (increasing branches have x increasing in u).
  bool is_strictly_monotone(double tol = 1e-14) const;
  /// Throws non_invertible_data when the invariants are violated.
  void validate() const;
};

/// Samples x_of_u(u) on a P-point uniform mesh of [u_range.lo, u_range.hi].
MonotoneBranch make_branch(Direction direction, Interval u_range, std::size_t points,
                           const std::function<double(double)>& x_of_u, double t = 0.0);

/// Inverts strictly monotone samples u(x) onto a P-point uniform u mesh by
/// piecewise-linear interpolation.
MonotoneBranch invert_samples(std::span<const double> x, std::span<const double> u,
                              std::size_t points, double t = 0.0);

/// Evaluates u at the given positions by inverting the branch; positions
/// outside the branch x-range get the nearest end level.
std::vector<double> sample_branch(const MonotoneBranch& branch, std::span<const double> x);

/// Monotone pieces of a sampled profile together with the constant states
/// that the profile approaches at both ends of the domain.
struct Decomposition {
  std::vector<MonotoneBranch> branches;
  BoundaryStates far_field;
  /// Inclusive node index range [first, last] of every branch.
  std::vector<std::pair<std::size_t, std::size_t>> node_ranges;
};

/// Raw samples of one monotone run of a sampled profile, in node order.
struct MonotoneRun {
  Direction direction = Direction::decreasing;
  std::size_t first = 0;
  std::size_t last = 0;
  std::vector<double> x;
  std::vector<double> u;
};

struct RunSplit {
  std::vector<MonotoneRun> runs;
  BoundaryStates far_field;
};

/// Splits a sampled profile at its strict extrema. Leading and trailing
/// plateaus become far-field states; an interior repeated value (at most
/// `max_plateau_cells` cells wide) is dropped or, at an extremum, closes
/// the run.
RunSplit monotone_runs(const EulerianField& field, std::size_t max_plateau_cells = 1);

/// Splits at strict extrema; leading/trailing plateaus are far-field states.
/// Interior plateaus longer than `max_plateau_cells` are rejected.
Decomposition decompose_field(const EulerianField& field, std::size_t points,
                              std::size_t max_plateau_cells = 1);

std::vector<MonotoneBranch> decompose_monotone(const EulerianField& field, std::size_t points);

struct FormationTime {
  double t_star = std::numeric_limits<double>::infinity();
  double u_star = 0.0;
};

/// Earliest time at which dx/du of the branch vanishes under the flux; +inf
/// for branches that only spread.
FormationTime shock_formation_time(const MonotoneBranch& branch, const FluxModel& model);

struct ShockState {
  double t = 0.0;
  double t_star = 0.0;
  double u_star = 0.0;
  double x_star = 0.0;
  double u1 = 0.0;  // limit from the top of the shock
  double u2 = 0.0;  // limit from the bottom of the shock
};

/// Shock state at its formation time: both limits at the inflection value.
ShockState shock_at_formation(const MonotoneBranch& branch, const FluxModel& model);

/// One step of the limit ODEs
///   du_i/dt = (f(u_i) - s) / (g(u_i) - f'(u_i) t),  g = -x0'(u),
/// with u1 living on `top` and u2 on `bottom`. A state at formation
/// (u1 == u2) is opened with the self-similar square-root law first.
ShockState advance_shock_limits(const ShockState& state, const MonotoneBranch& top,
                                const MonotoneBranch& bottom, const FluxModel& model,
                                double dt);

/// Moves x* with the Rankine-Hugoniot speed of the current limits.
ShockState advance_shock_position(const ShockState& state, const FluxModel& model, double dt);

/// x(u) += dt f(u): exact characteristic transport of every level.
MonotoneBranch evolve_branch(const MonotoneBranch& branch, const FluxModel& model, double dt);

/// Multi-valued characteristic profile formed by chaining branches in spatial
/// order, extended by the far-field states on both sides.
class WaveProfile {
 public:
  struct Crossing {
    /// Segment index; -1 for the left extension, size()-1 for the right one.
    std::ptrdiff_t segment = -1;
    double u = 0.0;
  };

  WaveProfile(std::span<const MonotoneBranch> branches, BoundaryStates far_field);

  std::size_t size() const noexcept { return x_.size(); }
  const std::vector<double>& x() const noexcept { return x_; }
  const std::vector<double>& u() const noexcept { return u_; }
  const std::vector<std::size_t>& branch_of() const noexcept { return branch_of_; }
  const std::vector<std::size_t>& level_of() const noexcept { return level_of_; }
  BoundaryStates far_field() const noexcept { return far_; }

  /// First crossing of the vertical line x = xs scanning from point `from`.
  Crossing first_crossing(double xs, std::size_t from = 0) const;
  /// Last crossing of x = xs.
  Crossing last_crossing(double xs) const;

 private:
  std::vector<double> x_;
  std::vector<double> u_;
  std::vector<std::size_t> branch_of_;
  std::vector<std::size_t> level_of_;
  BoundaryStates far_;
};

/// Shock speed read off the profile: limits are the first and last crossing
/// of x*.
ShockState shock_from_profile(const WaveProfile& profile, double t, double x_star);

/// Integral of u over `domain` for the single-valued selection with one jump
/// at xs: the first crossing's sheet left of xs, the last crossing's right
/// of it, far-field states beyond the profile.
double selection_mass(const WaveProfile& profile, double xs, Interval domain);

/// Jump position at which the selection carries `mass` (bisection; the mass
/// grows with slope u1 - u2). Searches the fold of the profile that contains
/// `guess`, else the widest one. nullopt when the profile is single-valued,
/// the fold does not bracket the mass, or the jump is not compressive.
std::optional<double> conserving_jump(const WaveProfile& profile, double mass, Interval domain,
                                      double guess);

/// Integrates the trajectory of one shock through the characteristic profile
/// of the initial branches. u1 and u2 are the outermost crossings of x*, so
/// the limit ODEs hold implicitly and branch changes of u1/u2 need no special
/// treatment.
class ShockTracker {
 public:
  ShockTracker(std::vector<MonotoneBranch> initial, BoundaryStates far_field, FluxModel model,
               std::size_t forming_branch);

  const ShockState& state() const noexcept { return state_; }
  bool formed() const noexcept { return state_.t >= state_.t_star; }

  /// RK4 in x* with steps no longer than `max_step`.
  void advance_to(double t, double max_step);

  WaveProfile profile_at(double t) const;

 private:
  double rhs(double t, double x_star) const;

  std::vector<MonotoneBranch> initial_;
  BoundaryStates far_;
  FluxModel model_;
  std::size_t forming_branch_;
  ShockState state_;
};

/// Entropy solution on the grid: levels between the crossings of every shock
/// are discarded, the rest is inverted piecewise-linearly. Shocks must be
/// ordered by position.
EulerianField assemble_solution(std::span<const MonotoneBranch> branches,
                                std::span<const ShockState> shocks, const Grid1D& grid,
                                BoundaryStates far_field, double t);

/// Which levels of every branch are cut out by the shocks (true = absorbed).
std::vector<std::vector<bool>> absorbed_levels(std::span<const MonotoneBranch> branches,
                                               std::span<const ShockState> shocks,
                                               BoundaryStates far_field);

}  // namespace shockrom
