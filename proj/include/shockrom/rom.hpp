#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "shockrom/dmd.hpp"
#include "shockrom/flux.hpp"
#include "shockrom/grid.hpp"
#include "shockrom/hfm.hpp"
#include "shockrom/hodograph.hpp"

namespace shockrom {

enum class ShockComponent { x_star, u1, u2 };

std::string_view to_string(ShockComponent c) noexcept;

struct BranchSlot {
  std::size_t branch = 0;
  std::size_t offset = 0;
  std::size_t length = 0;
};

struct ShockSlot {
  std::size_t shock = 0;
  std::size_t offset = 0;
  std::vector<ShockComponent> components;
};

/// Position of every branch (g1) and shock quantity (g2) inside the
/// observable vector. Fixed for all snapshots of one run.
struct ObservableLayout {
  std::vector<BranchSlot> branch_slots;
  std::vector<ShockSlot> shock_slots;
  std::size_t total = 0;
  /// g2 rows are stored scaled by this factor (sqrt of the g1 row count) so
  /// that a single shock row weighs as much as the whole g1 block in the SVD.
  double shock_weight = 1.0;

  static ObservableLayout make(std::span<const std::size_t> branch_sizes,
                               std::span<const std::vector<ShockComponent>> shock_components);
  /// Slots must be disjoint and tile [0, total).
  void validate() const;
  nlohmann::json to_json() const;
};

/// [g1; g2]. Levels outside the shock cut must be strictly monotone;
/// otherwise throws observable_assembly.
Eigen::VectorXd assemble_observables(std::span<const MonotoneBranch> branches,
                                     std::span<const ShockState> shocks,
                                     const ObservableLayout& layout,
                                     BoundaryStates far_field);

struct DecodedObservables {
  std::vector<MonotoneBranch> branches;
  std::vector<ShockState> shocks;
};

/// Inverse of assemble_observables. Branch meshes and directions come from
/// `branch_templates`; shock components missing from the layout are taken
/// from `shock_templates`.
DecodedObservables decode_observables(const Eigen::VectorXd& g, const ObservableLayout& layout,
                                      std::span<const MonotoneBranch> branch_templates,
                                      std::span<const ShockState> shock_templates, double t);

double relative_l2_error(const EulerianField& candidate, const EulerianField& reference,
                         bool* absolute = nullptr);

struct RomResult {
  std::vector<double> times;
  std::vector<EulerianField> fields;
  /// Relative L2 error per time; empty when no reference was supplied.
  std::vector<double> errors;
  std::size_t rank = 0;
  double train_start = 0.0;
  double train_end = 0.0;
  /// Lagrangian pipelines: whether each predicted grid stayed ordered.
  std::vector<bool> grid_monotone;
  /// Lagrangian pipelines: max_reversal of each predicted grid.
  std::vector<double> grid_reversal;
  std::optional<DmdModel> model;
  nlohmann::json metadata = nlohmann::json::object();
};

/// Plain DMD on Lagrangian grid snapshots; node values stay u0(x_j^0).
RomResult lagrangian_dmd(const SnapshotMatrix& grids, std::span<const double> carried_values,
                         const Grid1D& grid, double eps, std::span<const double> predict_times,
                         std::span<const EulerianField> references = {});

/// Galerkin POD of the implicit Lagrangian step, solved by Newton iteration
/// in the coefficient space. Marches from the first snapshot with step dt.
RomResult lagrangian_pod(const SnapshotMatrix& grids, std::span<const double> carried_values,
                         const Grid1D& grid, double eps, double dt, const FluxModel& model,
                         std::span<const double> predict_times,
                         std::span<const EulerianField> references = {});

/// Maps a moving grid onto Eulerian nodes: linear interpolation on the
/// nodes sorted by position, nearest value beyond them.
EulerianField moving_to_eulerian(std::span<const double> x, std::span<const double> u,
                                 const Grid1D& grid, double t);

/// How shocks enter the observables.
struct ShockSpec {
  enum class Kind { none, pinned, tracked };
  Kind kind = Kind::none;
  // pinned: x* = x_jump + speed t with constant limits
  double x_jump = 0.0;
  double speed = 0.0;
  double u1 = 0.0;
  double u2 = 0.0;
  // tracked: the branch whose characteristics cross first
  std::size_t forming_branch = 0;
  std::vector<ShockComponent> components{ShockComponent::x_star};
};

struct HodographProblem {
  FluxModel model;
  Grid1D grid;
  std::vector<MonotoneBranch> branches;  // at t = 0
  BoundaryStates far_field;
  ShockSpec shock;
};

/// Shock states of the problem at the given times (at most one shock).
std::vector<std::vector<ShockState>> shock_history(const HodographProblem& problem,
                                                   std::span<const double> times,
                                                   double max_step);

/// Branches at time t observed from a sampled field. Levels outside the
/// data range of their run or inside a shock are moved along their
/// characteristic from `previous` instead.
std::vector<MonotoneBranch> observe_branches(const EulerianField& data,
                                             std::span<const MonotoneBranch> previous,
                                             std::span<const ShockState> shocks,
                                             const FluxModel& model, BoundaryStates far_field);

struct TrainingSet {
  std::vector<double> times;  // uniform cadence
  /// Sampled solutions at `times`; empty means the hodograph solution is
  /// used directly (exact characteristic transport of the branches).
  std::vector<EulerianField> fields;
};

/// Narrows every branch to the levels present in all sampled training
/// fields, so that no observed position relies on extrapolated data. The
/// u-mesh size is kept.
HodographProblem restrict_to_data(const HodographProblem& problem, const TrainingSet& training);

/// Replaces the intercept of a pinned shock by the least-squares fit of
/// x*(t) - s t to the midpoint-level crossings in the second half of the
/// training window; the speed stays analytic.
HodographProblem calibrate_pinned_shock(const HodographProblem& problem, const TrainingSet& training);

/// Entropy solution of the problem at time t straight from the hodograph.
EulerianField hodograph_solution(const HodographProblem& problem, double t, double max_step);

/// Observable matrix [g1; g2] of the training window.
SnapshotMatrix observable_snapshots(const HodographProblem& problem, const TrainingSet& training,
                                    ObservableLayout& layout);

/// Mass on `domain` at time t: an anchor value plus the net far-field flux.
struct MassBudget {
  Interval domain;
  double t = 0.0;
  double mass = 0.0;
  double net_inflow = 0.0;
  double at(double time) const noexcept { return mass + (time - t) * net_inflow; }
};

/// Anchored on the last training field when its end values still sit at the
/// far-field states; nullopt otherwise (then the decoded profile's own mass
/// is used, i.e. the equal-area rule).
std::optional<MassBudget> mass_budget(const HodographProblem& problem, const TrainingSet& training);

/// Forecast of a fitted observable model mapped back to the grid. A formed
/// tracked shock is placed where the selection from the decoded g1 profile
/// carries the budgeted mass (equal-area rule without a budget); g2 only
/// decides whether the shock has formed. Pinned shocks keep g2.
EulerianField reconstruct(const HodographProblem& problem, const ObservableLayout& layout,
                          const DmdModel& model, double t,
                          std::optional<MassBudget> budget = std::nullopt);

ObservableLayout layout_for(const HodographProblem& problem);

RomResult physics_aware_dmd(const HodographProblem& problem, const TrainingSet& training,
                            double eps, std::span<const double> predict_times,
                            std::span<const EulerianField> references = {});

}  // namespace shockrom
