#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "shockrom/flux.hpp"
#include "shockrom/grid.hpp"
#include "shockrom/rom.hpp"

namespace shockrom {

enum class DataSource { analytic, upwind, bslm };
enum class Pipeline { upwind_only, lagrangian_dmd, lagrangian_pod, physics_dmd };

std::string_view to_string(DataSource s) noexcept;
std::string_view to_string(Pipeline p) noexcept;
/// Throws config on unknown names.
DataSource parse_data_source(std::string_view name);
Pipeline parse_pipeline(std::string_view name);

struct InitialData {
  enum class Kind { riemann, gaussian, sine, custom };
  Kind kind = Kind::riemann;
  double u_left = 0.0;
  double u_right = 0.0;
  double x_jump = 0.0;
  /// custom: values at the grid nodes
  std::vector<double> samples;
};

struct Scenario {
  std::string name;
  std::string flux = "burgers";  // burgers | buckley-leverett
  double mobility = 0.5;         // Buckley-Leverett a
  double a = 0.0;
  double b = 1.0;
  std::size_t J = 2000;        // grid nodes
  std::size_t N = 1000;        // HFM steps to t_end()
  std::size_t substeps = 1;    // HFM steps per recorded step
  double T_train = 0.25;
  double T_predict = 1.0;
  std::size_t M = 250;         // training snapshots at k T_train / M, k = 1..M
  double eps = 1e-4;
  std::optional<double> delta;  // tanh width; 10 dx when unset
  std::size_t levels = 0;       // u-mesh points per branch; J when zero
  bool periodic = false;
  InitialData u0;
  DataSource source = DataSource::upwind;
  /// Extra forecast times; T_predict is always included.
  std::vector<double> predict_times;

  FluxModel flux_model() const;
  Grid1D grid() const;
  double tanh_width() const;
  /// Regularization of Riemann data sampled for the HFMs: never below 10 dx,
  /// since the upwind flux keeps an unresolved transonic step as an
  /// expansion shock.
  double hfm_width() const;
  std::size_t mesh_levels() const { return levels == 0 ? J : levels; }
  double hfm_dt() const { return T_predict / static_cast<double>(N); }
  std::vector<double> training_times() const;
  std::vector<double> forecast_times() const;

  /// Throws config on inconsistent fields.
  void validate() const;
  nlohmann::json to_json() const;
  /// Fields present in `overrides` replace those of `base`.
  static Scenario from_json(const nlohmann::json& overrides, Scenario base);
  static Scenario from_json(const nlohmann::json& doc);
};

/// Tanh-regularized step u_mid - (du/2) tanh((x - x_jump)/delta), exact step
/// values where the tanh has saturated. Appends a warning when delta < dx/2.
EulerianField regularize_riemann(const Grid1D& grid, double u_left, double u_right,
                                 double x_jump, double delta,
                                 std::vector<std::string>* warnings = nullptr);

/// The five experiment presets.
std::vector<Scenario> builtin_scenarios();
/// Throws lookup for unknown names.
Scenario find_scenario(std::string_view name);

/// u0 on the scenario grid; Riemann data regularized with hfm_width().
EulerianField initial_field(const Scenario& s, std::vector<std::string>* warnings = nullptr);

/// Closed-form entropy solution where one exists (Riemann data).
std::optional<EulerianField> exact_solution(const Scenario& s, double t);

/// Hodograph formulation of the scenario at t = 0.
HodographProblem hodograph_problem(const Scenario& s);

struct RunOutput {
  Scenario scenario;
  Pipeline pipeline = Pipeline::upwind_only;
  std::vector<double> times;
  std::vector<EulerianField> references;
  std::vector<EulerianField> predictions;
  std::optional<DmdModel> model;
  nlohmann::json diagnostics = nlohmann::json::object();
};

/// Runs one pipeline end to end. Module errors are rethrown with the
/// scenario name prepended.
RunOutput run(const Scenario& s, Pipeline pipeline);

/// CSV (t,x,u_ref,u_rom) at `path` plus `<path>.json` diagnostics.
/// Throws io when a file cannot be written.
void write_outputs(const RunOutput& out, const std::filesystem::path& path);

/// Location where a decreasing jump from `high` to `low` is crossed at its
/// midpoint level (linear interpolation between nodes).
double front_position(const EulerianField& field, double high, double low);

}  // namespace shockrom
