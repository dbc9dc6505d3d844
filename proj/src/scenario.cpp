#include "shockrom/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <numbers>
#include <sstream>

#include "shockrom/error.hpp"
#include "shockrom/hfm.hpp"

namespace shockrom {

namespace {

constexpr double kTimeSlack = 1e-9;

[[noreturn]] void config_error(const std::string& what) { fail(ErrorCategory::config, what); }

double gaussian_u0(double x) { return 0.5 + 0.5 * std::exp(-(x - 0.3) * (x - 0.3) / 0.01); }
double sine_u0(double x) { return 1.0 + std::sin(x); }

// tanh argument beyond which the step value is exact in double precision.
constexpr double kSaturation = 20.0;

double regularized_step(double x, double u_left, double u_right, double x_jump, double delta) {
  const double xi = (x - x_jump) / delta;
  if (xi <= -kSaturation) return u_left;
  if (xi >= kSaturation) return u_right;
  return 0.5 * (u_left + u_right) - 0.5 * (u_left - u_right) * std::tanh(xi);
}

EulerianField sample(const Grid1D& grid, const std::function<double(double)>& fn, double t = 0.0) {
  std::vector<double> v(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) v[j] = fn(grid.node(j));
  return EulerianField(grid, t, std::move(v));
}

std::size_t step_of(const Scenario& s, double t) {
  const double exact = t / s.hfm_dt();
  const double rounded = std::round(exact);
  if (std::abs(exact - rounded) > 1e-6 * std::max(1.0, exact)) {
    std::ostringstream os;
    os << "time " << t << " is not a multiple of the HFM step " << s.hfm_dt();
    config_error(os.str());
  }
  return static_cast<std::size_t>(rounded);
}

// Nodes prepended on the left of a periodic domain so the hodograph window
// starts at the global minimum of u0.
std::size_t periodic_extension(const Scenario& s, const EulerianField& u0) {
  if (!s.periodic) return 0;
  const auto& v = u0.values;
  const auto it = std::min_element(v.begin(), v.end() - 1);
  const auto i_min = static_cast<std::size_t>(it - v.begin());
  return i_min == 0 ? 0 : (v.size() - 1) - i_min;
}

EulerianField extend_periodic(const EulerianField& field, std::size_t k) {
  if (k == 0) return field;
  const Grid1D& g = field.grid;
  const std::size_t period = g.size() - 1;
  const Grid1D wide(g.a() - g.dx() * static_cast<double>(k), g.b(), g.size() + k);
  std::vector<double> v(wide.size());
  for (std::size_t i = 0; i < wide.size(); ++i) {
    v[i] = field.values[(i + period - k % period) % period];
  }
  return EulerianField(wide, field.t, std::move(v));
}

// Upwind fields at the requested times (all multiples of the HFM step).
std::vector<EulerianField> upwind_at(const Scenario& s, const EulerianField& initial,
                                     std::span<const double> times) {
  std::map<std::size_t, std::vector<std::size_t>> wanted;
  std::size_t last = 0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const std::size_t step = step_of(s, times[i]);
    wanted[step].push_back(i);
    last = std::max(last, step);
  }
  std::vector<std::optional<EulerianField>> found(times.size());
  auto store = [&](std::size_t n, const EulerianField& f) {
    const auto it = wanted.find(n);
    if (it == wanted.end()) return;
    for (std::size_t i : it->second) found[i] = f;
  };
  if (last == 0) {
    store(0, initial);
  } else {
    UpwindOptions opt;
    opt.substeps = s.substeps;
    opt.periodic = s.periodic;
    march_upwind(initial, s.flux_model(), last, s.hfm_dt() * static_cast<double>(last), opt, store);
  }
  std::vector<EulerianField> out;
  for (auto& f : found) out.push_back(std::move(*f));
  return out;
}

// Lagrangian node trajectories sampled at the training times. The step is
// the HFM step rounded so that it divides the snapshot cadence.
std::vector<MovingGrid> lagrangian_at(const Scenario& s, const EulerianField& initial,
                                      LagrangianScheme scheme, BslmDiagnostics* diag) {
  const double cadence = s.T_train / static_cast<double>(s.M);
  const auto stride = static_cast<std::size_t>(std::max(1.0, std::round(cadence / s.hfm_dt())));
  MovingGrid g0;
  g0.t = initial.t;
  g0.x = initial.grid.nodes();
  g0.u = initial.values;
  const auto kept = run_lagrangian(g0, cadence / static_cast<double>(stride), stride * s.M, scheme,
                                   s.flux_model(), stride, diag);
  return {kept.begin() + 1, kept.end()};
}

// Mass balance of a shock with constant limits: x*(t) (u1 - u2) equals the
// area under x(t, u) over [u2, u1], i.e. the mean initial position of the
// absorbed levels plus s t.
double absorbed_mean_position(const MonotoneBranch& b, double u2, double u1) {
  const std::size_t n = 4096;
  const double lo = std::max(u2, b.u_lo);
  const double hi = std::min(u1, b.u_hi);
  const double h = (hi - lo) / static_cast<double>(n);
  double sum = 0.5 * (b.x_at(lo) + b.x_at(hi));
  for (std::size_t k = 1; k < n; ++k) sum += b.x_at(lo + h * static_cast<double>(k));
  return sum / static_cast<double>(n);
}

nlohmann::json field_errors(std::span<const EulerianField> c, std::span<const EulerianField> r) {
  auto out = nlohmann::json::array();
  for (std::size_t i = 0; i < c.size() && i < r.size(); ++i) {
    bool absolute = false;
    const double e = relative_l2_error(c[i], r[i], &absolute);
    out.push_back({{"t", c[i].t}, {"relative_l2", e}, {"absolute", absolute}});
  }
  return out;
}

RunOutput run_impl(const Scenario& s, Pipeline pipeline) {
  s.validate();
  RunOutput out;
  out.scenario = s;
  out.pipeline = pipeline;
  out.times = s.forecast_times();
  std::vector<std::string> warnings;
  const EulerianField initial = initial_field(s, &warnings);
  const auto training = s.training_times();

  // Closed-form solutions are the reference only for analytic data; otherwise
  // the ROM is judged against the HFM it was trained on.
  std::vector<EulerianField> exact;
  for (double t : out.times) {
    auto e = exact_solution(s, t);
    if (!e) {
      exact.clear();
      break;
    }
    exact.push_back(std::move(*e));
  }
  const bool have_exact = !exact.empty() && s.source == DataSource::analytic;
  if (have_exact) out.references = exact;
  const bool upwind_training = pipeline == Pipeline::physics_dmd && s.source == DataSource::upwind;
  std::vector<double> wanted;
  if (!have_exact || pipeline == Pipeline::upwind_only) wanted = out.times;
  if (upwind_training) wanted.insert(wanted.end(), training.begin(), training.end());
  std::vector<EulerianField> hfm;
  if (!wanted.empty()) hfm = upwind_at(s, initial, wanted);
  std::vector<EulerianField> hfm_forecast;
  if (!have_exact || pipeline == Pipeline::upwind_only) {
    hfm_forecast.assign(hfm.begin(), hfm.begin() + static_cast<std::ptrdiff_t>(out.times.size()));
  }
  if (!have_exact) out.references = hfm_forecast;

  nlohmann::json& d = out.diagnostics;
  d["scenario"] = s.to_json();
  d["pipeline"] = std::string(to_string(pipeline));
  d["delta"] = s.tanh_width();
  if (s.u0.kind == InitialData::Kind::riemann) {
    d["hfm_delta"] = s.hfm_width();
    if (s.tanh_width() < 0.5 * s.grid().dx()) {
      std::ostringstream os;
      os << "tanh width " << s.tanh_width() << " is below dx/2; the hodograph branch is narrower"
         << " than the grid and the HFM uses " << s.hfm_width() << " instead";
      warnings.push_back(os.str());
    }
  }
  d["reference"] = have_exact ? "exact" : "upwind";
  d["training_window"] = {training.front(), training.back()};

  switch (pipeline) {
    case Pipeline::upwind_only: {
      out.predictions = hfm_forecast;
      break;
    }
    case Pipeline::lagrangian_dmd:
    case Pipeline::lagrangian_pod: {
      const auto scheme =
          s.source == DataSource::analytic ? LagrangianScheme::naive : LagrangianScheme::bslm;
      BslmDiagnostics diag;
      const auto grids = lagrangian_at(s, initial, scheme, &diag);
      Eigen::MatrixXd data(static_cast<Eigen::Index>(initial.values.size()),
                           static_cast<Eigen::Index>(grids.size()));
      for (std::size_t k = 0; k < grids.size(); ++k) {
        data.col(static_cast<Eigen::Index>(k)) =
            Eigen::Map<const Eigen::VectorXd>(grids[k].x.data(), static_cast<Eigen::Index>(grids[k].x.size()));
      }
      const double cadence = s.T_train / static_cast<double>(s.M);
      const SnapshotMatrix snaps(std::move(data), cadence, training.front());
      RomResult r = pipeline == Pipeline::lagrangian_dmd
                        ? lagrangian_dmd(snaps, initial.values, s.grid(), s.eps, out.times, out.references)
                        : lagrangian_pod(snaps, initial.values, s.grid(), s.eps, cadence,
                                         s.flux_model(), out.times, out.references);
      out.predictions = std::move(r.fields);
      d["rank"] = r.rank;
      d["lagrangian_scheme"] = scheme == LagrangianScheme::naive ? "naive" : "bslm";
      double training_reversal = -std::numeric_limits<double>::infinity();
      for (const auto& g : grids) training_reversal = std::max(training_reversal, max_reversal(g.x));
      d["training_grids_monotone"] = training_reversal < 0.0;
      d["training_max_reversal"] = training_reversal;
      d["grid_monotone"] = r.grid_monotone;
      d["grid_reversal"] = r.grid_reversal;
      d["clamped_queries"] = diag.clamped_queries;
      d["rom"] = r.metadata;
      if (r.model) out.model.emplace(std::move(*r.model));
      break;
    }
    case Pipeline::physics_dmd: {
      const HodographProblem problem = hodograph_problem(s);
      TrainingSet ts;
      ts.times = training;
      if (s.source == DataSource::upwind) {
        const std::size_t k = periodic_extension(s, initial);
        for (std::size_t i = 0; i < training.size(); ++i) {
          ts.fields.push_back(extend_periodic(hfm[out.times.size() * (!have_exact) + i], k));
        }
      } else if (s.source == DataSource::bslm) {
        BslmDiagnostics diag;
        for (const auto& g : lagrangian_at(s, initial, LagrangianScheme::bslm, &diag)) {
          ts.fields.push_back(moving_to_eulerian(g.x, g.u, s.grid(), g.t));
        }
      }
      // Levels above a diffused data peak are moved along characteristics;
      // only when that clashes with the data are the branches cut down to
      // the levels every training field contains.
      auto fit_rom = [&](const HodographProblem& p) {
        return physics_aware_dmd(calibrate_pinned_shock(p, ts), ts, s.eps, out.times, out.references);
      };
      std::optional<RomResult> attempt;
      bool restricted = false;
      try {
        attempt.emplace(fit_rom(problem));
      } catch (const Error& e) {
        if (ts.fields.empty() || e.category() != ErrorCategory::observable_assembly) throw;
        warnings.push_back(std::string("full level range not observable (") + e.what() +
                           "); branches restricted to the training data range");
        restricted = true;
        attempt.emplace(fit_rom(restrict_to_data(problem, ts)));
      }
      RomResult& r = *attempt;
      d["restricted_levels"] = restricted;
      out.predictions = std::move(r.fields);
      d["rank"] = r.rank;
      d["rom"] = r.metadata;
      if (r.model) out.model.emplace(std::move(*r.model));
      break;
    }
  }
  if (!hfm_forecast.empty() && have_exact) d["upwind_errors"] = field_errors(hfm_forecast, out.references);
  d["errors"] = field_errors(out.predictions, out.references);
  if (!have_exact && !exact.empty()) d["exact_errors"] = field_errors(out.predictions, exact);
  d["warnings"] = warnings;
  return out;
}

}  // namespace

std::string_view to_string(DataSource s) noexcept {
  switch (s) {
    case DataSource::analytic: return "analytic";
    case DataSource::upwind: return "upwind";
    case DataSource::bslm: return "bslm";
  }
  return "unknown";
}

std::string_view to_string(Pipeline p) noexcept {
  switch (p) {
    case Pipeline::upwind_only: return "upwind-only";
    case Pipeline::lagrangian_dmd: return "lagrangian-dmd";
    case Pipeline::lagrangian_pod: return "lagrangian-pod";
    case Pipeline::physics_dmd: return "physics-dmd";
  }
  return "unknown";
}

DataSource parse_data_source(std::string_view name) {
  for (auto s : {DataSource::analytic, DataSource::upwind, DataSource::bslm}) {
    if (to_string(s) == name) return s;
  }
  config_error("unknown data source '" + std::string(name) + "'");
}

Pipeline parse_pipeline(std::string_view name) {
  for (auto p : {Pipeline::upwind_only, Pipeline::lagrangian_dmd, Pipeline::lagrangian_pod,
                 Pipeline::physics_dmd}) {
    if (to_string(p) == name) return p;
  }
  config_error("unknown pipeline '" + std::string(name) + "'");
}

FluxModel Scenario::flux_model() const {
  if (flux == "burgers") return FluxModel::burgers();
  if (flux == "buckley-leverett") return FluxModel::buckley_leverett(mobility);
  config_error("unknown flux '" + flux + "'");
}

Grid1D Scenario::grid() const { return Grid1D(a, b, J); }

double Scenario::tanh_width() const { return delta.value_or(10.0 * (b - a) / static_cast<double>(J - 1)); }

double Scenario::hfm_width() const {
  return std::max(tanh_width(), 10.0 * (b - a) / static_cast<double>(J - 1));
}

std::vector<double> Scenario::training_times() const {
  std::vector<double> t(M);
  for (std::size_t k = 1; k <= M; ++k) t[k - 1] = T_train * static_cast<double>(k) / static_cast<double>(M);
  return t;
}

std::vector<double> Scenario::forecast_times() const {
  std::vector<double> t = predict_times;
  t.push_back(T_predict);
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end(),
                      [](double x, double y) { return std::abs(x - y) <= kTimeSlack; }),
          t.end());
  return t;
}

void Scenario::validate() const {
  auto require = [&](bool ok, const std::string& what) {
    if (!ok) config_error("scenario '" + name + "': " + what);
  };
  require(b > a, "domain must satisfy a < b");
  require(J >= 5, "J must be at least 5");
  require(N >= 1 && substeps >= 1, "N and substeps must be positive");
  require(M >= 3, "M must be at least 3");
  require(M <= N, "M must not exceed N");
  require(T_train > 0.0 && T_train <= T_predict + kTimeSlack, "need 0 < T_train <= T_predict");
  require(eps > 0.0 && eps < 1.0, "eps must lie in (0, 1)");
  require(!delta || *delta > 0.0, "delta must be positive");
  for (double t : predict_times) require(t >= 0.0 && t <= T_predict + kTimeSlack, "prediction times must lie in [0, T_predict]");
  if (u0.kind == InitialData::Kind::custom) require(u0.samples.size() == J, "custom samples need J values");
  (void)flux_model();

  // CFL consistency of the HFM over the range of the data.
  const EulerianField f0 = initial_field(*this);
  const auto [lo, hi] = std::minmax_element(f0.values.begin(), f0.values.end());
  const double vmax = flux_model().max_abs_speed({*lo, *hi});
  const double cfl = vmax * hfm_dt() / static_cast<double>(substeps) / grid().dx();
  if (cfl > 1.0) {
    std::ostringstream os;
    os << "CFL number " << cfl << " exceeds one; raise N or substeps";
    require(false, os.str());
  }
}

nlohmann::json Scenario::to_json() const {
  nlohmann::json doc{{"name", name},       {"flux", flux},         {"mobility", mobility},
                     {"domain", {a, b}},   {"J", J},               {"N", N},
                     {"substeps", substeps}, {"T_train", T_train}, {"T_predict", T_predict},
                     {"M", M},             {"eps", eps},           {"levels", mesh_levels()},
                     {"periodic", periodic}, {"source", std::string(to_string(source))},
                     {"predict_times", predict_times}};
  if (delta) doc["delta"] = *delta;
  static const char* kinds[] = {"riemann", "gaussian", "sine", "custom"};
  nlohmann::json init{{"kind", kinds[static_cast<int>(u0.kind)]}};
  if (u0.kind == InitialData::Kind::riemann) {
    init["u_left"] = u0.u_left;
    init["u_right"] = u0.u_right;
    init["x_jump"] = u0.x_jump;
  }
  if (u0.kind == InitialData::Kind::custom) init["samples"] = u0.samples;
  doc["u0"] = init;
  return doc;
}

Scenario Scenario::from_json(const nlohmann::json& doc, Scenario s) {
  if (!doc.is_object()) config_error("scenario configuration must be a JSON object");
  static const std::vector<std::string> known{
      "name", "flux", "mobility", "domain", "J", "N", "substeps", "T_train", "T_predict", "M",
      "eps", "delta", "levels", "periodic", "source", "predict_times", "u0"};
  for (const auto& [key, value] : doc.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      config_error("unknown scenario field '" + key + "'");
    }
  }
  try {
    if (doc.contains("name")) s.name = doc.at("name").get<std::string>();
    if (doc.contains("flux")) s.flux = doc.at("flux").get<std::string>();
    if (doc.contains("mobility")) s.mobility = doc.at("mobility").get<double>();
    if (doc.contains("domain")) {
      const auto& dom = doc.at("domain");
      if (!dom.is_array() || dom.size() != 2) config_error("domain must be [a, b]");
      s.a = dom[0].get<double>();
      s.b = dom[1].get<double>();
    }
    if (doc.contains("J")) s.J = doc.at("J").get<std::size_t>();
    if (doc.contains("N")) s.N = doc.at("N").get<std::size_t>();
    if (doc.contains("substeps")) s.substeps = doc.at("substeps").get<std::size_t>();
    if (doc.contains("T_train")) s.T_train = doc.at("T_train").get<double>();
    if (doc.contains("T_predict")) s.T_predict = doc.at("T_predict").get<double>();
    if (doc.contains("M")) s.M = doc.at("M").get<std::size_t>();
    if (doc.contains("eps")) s.eps = doc.at("eps").get<double>();
    if (doc.contains("delta")) {
      if (doc.at("delta").is_null()) {
        s.delta.reset();
      } else {
        s.delta = doc.at("delta").get<double>();
      }
    }
    if (doc.contains("levels")) s.levels = doc.at("levels").get<std::size_t>();
    if (doc.contains("periodic")) s.periodic = doc.at("periodic").get<bool>();
    if (doc.contains("source")) s.source = parse_data_source(doc.at("source").get<std::string>());
    if (doc.contains("predict_times")) s.predict_times = doc.at("predict_times").get<std::vector<double>>();
    if (doc.contains("u0")) {
      const auto& init = doc.at("u0");
      if (init.contains("kind")) {
        const auto kind = init.at("kind").get<std::string>();
        if (kind == "riemann") {
          s.u0.kind = InitialData::Kind::riemann;
        } else if (kind == "gaussian") {
          s.u0.kind = InitialData::Kind::gaussian;
        } else if (kind == "sine") {
          s.u0.kind = InitialData::Kind::sine;
        } else if (kind == "custom") {
          s.u0.kind = InitialData::Kind::custom;
        } else {
          config_error("unknown initial data '" + kind + "'");
        }
      }
      if (init.contains("u_left")) s.u0.u_left = init.at("u_left").get<double>();
      if (init.contains("u_right")) s.u0.u_right = init.at("u_right").get<double>();
      if (init.contains("x_jump")) s.u0.x_jump = init.at("x_jump").get<double>();
      if (init.contains("samples")) s.u0.samples = init.at("samples").get<std::vector<double>>();
    }
  } catch (const nlohmann::json::exception& e) {
    config_error(std::string("malformed scenario configuration: ") + e.what());
  }
  return s;
}

Scenario Scenario::from_json(const nlohmann::json& doc) { return from_json(doc, Scenario{}); }

EulerianField regularize_riemann(const Grid1D& grid, double u_left, double u_right,
                                 double x_jump, double delta, std::vector<std::string>* warnings) {
  if (!(delta > 0.0)) fail(ErrorCategory::parameter_domain, "tanh width must be positive");
  if (warnings && delta < 0.5 * grid.dx()) {
    std::ostringstream os;
    os << "tanh width " << delta << " is below dx/2 = " << 0.5 * grid.dx()
       << "; the regularized jump is under-resolved";
    warnings->push_back(os.str());
  }
  return sample(grid, [&](double x) { return regularized_step(x, u_left, u_right, x_jump, delta); });
}

std::vector<Scenario> builtin_scenarios() {
  std::vector<Scenario> out;

  Scenario shock;
  shock.name = "riemann-shock";
  shock.a = -0.5;
  shock.b = 1.5;
  shock.N = 2500;
  shock.u0 = {InitialData::Kind::riemann, 2.0, 0.0, 0.0, {}};
  shock.source = DataSource::analytic;
  out.push_back(shock);

  Scenario fan;
  fan.name = "riemann-rarefaction";
  fan.a = -1.0;
  fan.b = 1.0;
  fan.N = 2000;
  fan.delta = 1e-4;
  fan.u0 = {InitialData::Kind::riemann, -1.0, 1.0, 0.0, {}};
  fan.source = DataSource::analytic;
  out.push_back(fan);

  Scenario sine;
  sine.name = "smooth-sine";
  sine.a = 0.0;
  sine.b = 2.0 * std::numbers::pi;
  sine.N = 1000;
  sine.periodic = true;
  sine.u0.kind = InitialData::Kind::sine;
  sine.source = DataSource::upwind;
  out.push_back(sine);

  Scenario mixed;
  mixed.name = "gaussian-mixed";
  mixed.a = 0.0;
  mixed.b = 2.0;
  mixed.N = 100000;
  mixed.M = 3000;
  mixed.T_train = 0.6;
  mixed.u0.kind = InitialData::Kind::gaussian;
  mixed.source = DataSource::upwind;
  out.push_back(mixed);

  Scenario bl;
  bl.name = "buckley-leverett";
  bl.flux = "buckley-leverett";
  bl.mobility = 0.5;
  bl.a = 0.0;
  bl.b = 2.0;
  bl.N = 1000;
  bl.substeps = 2;
  bl.T_train = 0.125;
  bl.T_predict = 0.5;
  // At 10 dx the tail levels near u = 1 are resolved by fewer nodes than
  // levels and the upwind diffusion makes them cross in the forecast.
  bl.delta = 0.02;
  bl.u0 = {InitialData::Kind::riemann, 1.0, 0.0, 1.0, {}};
  bl.source = DataSource::upwind;
  out.push_back(bl);
  return out;
}

Scenario find_scenario(std::string_view name) {
  for (auto& s : builtin_scenarios()) {
    if (s.name == name) return s;
  }
  fail(ErrorCategory::lookup, "unknown scenario '" + std::string(name) + "'");
}

EulerianField initial_field(const Scenario& s, std::vector<std::string>* warnings) {
  const Grid1D grid = s.grid();
  switch (s.u0.kind) {
    case InitialData::Kind::riemann:
      return regularize_riemann(grid, s.u0.u_left, s.u0.u_right, s.u0.x_jump, s.hfm_width(), warnings);
    case InitialData::Kind::gaussian: return sample(grid, gaussian_u0);
    case InitialData::Kind::sine: return sample(grid, sine_u0);
    case InitialData::Kind::custom: return EulerianField(grid, 0.0, s.u0.samples);
  }
  return sample(grid, [](double) { return 0.0; });
}

std::optional<EulerianField> exact_solution(const Scenario& s, double t) {
  if (s.u0.kind != InitialData::Kind::riemann) return std::nullopt;
  const double ul = s.u0.u_left;
  const double ur = s.u0.u_right;
  const double xj = s.u0.x_jump;
  const FluxModel model = s.flux_model();
  const Grid1D grid = s.grid();
  if (ul == ur) return sample(grid, [&](double) { return ul; }, t);
  if (t <= 0.0) return sample(grid, [&](double x) { return x < xj ? ul : ur; }, t);
  if (model.convexity() == Convexity::monotone_convex) {
    if (ul > ur) {
      const double xs = xj + model.shock_speed(ul, ur) * t;
      return sample(grid, [&](double x) { return x < xs ? ul : (x > xs ? ur : 0.5 * (ul + ur)); }, t);
    }
    return sample(grid, [&](double x) { return std::clamp((x - xj) / t, ul, ur); }, t);
  }
  if (!(ul > ur)) return std::nullopt;
  const HullConstruction hull = welge_front(model, ul, ur);
  const double xs = xj + hull.front_speed * t;
  const double x_tail = xj + model.speed(ul) * t;
  return sample(grid, [&](double x) {
    if (x > xs) return ur;
    if (x <= x_tail) return ul;
    return model.inverse_speed((x - xj) / t, hull.rarefaction_interval);
  }, t);
}

HodographProblem hodograph_problem(const Scenario& s) {
  const FluxModel model = s.flux_model();
  HodographProblem p{model, s.grid(), {}, {}, {}};
  const std::size_t P = s.mesh_levels();
  if (s.u0.kind == InitialData::Kind::riemann) {
    const double ul = s.u0.u_left;
    const double ur = s.u0.u_right;
    if (ul == ur) fail(ErrorCategory::degenerate_data, "constant data have no hodograph");
    const double delta = s.tanh_width();
    const double mid = 0.5 * (ul + ur);
    const double half = 0.5 * (ul - ur);
    const double trim = 1e-10 * std::abs(ul - ur);
    const Interval range{std::min(ul, ur) + trim, std::max(ul, ur) - trim};
    const Direction dir = ul > ur ? Direction::decreasing : Direction::increasing;
    p.branches.push_back(make_branch(dir, range, P, [&](double u) {
      return s.u0.x_jump + delta * std::atanh((mid - u) / half);
    }));
    p.far_field = {ul, ur};
    if (ul > ur && model.convexity() == Convexity::monotone_convex) {
      p.shock.kind = ShockSpec::Kind::pinned;
      p.shock.x_jump = absorbed_mean_position(p.branches.front(), ur, ul);
      p.shock.speed = model.shock_speed(ul, ur);
      p.shock.u1 = ul;
      p.shock.u2 = ur;
    } else if (ul > ur) {
      // Non-convex flux: the hull fixes the shock limits from the start.
      const HullConstruction hull = welge_front(model, ul, ur);
      p.shock.kind = ShockSpec::Kind::pinned;
      p.shock.x_jump = absorbed_mean_position(p.branches.front(), ur, hull.front_saturation);
      p.shock.speed = hull.front_speed;
      p.shock.u1 = hull.front_saturation;
      p.shock.u2 = ur;
      p.shock.components = {ShockComponent::x_star, ShockComponent::u1, ShockComponent::u2};
    }
    return p;
  }

  const EulerianField u0 = initial_field(s);
  const Decomposition dec = decompose_field(extend_periodic(u0, periodic_extension(s, u0)), P);
  p.branches = dec.branches;
  p.far_field = dec.far_field;
  double first = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < p.branches.size(); ++i) {
    const double t_star = shock_formation_time(p.branches[i], model).t_star;
    if (t_star < first) {
      first = t_star;
      p.shock.forming_branch = i;
    }
  }
  if (std::isfinite(first)) {
    p.shock.kind = ShockSpec::Kind::tracked;
    p.shock.components = {ShockComponent::x_star, ShockComponent::u1, ShockComponent::u2};
  }
  return p;
}

RunOutput run(const Scenario& s, Pipeline pipeline) {
  try {
    return run_impl(s, pipeline);
  } catch (const Error& e) {
    throw Error(e.category(), s.name + ": " + e.what());
  }
}

void write_outputs(const RunOutput& out, const std::filesystem::path& path) {
  std::ofstream csv(path);
  if (!csv) fail(ErrorCategory::io, "cannot open '" + path.string() + "' for writing");
  csv << "t,x,u_ref,u_rom\n";
  char line[128];
  for (std::size_t i = 0; i < out.predictions.size(); ++i) {
    const EulerianField& rom = out.predictions[i];
    const EulerianField* ref = i < out.references.size() ? &out.references[i] : nullptr;
    for (std::size_t j = 0; j < rom.grid.size(); ++j) {
      std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g\n", rom.t, rom.grid.node(j),
                    ref ? ref->values[j] : rom.values[j], rom.values[j]);
      csv << line;
    }
  }
  csv.close();
  if (!csv) fail(ErrorCategory::io, "failed writing '" + path.string() + "'");

  const std::filesystem::path sidecar = path.string() + ".json";
  std::ofstream js(sidecar);
  if (!js) fail(ErrorCategory::io, "cannot open '" + sidecar.string() + "' for writing");
  js << out.diagnostics.dump(2) << '\n';
  js.close();
  if (!js) fail(ErrorCategory::io, "failed writing '" + sidecar.string() + "'");
}

double front_position(const EulerianField& field, double high, double low) {
  const double level = 0.5 * (high + low);
  const auto& v = field.values;
  for (std::size_t j = v.size() - 1; j > 0; --j) {
    if (v[j - 1] >= level && v[j] < level) {
      const double w = (v[j - 1] - level) / (v[j - 1] - v[j]);
      return field.grid.node(j - 1) + w * field.grid.dx();
    }
  }
  fail(ErrorCategory::degenerate_data, "no front found in the field");
}

}  // namespace shockrom
