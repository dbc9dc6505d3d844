#include "shockrom/rom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "shockrom/error.hpp"

namespace shockrom {

namespace {

bool is_formed(const ShockState& s) { return s.t >= s.t_star; }

std::vector<ShockState> formed_only(std::span<const ShockState> shocks) {
  std::vector<ShockState> out;
  for (const auto& s : shocks) {
    if (is_formed(s)) out.push_back(s);
  }
  return out;
}

double component_value(const ShockState& s, ShockComponent c) {
  switch (c) {
    case ShockComponent::x_star: return s.x_star;
    case ShockComponent::u1: return s.u1;
    case ShockComponent::u2: return s.u2;
  }
  return 0.0;
}

void set_component(ShockState& s, ShockComponent c, double v) {
  switch (c) {
    case ShockComponent::x_star: s.x_star = v; break;
    case ShockComponent::u1: s.u1 = v; break;
    case ShockComponent::u2: s.u2 = v; break;
  }
}

std::vector<ShockState> shock_templates(const HodographProblem& problem) {
  std::vector<ShockState> out;
  if (problem.shock.kind == ShockSpec::Kind::pinned) {
    ShockState s;
    s.t_star = 0.0;
    s.x_star = problem.shock.x_jump;
    s.u1 = problem.shock.u1;
    s.u2 = problem.shock.u2;
    s.u_star = 0.5 * (s.u1 + s.u2);
    out.push_back(s);
  } else if (problem.shock.kind == ShockSpec::Kind::tracked) {
    const auto& b = problem.branches.at(problem.shock.forming_branch);
    const FormationTime ft = shock_formation_time(b, problem.model);
    ShockState s;
    s.t_star = ft.t_star;
    s.u_star = ft.u_star;
    s.u1 = s.u2 = ft.u_star;
    s.x_star = b.x_at(ft.u_star);
    out.push_back(s);
  }
  return out;
}

std::vector<double> prediction_errors(const std::vector<EulerianField>& fields,
                                      std::span<const EulerianField> references) {
  std::vector<double> errors;
  if (references.empty()) return errors;
  if (references.size() != fields.size()) {
    fail(ErrorCategory::parameter_domain, "one reference field per prediction time is required");
  }
  for (std::size_t i = 0; i < fields.size(); ++i) {
    errors.push_back(relative_l2_error(fields[i], references[i]));
  }
  return errors;
}

nlohmann::json eigenvalue_json(const DmdModel& model) {
  auto out = nlohmann::json::array();
  for (Eigen::Index k = 0; k < model.eigenvalues().size(); ++k) {
    out.push_back({model.eigenvalues()(k).real(), model.eigenvalues()(k).imag()});
  }
  return out;
}

}  // namespace

std::string_view to_string(ShockComponent c) noexcept {
  switch (c) {
    case ShockComponent::x_star: return "x_star";
    case ShockComponent::u1: return "u1";
    case ShockComponent::u2: return "u2";
  }
  return "unknown";
}

ObservableLayout ObservableLayout::make(
    std::span<const std::size_t> branch_sizes,
    std::span<const std::vector<ShockComponent>> shock_components) {
  ObservableLayout layout;
  std::size_t offset = 0;
  for (std::size_t i = 0; i < branch_sizes.size(); ++i) {
    layout.branch_slots.push_back({i, offset, branch_sizes[i]});
    offset += branch_sizes[i];
  }
  for (std::size_t i = 0; i < shock_components.size(); ++i) {
    layout.shock_slots.push_back({i, offset, shock_components[i]});
    offset += shock_components[i].size();
  }
  layout.total = offset;
  if (!layout.shock_slots.empty()) {
    std::size_t levels = 0;
    for (std::size_t n : branch_sizes) levels += n;
    layout.shock_weight = std::sqrt(static_cast<double>(std::max<std::size_t>(levels, 1)));
  }
  layout.validate();
  return layout;
}

void ObservableLayout::validate() const {
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  for (const auto& s : branch_slots) spans.emplace_back(s.offset, s.length);
  for (const auto& s : shock_slots) spans.emplace_back(s.offset, s.components.size());
  std::sort(spans.begin(), spans.end());
  std::size_t cursor = 0;
  for (const auto& [offset, length] : spans) {
    if (offset != cursor || length == 0) {
      fail(ErrorCategory::observable_assembly, "observable slots overlap or leave gaps");
    }
    cursor += length;
  }
  if (cursor != total) fail(ErrorCategory::observable_assembly, "observable slots do not tile the vector");
}

nlohmann::json ObservableLayout::to_json() const {
  nlohmann::json doc;
  doc["total"] = total;
  doc["shock_weight"] = shock_weight;
  auto& g1 = doc["branch_slots"] = nlohmann::json::array();
  for (const auto& s : branch_slots) {
    g1.push_back({{"branch", s.branch}, {"offset", s.offset}, {"length", s.length}});
  }
  auto& g2 = doc["shock_slots"] = nlohmann::json::array();
  for (const auto& s : shock_slots) {
    auto names = nlohmann::json::array();
    for (auto c : s.components) names.push_back(std::string(to_string(c)));
    g2.push_back({{"shock", s.shock}, {"offset", s.offset}, {"components", names}});
  }
  return doc;
}

Eigen::VectorXd assemble_observables(std::span<const MonotoneBranch> branches,
                                     std::span<const ShockState> shocks,
                                     const ObservableLayout& layout,
                                     BoundaryStates far_field) {
  if (branches.size() != layout.branch_slots.size() || shocks.size() != layout.shock_slots.size()) {
    fail(ErrorCategory::observable_assembly, "branch or shock count does not match the layout");
  }
  const std::vector<ShockState> cut = formed_only(shocks);
  const auto absorbed = absorbed_levels(branches, cut, far_field);
  Eigen::VectorXd g(static_cast<Eigen::Index>(layout.total));
  for (const auto& slot : layout.branch_slots) {
    const MonotoneBranch& b = branches[slot.branch];
    if (b.size() != slot.length) {
      fail(ErrorCategory::observable_assembly, "branch size does not match its slot");
    }
    const double sign = b.direction == Direction::increasing ? 1.0 : -1.0;
    for (std::size_t k = 0; k < b.size(); ++k) {
      if (!std::isfinite(b.x_of_u[k])) {
        fail(ErrorCategory::observable_assembly, "non-finite branch position");
      }
      if (k > 0 && !absorbed[slot.branch][k] && !absorbed[slot.branch][k - 1] &&
          !(sign * (b.x_of_u[k] - b.x_of_u[k - 1]) > 0.0)) {
        std::ostringstream os;
        os << "branch " << slot.branch << " is not invertible at t = " << b.t << " near u = "
           << b.u_mesh[k];
        fail(ErrorCategory::observable_assembly, os.str());
      }
      g(static_cast<Eigen::Index>(slot.offset + k)) = b.x_of_u[k];
    }
  }
  for (const auto& slot : layout.shock_slots) {
    for (std::size_t c = 0; c < slot.components.size(); ++c) {
      g(static_cast<Eigen::Index>(slot.offset + c)) =
          layout.shock_weight * component_value(shocks[slot.shock], slot.components[c]);
    }
  }
  return g;
}

DecodedObservables decode_observables(const Eigen::VectorXd& g, const ObservableLayout& layout,
                                      std::span<const MonotoneBranch> branch_templates,
                                      std::span<const ShockState> shock_templates, double t) {
  if (static_cast<std::size_t>(g.size()) != layout.total) {
    fail(ErrorCategory::reconstruction, "observable vector does not match the layout");
  }
  DecodedObservables out;
  for (const auto& slot : layout.branch_slots) {
    MonotoneBranch b = branch_templates[slot.branch];
    for (std::size_t k = 0; k < slot.length; ++k) {
      b.x_of_u[k] = g(static_cast<Eigen::Index>(slot.offset + k));
    }
    b.t = t;
    out.branches.push_back(std::move(b));
  }
  for (const auto& slot : layout.shock_slots) {
    ShockState s = shock_templates[slot.shock];
    s.t = t;
    for (std::size_t c = 0; c < slot.components.size(); ++c) {
      set_component(s, slot.components[c],
                    g(static_cast<Eigen::Index>(slot.offset + c)) / layout.shock_weight);
    }
    out.shocks.push_back(s);
  }
  return out;
}

double relative_l2_error(const EulerianField& candidate, const EulerianField& reference,
                         bool* absolute) {
  if (candidate.values.size() != reference.values.size()) {
    fail(ErrorCategory::parameter_domain, "fields live on different grids");
  }
  double diff = 0.0;
  double ref = 0.0;
  for (std::size_t j = 0; j < candidate.values.size(); ++j) {
    const double d = candidate.values[j] - reference.values[j];
    diff += d * d;
    ref += reference.values[j] * reference.values[j];
  }
  if (absolute) *absolute = ref == 0.0;
  return ref == 0.0 ? std::sqrt(diff) : std::sqrt(diff / ref);
}

EulerianField moving_to_eulerian(std::span<const double> x, std::span<const double> u,
                                 const Grid1D& grid, double t) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> xs, us;
  xs.reserve(x.size());
  us.reserve(x.size());
  for (std::size_t i : order) {
    xs.push_back(x[i]);
    us.push_back(u[i]);
  }
  std::vector<double> values(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) values[j] = interpolate_sorted(xs, us, grid.node(j));
  return EulerianField(grid, t, std::move(values));
}

RomResult lagrangian_dmd(const SnapshotMatrix& grids, std::span<const double> carried_values,
                         const Grid1D& grid, double eps, std::span<const double> predict_times,
                         std::span<const EulerianField> references) {
  if (static_cast<std::size_t>(grids.rows()) != carried_values.size()) {
    fail(ErrorCategory::parameter_domain, "one carried value per Lagrangian node is required");
  }
  RomResult result;
  DmdModel model = fit(grids, eps);
  result.rank = model.rank();
  result.train_start = grids.t0;
  result.train_end = grids.time(grids.cols() - 1);
  for (double t : predict_times) {
    const Eigen::VectorXd x = model.predict_at_time(t);
    const double reversal = max_reversal(std::span<const double>(x.data(), x.size()));
    result.grid_monotone.push_back(reversal < 0.0);
    result.grid_reversal.push_back(reversal);
    result.times.push_back(t);
    result.fields.push_back(moving_to_eulerian(std::span<const double>(x.data(), x.size()),
                                               carried_values, grid, t));
  }
  result.errors = prediction_errors(result.fields, references);
  result.metadata["eigenvalues"] = eigenvalue_json(model);
  result.model.emplace(std::move(model));
  return result;
}

RomResult lagrangian_pod(const SnapshotMatrix& grids, std::span<const double> carried_values,
                         const Grid1D& grid, double eps, double dt, const FluxModel& model,
                         std::span<const double> predict_times,
                         std::span<const EulerianField> references) {
  if (static_cast<std::size_t>(grids.rows()) != carried_values.size()) {
    fail(ErrorCategory::parameter_domain, "one carried value per Lagrangian node is required");
  }
  if (!(dt > 0.0)) fail(ErrorCategory::parameter_domain, "POD time step must be positive");
  const TruncatedSvd svd = truncated_svd(grids.data, eps);
  if (svd.spectrum.size() == 0) fail(ErrorCategory::degenerate_data, "snapshot matrix is zero");
  const auto r = svd.leading.sigma.size();
  const Eigen::MatrixXd& phi = svd.leading.U;

  Eigen::VectorXd speed(static_cast<Eigen::Index>(carried_values.size()));
  for (std::size_t j = 0; j < carried_values.size(); ++j) {
    speed(static_cast<Eigen::Index>(j)) = model.speed(carried_values[j]);
  }
  // Projected residual of the backward-Euler Lagrangian step.
  auto residual = [&](const Eigen::VectorXd& coeffs, const Eigen::VectorXd& previous) {
    const Eigen::VectorXd x = phi * coeffs;
    return Eigen::VectorXd(phi.transpose() * (x - phi * previous - dt * speed));
  };
  auto newton = [&](const Eigen::VectorXd& previous, std::size_t step) {
    Eigen::VectorXd c = previous;
    for (int it = 0; it < 50; ++it) {
      const Eigen::VectorXd res = residual(c, previous);
      if (!res.allFinite()) break;
      if (res.norm() <= 1e-12 * (1.0 + c.norm())) return c;
      Eigen::MatrixXd jac(r, r);
      const double h = 1e-7 * (1.0 + c.norm());
      for (Eigen::Index k = 0; k < r; ++k) {
        Eigen::VectorXd probe = c;
        probe(k) += h;
        jac.col(k) = (residual(probe, previous) - res) / h;
      }
      c -= jac.fullPivLu().solve(res);
    }
    std::ostringstream os;
    os << "POD Newton iteration did not converge at step " << step;
    fail(ErrorCategory::pod_diverged, os.str());
  };

  RomResult result;
  result.rank = static_cast<std::size_t>(r);
  result.train_start = grids.t0;
  result.train_end = grids.time(grids.cols() - 1);

  std::vector<std::pair<double, std::size_t>> wanted;
  for (std::size_t i = 0; i < predict_times.size(); ++i) wanted.emplace_back(predict_times[i], i);
  std::sort(wanted.begin(), wanted.end());
  result.times.assign(predict_times.begin(), predict_times.end());
  std::vector<std::optional<EulerianField>> fields(predict_times.size());
  result.grid_monotone.assign(predict_times.size(), true);
  result.grid_reversal.assign(predict_times.size(), 0.0);

  Eigen::VectorXd coeffs = phi.transpose() * grids.data.col(0);
  double t = grids.t0;
  std::size_t step = 0;
  for (const auto& [target, index] : wanted) {
    const auto steps_needed = static_cast<std::size_t>(std::llround((target - grids.t0) / dt));
    while (step < steps_needed) {
      coeffs = newton(coeffs, step + 1);
      ++step;
      t = grids.t0 + dt * static_cast<double>(step);
    }
    const Eigen::VectorXd x = phi * coeffs;
    result.grid_reversal[index] = max_reversal(std::span<const double>(x.data(), x.size()));
    result.grid_monotone[index] = result.grid_reversal[index] < 0.0;
    fields[index] = moving_to_eulerian(std::span<const double>(x.data(), x.size()),
                                       carried_values, grid, target);
  }
  (void)t;
  for (auto& f : fields) result.fields.push_back(std::move(*f));
  result.errors = prediction_errors(result.fields, references);
  result.metadata["pod_rank"] = r;
  return result;
}

std::vector<std::vector<ShockState>> shock_history(const HodographProblem& problem,
                                                   std::span<const double> times,
                                                   double max_step) {
  std::vector<std::vector<ShockState>> out(times.size());
  const ShockSpec& spec = problem.shock;
  if (spec.kind == ShockSpec::Kind::none) return out;
  if (spec.kind == ShockSpec::Kind::pinned) {
    const ShockState base = shock_templates(problem).front();
    for (std::size_t i = 0; i < times.size(); ++i) {
      ShockState s = base;
      s.t = times[i];
      s.x_star = spec.x_jump + spec.speed * times[i];
      out[i].push_back(s);
    }
    return out;
  }
  ShockTracker tracker(problem.branches, problem.far_field, problem.model, spec.forming_branch);
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (i > 0 && times[i] < times[i - 1]) {
      fail(ErrorCategory::parameter_domain, "shock history needs increasing times");
    }
    tracker.advance_to(times[i], max_step);
    ShockState s = tracker.state();
    s.t = times[i];
    out[i].push_back(s);
  }
  return out;
}

std::vector<MonotoneBranch> observe_branches(const EulerianField& data,
                                             std::span<const MonotoneBranch> previous,
                                             std::span<const ShockState> shocks,
                                             const FluxModel& model, BoundaryStates far_field) {
  std::vector<MonotoneBranch> predicted;
  predicted.reserve(previous.size());
  for (const auto& b : previous) predicted.push_back(evolve_branch(b, model, data.t - b.t));
  const std::vector<ShockState> cut = formed_only(shocks);
  const auto absorbed = absorbed_levels(predicted, cut, far_field);

  const RunSplit split = monotone_runs(data);
  if (split.runs.size() != previous.size()) {
    std::ostringstream os;
    os << "data at t = " << data.t << " has " << split.runs.size() << " monotone runs, expected "
       << previous.size();
    fail(ErrorCategory::observable_assembly, os.str());
  }
  for (std::size_t i = 0; i < previous.size(); ++i) {
    const MonotoneRun& run = split.runs[i];
    if (run.direction != previous[i].direction) {
      std::ostringstream os;
      os << "monotone run " << i << " of the data at t = " << data.t
         << " changed direction";
      fail(ErrorCategory::observable_assembly, os.str());
    }
    std::vector<double> us = run.u;
    std::vector<double> xs = run.x;
    if (run.direction == Direction::decreasing) {
      std::reverse(us.begin(), us.end());
      std::reverse(xs.begin(), xs.end());
    }
    MonotoneBranch& b = predicted[i];
    for (std::size_t k = 0; k < b.size(); ++k) {
      const double level = b.u_mesh[k];
      if (absorbed[i][k] || level < us.front() || level > us.back()) continue;
      b.x_of_u[k] = interpolate_sorted(us, xs, level);
    }
  }
  return predicted;
}

ObservableLayout layout_for(const HodographProblem& problem) {
  std::vector<std::size_t> sizes;
  for (const auto& b : problem.branches) sizes.push_back(b.size());
  std::vector<std::vector<ShockComponent>> shocks;
  if (problem.shock.kind != ShockSpec::Kind::none) shocks.push_back(problem.shock.components);
  return ObservableLayout::make(sizes, shocks);
}

HodographProblem restrict_to_data(const HodographProblem& problem, const TrainingSet& training) {
  std::vector<Interval> ranges;
  for (const auto& b : problem.branches) ranges.push_back({b.u_lo, b.u_hi});
  for (const auto& field : training.fields) {
    const RunSplit split = monotone_runs(field);
    if (split.runs.size() != ranges.size()) {
      std::ostringstream os;
      os << "data at t = " << field.t << " has " << split.runs.size()
         << " monotone runs, expected " << ranges.size();
      fail(ErrorCategory::observable_assembly, os.str());
    }
    for (std::size_t i = 0; i < ranges.size(); ++i) {
      const auto [lo, hi] = std::minmax_element(split.runs[i].u.begin(), split.runs[i].u.end());
      ranges[i].lo = std::max(ranges[i].lo, *lo);
      ranges[i].hi = std::min(ranges[i].hi, *hi);
    }
  }
  HodographProblem out = problem;
  for (std::size_t i = 0; i < ranges.size(); ++i) {
    const MonotoneBranch& b = problem.branches[i];
    if (!(ranges[i].lo < ranges[i].hi)) {
      fail(ErrorCategory::observable_assembly, "training data leave no common levels on a branch");
    }
    if (ranges[i].lo == b.u_lo && ranges[i].hi == b.u_hi) continue;
    out.branches[i] = make_branch(b.direction, ranges[i], b.size(),
                                  [&](double u) { return b.x_at(u); }, b.t);
  }
  return out;
}

HodographProblem calibrate_pinned_shock(const HodographProblem& problem, const TrainingSet& training) {
  if (problem.shock.kind != ShockSpec::Kind::pinned || training.fields.empty()) return problem;
  const ShockSpec& sh = problem.shock;
  const double level = 0.5 * (sh.u1 + sh.u2);
  const double t_from = 0.5 * training.times.back();
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& field : training.fields) {
    if (field.t < t_from) continue;
    const double guess = sh.x_jump + sh.speed * field.t;
    const auto& x = field.grid.nodes();
    const auto& u = field.values;
    double best = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t j = 0; j + 1 < u.size(); ++j) {
      const double a = u[j] - level;
      const double b = u[j + 1] - level;
      if (a == b || a * b > 0.0 || (a == 0.0 && j > 0)) continue;
      const double xc = x[j] + (x[j + 1] - x[j]) * a / (a - b);
      if (std::isnan(best) || std::abs(xc - guess) < std::abs(best - guess)) best = xc;
    }
    if (std::isnan(best)) continue;
    sum += best - sh.speed * field.t;
    ++count;
  }
  if (count == 0) fail(ErrorCategory::observable_assembly, "training data never cross the shock midpoint level");
  HodographProblem out = problem;
  out.shock.x_jump = sum / static_cast<double>(count);
  return out;
}

EulerianField hodograph_solution(const HodographProblem& problem, double t, double max_step) {
  std::vector<MonotoneBranch> now;
  for (const auto& b : problem.branches) now.push_back(evolve_branch(b, problem.model, t - b.t));
  const std::vector<double> times{t};
  const auto shocks = shock_history(problem, times, max_step);
  const auto cut = formed_only(shocks.front());
  return assemble_solution(now, cut, problem.grid, problem.far_field, t);
}

SnapshotMatrix observable_snapshots(const HodographProblem& problem, const TrainingSet& training,
                                    ObservableLayout& layout) {
  const auto& times = training.times;
  if (times.size() < 3) fail(ErrorCategory::degenerate_data, "need at least three training times");
  if (!training.fields.empty() && training.fields.size() != times.size()) {
    fail(ErrorCategory::parameter_domain, "one training field per training time is required");
  }
  const double cadence = times[1] - times[0];
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (std::abs(times[i] - times[i - 1] - cadence) > 1e-9 * std::max(1.0, std::abs(times[i]))) {
      fail(ErrorCategory::parameter_domain, "training times must be uniformly spaced");
    }
  }
  layout = layout_for(problem);
  const auto shocks = shock_history(problem, times, cadence);
  Eigen::MatrixXd data(static_cast<Eigen::Index>(layout.total), static_cast<Eigen::Index>(times.size()));
  std::vector<MonotoneBranch> current = problem.branches;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (training.fields.empty()) {
      for (std::size_t b = 0; b < current.size(); ++b) {
        current[b] = evolve_branch(problem.branches[b], problem.model, times[i] - problem.branches[b].t);
      }
    } else {
      current = observe_branches(training.fields[i], current, shocks[i], problem.model,
                                 problem.far_field);
    }
    data.col(static_cast<Eigen::Index>(i)) =
        assemble_observables(current, shocks[i], layout, problem.far_field);
  }
  return SnapshotMatrix(std::move(data), cadence, times.front());
}

std::optional<MassBudget> mass_budget(const HodographProblem& problem, const TrainingSet& training) {
  if (training.fields.empty()) return std::nullopt;
  const EulerianField& last = training.fields.back();
  const auto& u = last.values;
  auto settled = [](double v, double far) { return std::abs(v - far) <= 1e-9 * (1.0 + std::abs(far)); };
  if (!settled(u.front(), problem.far_field.left) || !settled(u.back(), problem.far_field.right)) {
    return std::nullopt;
  }
  MassBudget budget;
  budget.domain = {last.grid.a(), last.grid.b()};
  budget.t = last.t;
  budget.net_inflow = problem.model.flux(problem.far_field.left) - problem.model.flux(problem.far_field.right);
  double m = 0.0;
  for (std::size_t j = 0; j + 1 < u.size(); ++j) m += 0.5 * (u[j] + u[j + 1]);
  budget.mass = m * last.grid.dx();
  return budget;
}

namespace {

struct Forecast {
  std::vector<MonotoneBranch> branches;
  std::vector<ShockState> cut;  // formed shocks only
  bool conserving = false;      // cut placed by the mass balance
};

Forecast decode_forecast(const HodographProblem& problem, const ObservableLayout& layout,
                         const DmdModel& model, double t, const std::optional<MassBudget>& budget) {
  const Eigen::VectorXd g = model.predict_at_time(t);
  const auto templates = shock_templates(problem);
  DecodedObservables decoded = decode_observables(g, layout, problem.branches, templates, t);
  auto cut = formed_only(decoded.shocks);
  if (problem.shock.kind == ShockSpec::Kind::tracked && !cut.empty()) {
    const WaveProfile profile(decoded.branches, problem.far_field);
    Interval domain{profile.x().front(), profile.x().back()};
    double mass = 0.0;
    if (budget) {
      domain = budget->domain;
      mass = budget->at(t);
    } else {
      for (double x : profile.x()) domain = {std::min(domain.lo, x), std::max(domain.hi, x)};
      mass = selection_mass(profile, domain.lo, domain);
    }
    if (const auto xs = conserving_jump(profile, mass, domain, cut.front().x_star)) {
      const ShockState s = shock_from_profile(profile, t, *xs);
      cut.front().x_star = s.x_star;
      cut.front().u1 = s.u1;
      cut.front().u2 = s.u2;
      return {std::move(decoded.branches), std::move(cut), true};
    }
  }
  return {std::move(decoded.branches), std::move(cut), false};
}

}  // namespace

EulerianField reconstruct(const HodographProblem& problem, const ObservableLayout& layout,
                          const DmdModel& model, double t, std::optional<MassBudget> budget) {
  const Forecast f = decode_forecast(problem, layout, model, t, budget);
  return assemble_solution(f.branches, f.cut, problem.grid, problem.far_field, t);
}

RomResult physics_aware_dmd(const HodographProblem& problem, const TrainingSet& training,
                            double eps, std::span<const double> predict_times,
                            std::span<const EulerianField> references) {
  ObservableLayout layout;
  const SnapshotMatrix snaps = observable_snapshots(problem, training, layout);
  DmdModel model = fit(snaps, eps);
  const auto budget = mass_budget(problem, training);

  RomResult result;
  result.rank = model.rank();
  result.train_start = training.times.front();
  result.train_end = training.times.back();
  double worst_imag = 0.0;
  auto shock_track = nlohmann::json::array();
  for (double t : predict_times) {
    worst_imag = std::max(worst_imag, model.imaginary_residual(model.step_index(t)));
    result.times.push_back(t);
    const Forecast f = decode_forecast(problem, layout, model, t, budget);
    result.fields.push_back(assemble_solution(f.branches, f.cut, problem.grid, problem.far_field, t));
    if (!layout.shock_slots.empty()) {
      const Eigen::VectorXd g = model.predict_at_time(t);
      nlohmann::json entry{{"t", t}, {"formed", !f.cut.empty()}};
      const auto& slot = layout.shock_slots.front();
      nlohmann::json raw;
      for (std::size_t c = 0; c < slot.components.size(); ++c) {
        raw[std::string(to_string(slot.components[c]))] =
            g(static_cast<Eigen::Index>(slot.offset + c)) / layout.shock_weight;
      }
      entry["g2"] = raw;
      if (!f.cut.empty()) {
        entry["x_star"] = f.cut.front().x_star;
        entry["u1"] = f.cut.front().u1;
        entry["u2"] = f.cut.front().u2;
        entry["placement"] = f.conserving ? "mass-balance" : "g2";
      }
      shock_track.push_back(entry);
    }
  }
  result.errors = prediction_errors(result.fields, references);
  result.metadata["layout"] = layout.to_json();
  result.metadata["eigenvalues"] = eigenvalue_json(model);
  result.metadata["training_reconstruction_error"] = reconstruction_error(model, snaps);
  result.metadata["max_imaginary_residual"] = worst_imag;
  if (!shock_track.empty()) result.metadata["shock"] = shock_track;
  if (budget) result.metadata["mass_budget"] = {{"t", budget->t}, {"mass", budget->mass},
                                                 {"net_inflow", budget->net_inflow}};
  result.model.emplace(std::move(model));
  return result;
}

}  // namespace shockrom
