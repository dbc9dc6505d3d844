#include "shockrom/hodograph.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <sstream>

#include "shockrom/error.hpp"

namespace shockrom {

namespace {

constexpr double kJitter = 1e-10;

double sign_of(Direction d) { return d == Direction::increasing ? 1.0 : -1.0; }

std::vector<double> uniform_mesh(double lo, double hi, std::size_t points) {
  std::vector<double> mesh(points);
  const double step = (hi - lo) / static_cast<double>(points - 1);
  for (std::size_t k = 0; k < points; ++k) mesh[k] = lo + step * static_cast<double>(k);
  mesh.back() = hi;
  return mesh;
}

// g(u) = -x0'(u) of an evolved branch: x' = x0' + t f'.
double initial_gradient(const MonotoneBranch& b, const FluxModel& model, double u) {
  return -b.slope_at(u) + b.t * model.speed_derivative(u);
}

struct PathPoint {
  double x;
  double u;
  std::size_t branch;
  std::size_t level;
};

struct Piece {
  std::vector<PathPoint> points;
  bool left_open = false;   // extends to -inf with the far-left state
  bool right_open = false;  // extends to +inf with the far-right state
};

// Splits the wave profile at every shock; the part between the first and
// the last crossing of x* is dropped.
std::vector<Piece> cut_profile(const WaveProfile& profile, std::span<const ShockState> shocks,
                               std::vector<char>* absorbed) {
  const auto& x = profile.x();
  const auto& u = profile.u();
  const std::size_t n = profile.size();
  if (absorbed) absorbed->assign(n, 0);

  auto point = [&](std::size_t i) {
    return PathPoint{x[i], u[i], profile.branch_of()[i], profile.level_of()[i]};
  };
  auto crossing_point = [&](double xs, double us) {
    return PathPoint{xs, us, static_cast<std::size_t>(-1), 0};
  };

  std::vector<Piece> pieces;
  Piece current;
  current.left_open = true;
  std::size_t cursor = 0;  // first path point not yet consumed
  double prev_x = -std::numeric_limits<double>::infinity();
  for (const ShockState& shock : shocks) {
    if (shock.x_star < prev_x) {
      fail(ErrorCategory::reconstruction, "shocks are not ordered by position");
    }
    prev_x = shock.x_star;
    const auto first = profile.first_crossing(shock.x_star, cursor);
    auto last = profile.last_crossing(shock.x_star);
    if (last.segment < first.segment) last = first;
    const std::ptrdiff_t keep_to = first.segment;  // points [cursor, keep_to] stay left
    for (std::ptrdiff_t i = static_cast<std::ptrdiff_t>(cursor); i <= keep_to; ++i) {
      current.points.push_back(point(static_cast<std::size_t>(i)));
    }
    current.points.push_back(crossing_point(shock.x_star, first.u));
    pieces.push_back(std::move(current));
    current = Piece{};
    current.points.push_back(crossing_point(shock.x_star, last.u));
    if (absorbed) {
      for (std::ptrdiff_t i = keep_to + 1; i <= last.segment && i < static_cast<std::ptrdiff_t>(n);
           ++i) {
        if (i >= 0) (*absorbed)[static_cast<std::size_t>(i)] = 1;
      }
    }
    cursor = static_cast<std::size_t>(std::max<std::ptrdiff_t>(last.segment + 1, 0));
  }
  for (std::size_t i = cursor; i < n; ++i) current.points.push_back(point(i));
  current.right_open = true;
  pieces.push_back(std::move(current));
  return pieces;
}

// Pieces must be single-valued; sub-jitter reversals are re-sorted.
void check_piece(Piece& piece) {
  auto& pts = piece.points;
  double scale = 1.0;
  for (const auto& p : pts) scale = std::max(scale, std::abs(p.x));
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (pts[i].x < pts[i - 1].x - kJitter * scale) {
      const auto& bad = pts[i].branch != static_cast<std::size_t>(-1) ? pts[i] : pts[i - 1];
      std::ostringstream os;
      os << "reconstructed profile is multi-valued at x = " << pts[i].x << " (branch "
         << bad.branch << ", slot " << bad.level << ", backward step "
         << pts[i - 1].x - pts[i].x << ")";
      fail(ErrorCategory::reconstruction, os.str());
    }
  }
  std::stable_sort(pts.begin(), pts.end(),
                   [](const PathPoint& a, const PathPoint& b) { return a.x < b.x; });
}

}  // namespace

double MonotoneBranch::du() const noexcept {
  return size() < 2 ? 0.0 : (u_hi - u_lo) / static_cast<double>(size() - 1);
}

double MonotoneBranch::x_at(double u) const {
  return interpolate_sorted(u_mesh, x_of_u, u);
}

std::vector<double> MonotoneBranch::slopes() const {
  const std::size_t p = size();
  std::vector<double> s(p, 0.0);
  if (p < 2) return s;
  const double h = du();
  s[0] = (x_of_u[1] - x_of_u[0]) / h;
  s[p - 1] = (x_of_u[p - 1] - x_of_u[p - 2]) / h;
  for (std::size_t k = 1; k + 1 < p; ++k) s[k] = (x_of_u[k + 1] - x_of_u[k - 1]) / (2.0 * h);
  return s;
}

double MonotoneBranch::slope_at(double u) const {
  const std::size_t p = size();
  if (p < 2) return 0.0;
  const double h = du();
  const double pos = std::clamp((u - u_lo) / h, 0.0, static_cast<double>(p - 1));
  std::size_t k = static_cast<std::size_t>(pos);
  if (k >= p - 1) k = p - 2;
  auto slope = [&](std::size_t i) {
    if (i == 0) return (x_of_u[1] - x_of_u[0]) / h;
    if (i == p - 1) return (x_of_u[p - 1] - x_of_u[p - 2]) / h;
    return (x_of_u[i + 1] - x_of_u[i - 1]) / (2.0 * h);
  };
  const double w = pos - static_cast<double>(k);
  return (1.0 - w) * slope(k) + w * slope(k + 1);
}

bool MonotoneBranch::is_strictly_monotone(double tol) const {
  const double s = sign_of(direction);
  for (std::size_t k = 1; k < x_of_u.size(); ++k) {
    if (!(s * (x_of_u[k] - x_of_u[k - 1]) > tol)) return false;
  }
  return true;
}

void MonotoneBranch::validate() const {
  std::ostringstream os;
  if (u_mesh.size() < 2 || x_of_u.size() != u_mesh.size()) {
    os << "branch needs at least two levels with matching x samples (got " << u_mesh.size()
       << " levels, " << x_of_u.size() << " samples)";
    fail(ErrorCategory::non_invertible_data, os.str());
  }
  const double h = du();
  const double scale = std::max({1.0, std::abs(u_lo), std::abs(u_hi)});
  for (std::size_t k = 0; k < u_mesh.size(); ++k) {
    if (std::abs(u_mesh[k] - (u_lo + h * static_cast<double>(k))) > 1e-12 * scale) {
      fail(ErrorCategory::non_invertible_data, "branch u mesh is not uniform");
    }
    if (!std::isfinite(x_of_u[k])) fail(ErrorCategory::non_invertible_data, "non-finite x(u)");
  }
  if (!is_strictly_monotone()) {
    os << "branch x(u) on [" << u_lo << ", " << u_hi << "] is not strictly "
       << (direction == Direction::increasing ? "increasing" : "decreasing");
    fail(ErrorCategory::non_invertible_data, os.str());
  }
}

MonotoneBranch make_branch(Direction direction, Interval u_range, std::size_t points,
                           const std::function<double(double)>& x_of_u, double t) {
  if (points < 2 || !(u_range.hi > u_range.lo)) {
    fail(ErrorCategory::parameter_domain, "branch needs P >= 2 levels on a non-empty range");
  }
  MonotoneBranch b;
  b.direction = direction;
  b.u_lo = u_range.lo;
  b.u_hi = u_range.hi;
  b.u_mesh = uniform_mesh(u_range.lo, u_range.hi, points);
  b.x_of_u.resize(points);
  for (std::size_t k = 0; k < points; ++k) b.x_of_u[k] = x_of_u(b.u_mesh[k]);
  b.t = t;
  return b;
}

MonotoneBranch invert_samples(std::span<const double> x, std::span<const double> u,
                              std::size_t points, double t) {
  if (x.size() != u.size() || x.size() < 2) {
    fail(ErrorCategory::non_invertible_data, "need at least two (x, u) samples to invert");
  }
  const bool increasing = u.back() > u.front();
  std::vector<double> us(u.begin(), u.end());
  std::vector<double> xs(x.begin(), x.end());
  if (!increasing) {
    std::reverse(us.begin(), us.end());
    std::reverse(xs.begin(), xs.end());
  }
  for (std::size_t k = 1; k < us.size(); ++k) {
    if (!(us[k] > us[k - 1])) {
      std::ostringstream os;
      os << "samples are not strictly monotone near x = " << xs[k];
      fail(ErrorCategory::non_invertible_data, os.str());
    }
  }
  return make_branch(increasing ? Direction::increasing : Direction::decreasing,
                     Interval{us.front(), us.back()}, points,
                     [&](double level) { return interpolate_sorted(us, xs, level); }, t);
}

std::vector<double> sample_branch(const MonotoneBranch& branch, std::span<const double> x) {
  std::vector<double> xs = branch.x_of_u;
  std::vector<double> us = branch.u_mesh;
  if (branch.direction == Direction::decreasing) {
    std::reverse(xs.begin(), xs.end());
    std::reverse(us.begin(), us.end());
  }
  std::vector<double> out(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) out[j] = interpolate_sorted(xs, us, x[j]);
  return out;
}

RunSplit monotone_runs(const EulerianField& field, std::size_t max_plateau_cells) {
  const auto& v = field.values;
  const std::size_t n = v.size();
  double scale = 0.0;
  for (double value : v) scale = std::max(scale, std::abs(value));
  const double tol = 1e-13 * std::max(scale, 1.0);
  auto step_sign = [&](std::size_t k) {
    const double d = v[k + 1] - v[k];
    return std::abs(d) <= tol ? 0 : (d > 0 ? 1 : -1);
  };

  RunSplit out;
  out.far_field = {v.front(), v.back()};
  std::size_t first = 0;
  while (first + 1 < n && step_sign(first) == 0) ++first;
  if (first + 1 >= n) return out;  // constant profile
  std::size_t last = n - 1;
  while (last > first && step_sign(last - 1) == 0) --last;

  std::vector<std::size_t> run{first};
  int dir = step_sign(first);
  auto close_run = [&](const std::vector<std::size_t>& nodes) {
    MonotoneRun r;
    r.direction = dir > 0 ? Direction::increasing : Direction::decreasing;
    r.first = nodes.front();
    r.last = nodes.back();
    for (std::size_t idx : nodes) {
      r.x.push_back(field.grid.node(idx));
      r.u.push_back(v[idx]);
    }
    out.runs.push_back(std::move(r));
  };

  std::size_t k = first;
  while (k < last) {
    const int s = step_sign(k);
    if (s == 0) {
      std::size_t flat_end = k;
      while (flat_end < last && step_sign(flat_end) == 0) ++flat_end;
      if (flat_end - k > max_plateau_cells) {
        std::ostringstream os;
        os << "plateau of " << flat_end - k << " cells on [" << field.grid.node(k) << ", "
           << field.grid.node(flat_end) << "] cannot be inverted";
        fail(ErrorCategory::non_invertible_data, os.str());
      }
      const int next = step_sign(flat_end);
      if (next != dir) {
        // Extremum sits on the plateau: both sides end on the level value.
        close_run(run);
        run.assign({flat_end});
        dir = next;
      }
      k = flat_end;
      continue;
    }
    if (s != dir) {
      close_run(run);
      run.assign({k});
      dir = s;
    }
    run.push_back(k + 1);
    ++k;
  }
  close_run(run);
  return out;
}

Decomposition decompose_field(const EulerianField& field, std::size_t points,
                              std::size_t max_plateau_cells) {
  const RunSplit split = monotone_runs(field, max_plateau_cells);
  Decomposition out;
  out.far_field = split.far_field;
  for (const auto& run : split.runs) {
    out.branches.push_back(invert_samples(run.x, run.u, points, field.t));
    out.node_ranges.emplace_back(run.first, run.last);
  }
  return out;
}

std::vector<MonotoneBranch> decompose_monotone(const EulerianField& field, std::size_t points) {
  return decompose_field(field, points).branches;
}

FormationTime shock_formation_time(const MonotoneBranch& branch, const FluxModel& model) {
  if (branch.size() < 5) {
    std::ostringstream os;
    os << "branch with " << branch.size() << " levels is too coarse to locate a shock";
    fail(ErrorCategory::resolution, os.str());
  }
  FormationTime out;
  if (branch.direction == Direction::increasing) return out;

  const auto slope = branch.slopes();
  const std::size_t p = branch.size();
  std::vector<double> ratio(p, std::numeric_limits<double>::infinity());
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k + 1 < p; ++k) {
    const double u = branch.u_mesh[k];
    const double fp = model.speed_derivative(u);
    const double g = -slope[k] + branch.t * fp;
    if (fp > 0.0 && g > 0.0) {
      ratio[k] = g / fp;
      best = std::min(best, ratio[k]);
    }
  }
  if (!std::isfinite(best)) return out;
  // Flat minima: take the midpoint of the argmin set.
  const double tie = 1e-12 * std::abs(best);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t k = 1; k + 1 < p; ++k) {
    if (ratio[k] <= best + tie) {
      lo = std::min(lo, branch.u_mesh[k]);
      hi = std::max(hi, branch.u_mesh[k]);
    }
  }
  out.t_star = best;
  out.u_star = 0.5 * (lo + hi);
  return out;
}

ShockState shock_at_formation(const MonotoneBranch& branch, const FluxModel& model) {
  const FormationTime ft = shock_formation_time(branch, model);
  if (!std::isfinite(ft.t_star)) {
    fail(ErrorCategory::shock_degenerate, "branch never forms a shock");
  }
  ShockState s;
  s.t = ft.t_star;
  s.t_star = ft.t_star;
  s.u_star = ft.u_star;
  s.x_star = branch.x_at(ft.u_star) + (ft.t_star - branch.t) * model.speed(ft.u_star);
  s.u1 = ft.u_star;
  s.u2 = ft.u_star;
  return s;
}

namespace {

struct LimitRhs {
  const MonotoneBranch& top;
  const MonotoneBranch& bottom;
  const FluxModel& model;

  double denominator(const MonotoneBranch& b, double u, double t) const {
    const double d = initial_gradient(b, model, u) - model.speed_derivative(u) * t;
    if (std::abs(d) <= 1e-12) {
      std::ostringstream os;
      os << "shock limit ODE denominator vanishes at u = " << u << ", t = " << t;
      fail(ErrorCategory::shock_degenerate, os.str());
    }
    return d;
  }

  // (du1, du2, dx*) at the given state.
  std::array<double, 3> operator()(double t, double u1, double u2) const {
    const double s = model.shock_speed(u1, u2);
    return {(model.speed(u1) - s) / denominator(top, u1, t),
            (model.speed(u2) - s) / denominator(bottom, u2, t), s};
  }
};

void rk4_limits(ShockState& st, const LimitRhs& rhs, double h) {
  auto clamp_top = [&](double u) { return std::clamp(u, rhs.top.u_lo, rhs.top.u_hi); };
  auto clamp_bot = [&](double u) { return std::clamp(u, rhs.bottom.u_lo, rhs.bottom.u_hi); };
  const auto k1 = rhs(st.t, st.u1, st.u2);
  const auto k2 = rhs(st.t + 0.5 * h, clamp_top(st.u1 + 0.5 * h * k1[0]),
                      clamp_bot(st.u2 + 0.5 * h * k1[1]));
  const auto k3 = rhs(st.t + 0.5 * h, clamp_top(st.u1 + 0.5 * h * k2[0]),
                      clamp_bot(st.u2 + 0.5 * h * k2[1]));
  const auto k4 = rhs(st.t + h, clamp_top(st.u1 + h * k3[0]), clamp_bot(st.u2 + h * k3[1]));
  st.u1 = clamp_top(st.u1 + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]));
  st.u2 = clamp_bot(st.u2 + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]));
  st.x_star += h / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]);
  st.t += h;
}

}  // namespace

ShockState advance_shock_limits(const ShockState& state, const MonotoneBranch& top,
                                const MonotoneBranch& bottom, const FluxModel& model,
                                double dt) {
  if (!(dt >= 0.0)) fail(ErrorCategory::parameter_domain, "negative time step");
  ShockState st = state;
  const double t_end = state.t + dt;
  if (st.t < st.t_star) {
    // Not formed yet: the marker rides the characteristic of u*.
    const double reach = std::min(t_end, st.t_star);
    st.x_star += (reach - st.t) * model.speed(st.u_star);
    st.t = reach;
    st.u1 = st.u2 = st.u_star;
    if (t_end <= st.t_star) return st;
  }
  const LimitRhs rhs{top, bottom, model};
  const double scale = std::max(1.0, std::abs(st.u_star));
  const double remaining = t_end - st.t;
  if (remaining <= 0.0) return st;

  if (std::abs(st.u1 - st.u2) <= 1e-12 * scale) {
    // Cubic fold at formation: x - x_c ~ f'(u*) tau w - D'' w^3 / 6.
    const double tau = remaining * 1e-6;
    const double h = 2.0 * top.du();
    auto d_at = [&](double u) {
      return initial_gradient(top, model, u) - model.speed_derivative(u) * st.t_star;
    };
    const double d2 = (d_at(st.u_star + h) - 2.0 * d_at(st.u_star) + d_at(st.u_star - h)) / (h * h);
    const double fp = model.speed_derivative(st.u_star);
    if (!(d2 > 0.0) || !(fp > 0.0)) {
      fail(ErrorCategory::shock_degenerate, "shock formation point is not a simple fold");
    }
    const double eps = std::sqrt(6.0 * fp * tau / d2);
    st.u1 = std::min(st.u_star + eps, top.u_hi);
    st.u2 = std::max(st.u_star - eps, bottom.u_lo);
    st.x_star += tau * model.speed(st.u_star);
    st.t += tau;
    // Geometric substeps resolve the square-root opening.
    double h_step = tau;
    while (t_end - st.t > 1e-15 * std::max(1.0, t_end)) {
      h_step = std::min(2.0 * h_step, t_end - st.t);
      rk4_limits(st, rhs, h_step);
    }
    st.t = t_end;
    return st;
  }
  rk4_limits(st, rhs, remaining);
  st.t = t_end;
  return st;
}

ShockState advance_shock_position(const ShockState& state, const FluxModel& model, double dt) {
  const double scale = std::max({1.0, std::abs(state.u1), std::abs(state.u2)});
  if (std::abs(state.u1 - state.u2) <= 1e-12 * scale) {
    std::ostringstream os;
    os << "shock vanished at t = " << state.t << " (u1 = " << state.u1 << ", u2 = " << state.u2
       << ")";
    fail(ErrorCategory::shock_vanished, os.str());
  }
  ShockState st = state;
  // The speed depends on the limits only, so all RK4 stages coincide.
  st.x_star += dt * model.shock_speed(state.u1, state.u2);
  st.t += dt;
  return st;
}

MonotoneBranch evolve_branch(const MonotoneBranch& branch, const FluxModel& model, double dt) {
  MonotoneBranch out = branch;
  for (std::size_t k = 0; k < out.size(); ++k) out.x_of_u[k] += dt * model.speed(out.u_mesh[k]);
  out.t += dt;
  return out;
}

WaveProfile::WaveProfile(std::span<const MonotoneBranch> branches, BoundaryStates far_field)
    : far_(far_field) {
  std::size_t total = 0;
  for (const auto& b : branches) total += b.size();
  x_.reserve(total);
  u_.reserve(total);
  branch_of_.reserve(total);
  level_of_.reserve(total);
  for (std::size_t bi = 0; bi < branches.size(); ++bi) {
    const auto& b = branches[bi];
    const std::size_t p = b.size();
    for (std::size_t m = 0; m < p; ++m) {
      const std::size_t k = b.direction == Direction::increasing ? m : p - 1 - m;
      const double xk = b.x_of_u[k];
      const double uk = b.u_mesh[k];
      if (m == 0 && !x_.empty()) {
        const double sx = std::max(1.0, std::abs(xk));
        const double su = std::max(1.0, std::abs(uk));
        if (std::abs(x_.back() - xk) <= 1e-12 * sx && std::abs(u_.back() - uk) <= 1e-12 * su) {
          continue;  // shared extremum
        }
      }
      x_.push_back(xk);
      u_.push_back(uk);
      branch_of_.push_back(bi);
      level_of_.push_back(k);
    }
  }
}

WaveProfile::Crossing WaveProfile::first_crossing(double xs, std::size_t from) const {
  const std::size_t n = x_.size();
  if (n == 0) return {-1, xs < 0.0 ? far_.left : far_.right};
  if (from == 0 && xs < x_[0]) return {-1, far_.left};
  for (std::size_t i = from; i + 1 < n; ++i) {
    const double a = x_[i] - xs;
    const double b = x_[i + 1] - xs;
    if ((a <= 0.0 && b >= 0.0) || (a >= 0.0 && b <= 0.0)) {
      const double span = x_[i + 1] - x_[i];
      const double w = span == 0.0 ? 0.0 : (xs - x_[i]) / span;
      return {static_cast<std::ptrdiff_t>(i), (1.0 - w) * u_[i] + w * u_[i + 1]};
    }
  }
  return {static_cast<std::ptrdiff_t>(n) - 1, far_.right};
}

WaveProfile::Crossing WaveProfile::last_crossing(double xs) const {
  const std::size_t n = x_.size();
  if (n == 0) return {-1, xs < 0.0 ? far_.left : far_.right};
  if (xs > x_[n - 1]) return {static_cast<std::ptrdiff_t>(n) - 1, far_.right};
  for (std::size_t i = n - 1; i-- > 0;) {
    const double a = x_[i] - xs;
    const double b = x_[i + 1] - xs;
    if ((a <= 0.0 && b >= 0.0) || (a >= 0.0 && b <= 0.0)) {
      const double span = x_[i + 1] - x_[i];
      const double w = span == 0.0 ? 1.0 : (xs - x_[i]) / span;
      return {static_cast<std::ptrdiff_t>(i), (1.0 - w) * u_[i] + w * u_[i + 1]};
    }
  }
  return {-1, far_.left};
}

ShockState shock_from_profile(const WaveProfile& profile, double t, double x_star) {
  ShockState s;
  s.t = t;
  s.x_star = x_star;
  s.u1 = profile.first_crossing(x_star).u;
  s.u2 = profile.last_crossing(x_star).u;
  return s;
}

namespace {

// Profile padded with far-field points at the domain ends, plus the running
// path integral of u dx.
struct PaddedProfile {
  std::vector<double> x, u, area;

  PaddedProfile(const WaveProfile& p, Interval domain) {
    const auto& px = p.x();
    const auto& pu = p.u();
    x.push_back(px.empty() ? domain.lo : std::min(domain.lo, px.front()));
    u.push_back(p.far_field().left);
    x.insert(x.end(), px.begin(), px.end());
    u.insert(u.end(), pu.begin(), pu.end());
    x.push_back(std::max(domain.hi, x.back()));
    u.push_back(p.far_field().right);
    area.assign(x.size(), 0.0);
    for (std::size_t i = 1; i < x.size(); ++i) {
      area[i] = area[i - 1] + 0.5 * (u[i - 1] + u[i]) * (x[i] - x[i - 1]);
    }
  }

  // Path integral up to the crossing of x = xs on segment i.
  double area_at(std::size_t i, double xs) const {
    const double span = x[i + 1] - x[i];
    const double w = span == 0.0 ? 0.0 : (xs - x[i]) / span;
    const double us = (1.0 - w) * u[i] + w * u[i + 1];
    return area[i] + 0.5 * (u[i] + us) * (xs - x[i]);
  }

  static bool crosses(double a, double b, double xs) {
    return (a <= xs && xs <= b) || (b <= xs && xs <= a);
  }
};

}  // namespace

double selection_mass(const WaveProfile& profile, double xs, Interval domain) {
  const PaddedProfile pp(profile, domain);
  const std::size_t n = pp.x.size();
  xs = std::clamp(xs, pp.x.front(), pp.x.back());
  std::size_t first = 0;
  while (first + 2 < n && !PaddedProfile::crosses(pp.x[first], pp.x[first + 1], xs)) ++first;
  std::size_t last = n - 2;
  while (last > 0 && !PaddedProfile::crosses(pp.x[last], pp.x[last + 1], xs)) --last;
  double mass = pp.area_at(first, xs) + pp.area.back() - pp.area_at(last, xs);
  // Profile parts outside the domain are discounted at the far-field states.
  mass -= profile.far_field().left * (domain.lo - pp.x.front());
  mass -= profile.far_field().right * (pp.x.back() - domain.hi);
  return mass;
}

std::optional<double> conserving_jump(const WaveProfile& profile, double mass, Interval domain,
                                      double guess) {
  const auto& x = profile.x();
  Interval widest{0.0, 0.0};
  std::optional<Interval> around;
  for (std::size_t i = 0; i + 1 < x.size();) {
    if (x[i + 1] >= x[i]) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j + 1 < x.size() && x[j + 1] < x[j]) ++j;
    const Interval fold{x[j], x[i]};
    if (fold.length() > widest.length()) widest = fold;
    if (fold.contains(guess) && (!around || fold.length() > around->length())) around = fold;
    i = j;
  }
  double lo = around ? around->lo : widest.lo;
  double hi = around ? around->hi : widest.hi;
  if (!(hi > lo)) return std::nullopt;
  auto excess = [&](double xs) { return selection_mass(profile, xs, domain) - mass; };
  if (excess(lo) > 0.0 || excess(hi) < 0.0) return std::nullopt;
  for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (excess(mid) < 0.0 ? lo : hi) = mid;
  }
  const double xs = 0.5 * (lo + hi);
  if (!(profile.first_crossing(xs).u > profile.last_crossing(xs).u)) return std::nullopt;
  return xs;
}

ShockTracker::ShockTracker(std::vector<MonotoneBranch> initial, BoundaryStates far_field,
                           FluxModel model, std::size_t forming_branch)
    : initial_(std::move(initial)),
      far_(far_field),
      model_(std::move(model)),
      forming_branch_(forming_branch) {
  if (forming_branch_ >= initial_.size()) {
    fail(ErrorCategory::parameter_domain, "forming branch index out of range");
  }
  const MonotoneBranch& b = initial_[forming_branch_];
  const FormationTime ft = shock_formation_time(b, model_);
  if (!std::isfinite(ft.t_star)) {
    fail(ErrorCategory::shock_degenerate, "tracked branch never forms a shock");
  }
  state_.t = b.t;
  state_.t_star = ft.t_star;
  state_.u_star = ft.u_star;
  state_.x_star = b.x_at(ft.u_star);
  state_.u1 = state_.u2 = ft.u_star;
}

WaveProfile ShockTracker::profile_at(double t) const {
  std::vector<MonotoneBranch> evolved;
  evolved.reserve(initial_.size());
  for (const auto& b : initial_) evolved.push_back(evolve_branch(b, model_, t - b.t));
  return WaveProfile(evolved, far_);
}

double ShockTracker::rhs(double t, double x_star) const {
  const WaveProfile profile = profile_at(t);
  return model_.shock_speed(profile.first_crossing(x_star).u, profile.last_crossing(x_star).u);
}

void ShockTracker::advance_to(double t, double max_step) {
  if (t <= state_.t) return;
  if (!(max_step > 0.0)) fail(ErrorCategory::parameter_domain, "max_step must be positive");
  const MonotoneBranch& b = initial_[forming_branch_];
  if (state_.t < state_.t_star) {
    const double reach = std::min(t, state_.t_star);
    state_.x_star = b.x_at(state_.u_star) + (reach - b.t) * model_.speed(state_.u_star);
    state_.t = reach;
    if (t <= state_.t_star) return;
  }
  const double span = t - state_.t;
  const auto steps = static_cast<std::size_t>(std::ceil(span / max_step - 1e-9));
  const double h = span / static_cast<double>(std::max<std::size_t>(steps, 1));
  for (std::size_t k = 0; k < std::max<std::size_t>(steps, 1); ++k) {
    const double t0 = state_.t;
    const double x0 = state_.x_star;
    const double k1 = rhs(t0, x0);
    const double k2 = rhs(t0 + 0.5 * h, x0 + 0.5 * h * k1);
    const double k3 = rhs(t0 + 0.5 * h, x0 + 0.5 * h * k2);
    const double k4 = rhs(t0 + h, x0 + h * k3);
    state_.x_star = x0 + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    state_.t = t0 + h;
  }
  state_.t = t;
  const WaveProfile profile = profile_at(t);
  state_.u1 = profile.first_crossing(state_.x_star).u;
  state_.u2 = profile.last_crossing(state_.x_star).u;
}

EulerianField assemble_solution(std::span<const MonotoneBranch> branches,
                                std::span<const ShockState> shocks, const Grid1D& grid,
                                BoundaryStates far_field, double t) {
  const WaveProfile profile(branches, far_field);
  auto pieces = cut_profile(profile, shocks, nullptr);
  for (auto& piece : pieces) check_piece(piece);

  std::vector<double> u(grid.size());
  std::vector<double> px, pu;
  std::size_t piece_index = 0;
  auto load = [&](std::size_t i) {
    px.clear();
    pu.clear();
    for (const auto& p : pieces[i].points) {
      px.push_back(p.x);
      pu.push_back(p.u);
    }
  };
  load(0);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double xj = grid.node(j);
    while (piece_index < shocks.size() && xj >= shocks[piece_index].x_star) {
      load(++piece_index);
    }
    const Piece& piece = pieces[piece_index];
    if (px.empty()) {
      u[j] = piece.left_open ? far_field.left : far_field.right;
    } else if (xj < px.front() && piece.left_open) {
      u[j] = far_field.left;
    } else if (xj > px.back() && piece.right_open) {
      u[j] = far_field.right;
    } else {
      u[j] = interpolate_sorted(px, pu, xj);
    }
  }
  return EulerianField(grid, t, std::move(u));
}

std::vector<std::vector<bool>> absorbed_levels(std::span<const MonotoneBranch> branches,
                                               std::span<const ShockState> shocks,
                                               BoundaryStates far_field) {
  std::vector<std::vector<bool>> out;
  out.reserve(branches.size());
  for (const auto& b : branches) out.emplace_back(b.size(), false);
  const WaveProfile profile(branches, far_field);
  std::vector<char> absorbed;
  cut_profile(profile, shocks, &absorbed);
  for (std::size_t i = 0; i < profile.size(); ++i) {
    if (absorbed[i]) out[profile.branch_of()[i]][profile.level_of()[i]] = true;
  }
  // Extrema shared by two branches appear once in the path; mirror them.
  for (std::size_t bi = 0; bi + 1 < branches.size(); ++bi) {
    const auto& a = branches[bi];
    const auto& c = branches[bi + 1];
    const std::size_t a_end = a.direction == Direction::increasing ? a.size() - 1 : 0;
    const std::size_t c_start = c.direction == Direction::increasing ? 0 : c.size() - 1;
    if (a.u_mesh[a_end] == c.u_mesh[c_start] && a.x_of_u[a_end] == c.x_of_u[c_start]) {
      const bool either = out[bi][a_end] || out[bi + 1][c_start];
      out[bi][a_end] = out[bi + 1][c_start] = either;
    }
  }
  return out;
}

}  // namespace shockrom
