#include "shockrom/flux.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "shockrom/error.hpp"

namespace shockrom {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Bisection for a sign change of `fn` on [lo, hi]; assumes fn(lo)*fn(hi) <= 0.
template <typename Fn>
double bisect(Fn&& fn, double lo, double hi) {
  double flo = fn(lo);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fmid = fn(mid);
    if (fmid == 0.0) return mid;
    if ((fmid > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

FluxModel::FluxModel(Kind kind, std::string name, Convexity convexity, double mobility)
    : kind_(kind),
      name_(std::move(name)),
      convexity_(convexity),
      mobility_(mobility),
      speed_peak_(0.0) {
  if (kind_ == Kind::buckley_leverett) {
    params_["a"] = mobility_;
    speed_peak_ = bisect([this](double u) { return speed_derivative(u); }, 0.0, 1.0);
  }
}

FluxModel FluxModel::burgers() {
  return FluxModel(Kind::burgers, "burgers", Convexity::monotone_convex, 0.0);
}

FluxModel FluxModel::buckley_leverett(double mobility) {
  if (!(mobility > 0.0) || !std::isfinite(mobility)) {
    std::ostringstream os;
    os << "Buckley-Leverett mobility ratio must be positive, got " << mobility;
    fail(ErrorCategory::parameter_domain, os.str());
  }
  return FluxModel(Kind::buckley_leverett, "buckley-leverett", Convexity::s_shaped, mobility);
}

double FluxModel::flux(double u) const noexcept {
  if (kind_ == Kind::burgers) return 0.5 * u * u;
  const double w = 1.0 - u;
  return u * u / (u * u + mobility_ * w * w);
}

double FluxModel::speed(double u) const noexcept {
  if (kind_ == Kind::burgers) return u;
  const double w = 1.0 - u;
  const double d = u * u + mobility_ * w * w;
  return 2.0 * mobility_ * u * w / (d * d);
}

double FluxModel::speed_derivative(double u) const noexcept {
  if (kind_ == Kind::burgers) return 1.0;
  // f = N / D^2 with N = 2a u (1-u), D = u^2 + a (1-u)^2.
  const double a = mobility_;
  const double w = 1.0 - u;
  const double d = u * u + a * w * w;
  const double n = 2.0 * a * u * w;
  const double dn = 2.0 * a * (1.0 - 2.0 * u);
  const double dd = 2.0 * u - 2.0 * a * w;
  return (dn * d - 2.0 * n * dd) / (d * d * d);
}

double FluxModel::shock_speed(double a, double b) const noexcept {
  const double scale = std::max({1.0, std::abs(a), std::abs(b)});
  if (std::abs(a - b) <= 1e-12 * scale) return speed(0.5 * (a + b));
  return (flux(a) - flux(b)) / (a - b);
}

double FluxModel::inverse_speed(double v, Interval branch) const {
  if (kind_ == Kind::burgers) return v;
  const double f_lo = speed(branch.lo);
  const double f_hi = speed(branch.hi);
  const double lo_v = std::min(f_lo, f_hi);
  const double hi_v = std::max(f_lo, f_hi);
  const double slack = 1e-14 * std::max(1.0, hi_v);
  if (v < lo_v - slack || v > hi_v + slack) {
    std::ostringstream os;
    os << "speed " << v << " outside the range [" << lo_v << ", " << hi_v
       << "] of branch [" << branch.lo << ", " << branch.hi << "]";
    fail(ErrorCategory::parameter_domain, os.str());
  }
  if (branch.lo < speed_peak_ - 1e-12 && branch.hi > speed_peak_ + 1e-12) {
    fail(ErrorCategory::parameter_domain, "inverse speed requested on a non-monotone branch");
  }
  if (v <= lo_v) return f_lo <= f_hi ? branch.lo : branch.hi;
  if (v >= hi_v) return f_lo <= f_hi ? branch.hi : branch.lo;
  return bisect([&](double u) { return speed(u) - v; }, branch.lo, branch.hi);
}

std::pair<Interval, Interval> FluxModel::monotone_speed_branches() const {
  if (kind_ == Kind::burgers) return {Interval{-kInf, kInf}, Interval{-kInf, kInf}};
  return {Interval{0.0, speed_peak_}, Interval{speed_peak_, 1.0}};
}

double FluxModel::max_abs_speed(Interval range) const {
  double best = std::max(std::abs(speed(range.lo)), std::abs(speed(range.hi)));
  if (kind_ == Kind::buckley_leverett && range.contains(speed_peak_)) {
    best = std::max(best, std::abs(speed(speed_peak_)));
  }
  return best;
}

FluxModel burgers_flux() { return FluxModel::burgers(); }

FluxModel buckley_leverett_flux(double mobility) { return FluxModel::buckley_leverett(mobility); }

HullConstruction welge_front(const FluxModel& model, double u_left, double u_right,
                             int scan_points, double bracket_start) {
  if (!(u_right < u_left)) {
    fail(ErrorCategory::parameter_domain, "welge_front requires u_right < u_left");
  }
  if (scan_points < 2 || !(bracket_start > 0.0) || !(bracket_start < 1.0)) {
    fail(ErrorCategory::parameter_domain, "invalid bracket for welge_front");
  }
  const double f_right = model.flux(u_right);
  // Positive while the chord from u_right lies below the tangent at u.
  auto tangency = [&](double u) {
    return model.speed(u) * (u - u_right) - (model.flux(u) - f_right);
  };

  const double width = u_left - u_right;
  double prev_u = u_right + bracket_start * width;
  double prev_h = tangency(prev_u);
  for (int k = 1; k <= scan_points; ++k) {
    const double u = u_right + (bracket_start + (1.0 - bracket_start) * k / scan_points) * width;
    const double h = tangency(u);
    if (prev_h > 0.0 && h <= 0.0) {
      const double uf = h == 0.0 ? u : bisect(tangency, prev_u, u);
      HullConstruction hull;
      hull.front_saturation = uf;
      hull.front_speed = model.speed(uf);
      hull.rarefaction_interval = {uf, u_left};
      hull.shock_interval = {u_right, uf};
      return hull;
    }
    prev_u = u;
    prev_h = h;
  }
  std::ostringstream os;
  os << "no tangent point of the " << model.name() << " flux between " << u_right << " and "
     << u_left << " (pure shock or pure rarefaction)";
  fail(ErrorCategory::hull_degenerate, os.str());
}

}  // namespace shockrom
