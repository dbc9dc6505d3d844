#pragma once

#include <map>
#include <string>
#include <utility>

namespace shockrom {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const noexcept { return hi - lo; }
  bool contains(double v) const noexcept { return v >= lo && v <= hi; }
};

enum class Convexity { monotone_convex, s_shaped };

/// Flux function F(u) of a scalar conservation law u_t + F(u)_x = 0 together
/// with the characteristic speed f = F' and its derivative. Immutable.
class FluxModel {
 public:
  static FluxModel burgers();
  static FluxModel buckley_leverett(double mobility);

  const std::string& name() const noexcept { return name_; }
  Convexity convexity() const noexcept { return convexity_; }
  const std::map<std::string, double>& params() const noexcept { return params_; }

  double flux(double u) const noexcept;
  double speed(double u) const noexcept;
  double speed_derivative(double u) const noexcept;

  /// Rankine-Hugoniot speed (F(a) - F(b)) / (a - b); falls back to f(a) when
  /// the states coincide.
  double shock_speed(double a, double b) const noexcept;

  /// Inverse G of the speed, restricted to `branch` on which f must be
  /// strictly monotone. Burgers ignores the branch (G is the identity).
  double inverse_speed(double v, Interval branch) const;

  /// Maximal intervals of [0,1] (Buckley-Leverett) on which f is strictly
  /// monotone. Burgers returns a single unbounded-looking interval.
  std::pair<Interval, Interval> monotone_speed_branches() const;

  /// Sup of |f| over the closed interval.
  double max_abs_speed(Interval range) const;

 private:
  enum class Kind { burgers, buckley_leverett };

  FluxModel(Kind kind, std::string name, Convexity convexity, double mobility);

  Kind kind_;
  std::string name_;
  Convexity convexity_;
  double mobility_;
  double speed_peak_;  // argmax of f on [0,1] for Buckley-Leverett
  std::map<std::string, double> params_;
};

FluxModel burgers_flux();
FluxModel buckley_leverett_flux(double mobility);

/// Welge tangent construction of the upper concave hull from the right state.
struct HullConstruction {
  double front_saturation = 0.0;
  double front_speed = 0.0;
  Interval rarefaction_interval;
  Interval shock_interval;
};

/// Finds u_f in (u_right, u_left] with f(u_f) equal to the chord slope from
/// u_right. The root is bracketed by scanning `scan_points` samples starting
/// at `bracket_start` (a fraction of the interval) and refined by bisection.
HullConstruction welge_front(const FluxModel& model, double u_left, double u_right,
                             int scan_points = 256, double bracket_start = 1e-6);

}  // namespace shockrom
