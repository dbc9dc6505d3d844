#include "shockrom/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "shockrom/error.hpp"

namespace shockrom {

Grid1D::Grid1D(double a, double b, std::size_t nodes) : a_(a), b_(b), nodes_(nodes) {
  if (nodes < 2 || !(b > a) || !std::isfinite(a) || !std::isfinite(b)) {
    std::ostringstream os;
    os << "invalid grid [" << a << ", " << b << "] with " << nodes << " nodes";
    fail(ErrorCategory::parameter_domain, os.str());
  }
}

std::vector<double> Grid1D::nodes() const {
  std::vector<double> x(nodes_);
  for (std::size_t j = 0; j < nodes_; ++j) x[j] = node(j);
  return x;
}

EulerianField::EulerianField(Grid1D g, double time, std::vector<double> v)
    : grid(g), t(time), values(std::move(v)) {
  if (values.size() != grid.size()) {
    fail(ErrorCategory::parameter_domain, "field size does not match its grid");
  }
}

double EulerianField::mass() const {
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum * grid.dx();
}

double max_reversal(std::span<const double> x) {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 1; j < x.size(); ++j) worst = std::max(worst, x[j - 1] - x[j]);
  return x.size() < 2 ? 0.0 : worst;
}

bool MovingGrid::is_monotone() const {
  for (std::size_t j = 1; j < x.size(); ++j) {
    if (!(x[j] > x[j - 1])) return false;
  }
  return true;
}

double interpolate_sorted(std::span<const double> x, std::span<const double> y, double query,
                          bool* clamped) {
  if (clamped) *clamped = false;
  if (x.empty()) fail(ErrorCategory::parameter_domain, "interpolation on empty data");
  if (query <= x.front() || x.size() == 1) {
    if (clamped && query < x.front()) *clamped = true;
    return y.front();
  }
  if (query >= x.back()) {
    if (clamped && query > x.back()) *clamped = true;
    return y.back();
  }
  const auto it = std::upper_bound(x.begin(), x.end(), query);
  const std::size_t hi = static_cast<std::size_t>(it - x.begin());
  const std::size_t lo = hi - 1;
  const double span = x[hi] - x[lo];
  if (span <= 0.0) return y[hi];
  const double w = (query - x[lo]) / span;
  return (1.0 - w) * y[lo] + w * y[hi];
}

}  // namespace shockrom
