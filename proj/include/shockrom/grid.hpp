#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace shockrom {

/// Uniform node-centred mesh of J nodes on [a, b]; node 0 sits at a and node
/// J-1 at b.
class Grid1D {
 public:
  Grid1D(double a, double b, std::size_t nodes);

  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }
  std::size_t size() const noexcept { return nodes_; }
  double dx() const noexcept { return (b_ - a_) / static_cast<double>(nodes_ - 1); }
  double node(std::size_t j) const noexcept { return a_ + dx() * static_cast<double>(j); }
  std::vector<double> nodes() const;

 private:
  double a_;
  double b_;
  std::size_t nodes_;
};

struct EulerianField {
  Grid1D grid;
  double t = 0.0;
  std::vector<double> values;

  EulerianField(Grid1D g, double time, std::vector<double> v);
  double mass() const;  // sum_j u_j dx
};

/// Lagrangian node positions together with the values they carry.
struct MovingGrid {
  double t = 0.0;
  std::vector<double> x;
  std::vector<double> u;

  std::size_t size() const noexcept { return x.size(); }
  bool is_monotone() const;  // x strictly increasing
};

/// Largest backward step max_j (x_{j-1} - x_j); zero or less when ordered.
double max_reversal(std::span<const double> x);

struct BoundaryStates {
  double left = 0.0;
  double right = 0.0;
};

/// Piecewise-linear interpolation of (x, y) samples with x non-decreasing.
/// Queries outside [x.front(), x.back()] return the nearest end value.
double interpolate_sorted(std::span<const double> x, std::span<const double> y, double query,
                          bool* clamped = nullptr);

}  // namespace shockrom
