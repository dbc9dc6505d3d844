#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace shockrom {

/// Column n holds the state (or observable vector) at time t0 + n dt.
struct SnapshotMatrix {
  Eigen::MatrixXd data;
  double dt = 1.0;
  double t0 = 0.0;

  SnapshotMatrix(Eigen::MatrixXd columns, double cadence, double first_time);

  Eigen::Index rows() const noexcept { return data.rows(); }
  Eigen::Index cols() const noexcept { return data.cols(); }
  double time(Eigen::Index column) const noexcept {
    return t0 + dt * static_cast<double>(column);
  }
};

struct ReducedSvd {
  Eigen::MatrixXd U;
  Eigen::VectorXd sigma;
  Eigen::MatrixXd V;
};

/// Thin SVD that keeps singular values above `relative_floor * sigma_1`.
/// Large matrices are first compressed with a rank-revealing Gram-Schmidt
/// QR so the cost scales with the numerical rank.
ReducedSvd reduced_svd(const Eigen::MatrixXd& a, double relative_floor = 1e-14);

/// Number of singular values carrying at least a fraction `eps` of the
/// total; at least one.
std::size_t rank_truncate(std::span<const double> singular_values, double eps);

struct TruncatedSvd {
  /// Leading rank_truncate(spectrum, eps) triplets.
  ReducedSvd leading;
  /// Every singular value above 1e-14 sigma_1, descending.
  Eigen::VectorXd spectrum;
};

/// Energy-truncated SVD. Small matrices use the dense decomposition; large
/// ones take the spectrum from a Householder QR and the leading triplets
/// from block subspace iteration on its R factor.
TruncatedSvd truncated_svd(const Eigen::MatrixXd& a, double eps);

using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

/// Fitted linear model y(n) = Phi Lambda^(n-1) b with n = 1 at the first
/// training column. Immutable once built.
class DmdModel {
 public:
  DmdModel(ComplexVector eigenvalues, ComplexMatrix modes, ComplexVector amplitudes, double dt,
           double t0, Eigen::VectorXd singular_values = {});

  std::size_t rank() const noexcept { return static_cast<std::size_t>(eigenvalues_.size()); }
  Eigen::Index state_size() const noexcept { return modes_.rows(); }
  const ComplexVector& eigenvalues() const noexcept { return eigenvalues_; }
  const ComplexMatrix& modes() const noexcept { return modes_; }
  const ComplexVector& amplitudes() const noexcept { return amplitudes_; }
  const Eigen::VectorXd& singular_values() const noexcept { return singular_values_; }
  double dt() const noexcept { return dt_; }
  double t0() const noexcept { return t0_; }

  /// Complex state at (possibly fractional) step index n >= 1.
  ComplexVector evaluate(double n) const;
  /// Real part of evaluate(n); throws overflow_guard for runaway modes.
  Eigen::VectorXd predict(double n) const;
  Eigen::VectorXd predict_at_time(double t) const;
  double step_index(double t) const noexcept { return 1.0 + (t - t0_) / dt_; }

  /// ||Im y|| / ||Re y|| at step n; real data make this roundoff-sized.
  double imaginary_residual(double n) const;

  nlohmann::json to_json() const;
  static DmdModel from_json(const nlohmann::json& doc);

 private:
  ComplexVector eigenvalues_;
  ComplexMatrix modes_;
  ComplexVector amplitudes_;
  double dt_;
  double t0_;
  Eigen::VectorXd singular_values_;
};

/// Exact DMD on the shifted pairs (columns 0..M-2 -> 1..M-1) of `snapshots`.
DmdModel fit(const SnapshotMatrix& snapshots, double eps = 1e-4);

/// max over training columns of ||predict(n) - y_n|| / ||y_n||.
double reconstruction_error(const DmdModel& model, const SnapshotMatrix& snapshots);

}  // namespace shockrom
