#include "shockrom/dmd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "shockrom/error.hpp"

namespace shockrom {

namespace {

// Below this size the dense divide-and-conquer SVD is cheap enough.
constexpr Eigen::Index kDirectSvdLimit = 800;
// Growth factor above which a forecast is refused.
constexpr double kGrowthLimit = 1e12;

// A ~= Q * R with Q orthonormal (P x k) and R (k x M); stops when every
// residual column is below `tol` times the largest initial column norm.
void pivoted_gram_schmidt(const Eigen::MatrixXd& a, double tol, Eigen::MatrixXd& q,
                          Eigen::MatrixXd& r) {
  Eigen::MatrixXd res = a;
  const Eigen::Index m = a.cols();
  const Eigen::Index max_rank = std::min(a.rows(), a.cols());
  Eigen::VectorXd norms = res.colwise().norm();
  const double reference = norms.maxCoeff();
  std::vector<Eigen::VectorXd> basis;
  std::vector<Eigen::RowVectorXd> rows;
  while (static_cast<Eigen::Index>(basis.size()) < max_rank) {
    Eigen::Index pivot = 0;
    const double largest = norms.maxCoeff(&pivot);
    if (!(largest > tol * reference)) break;
    Eigen::VectorXd v = res.col(pivot);
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& b : basis) v -= b.dot(v) * b;
    }
    const double len = v.norm();
    if (!(len > tol * reference)) break;
    v /= len;
    Eigen::RowVectorXd coeffs = v.transpose() * res;
    res.noalias() -= v * coeffs;
    // Coefficients against the original matrix: earlier directions were
    // already removed from `res`, so these are the new row of R.
    basis.push_back(std::move(v));
    rows.push_back(std::move(coeffs));
    norms = res.colwise().norm();
  }
  const Eigen::Index k = static_cast<Eigen::Index>(basis.size());
  q.resize(a.rows(), k);
  r.resize(k, m);
  for (Eigen::Index i = 0; i < k; ++i) {
    q.col(i) = basis[static_cast<std::size_t>(i)];
    r.row(i) = rows[static_cast<std::size_t>(i)];
  }
}

std::complex<double> read_complex(const nlohmann::json& v) {
  return {v.at(0).get<double>(), v.at(1).get<double>()};
}

nlohmann::json write_complex(std::complex<double> z) { return nlohmann::json::array({z.real(), z.imag()}); }

}  // namespace

SnapshotMatrix::SnapshotMatrix(Eigen::MatrixXd columns, double cadence, double first_time)
    : data(std::move(columns)), dt(cadence), t0(first_time) {
  if (data.cols() < 2) fail(ErrorCategory::degenerate_data, "need at least two snapshots");
  if (!(dt > 0.0)) fail(ErrorCategory::parameter_domain, "snapshot cadence must be positive");
  if (!data.allFinite()) fail(ErrorCategory::degenerate_data, "snapshots contain non-finite entries");
}

ReducedSvd reduced_svd(const Eigen::MatrixXd& a, double relative_floor) {
  ReducedSvd out;
  if (std::min(a.rows(), a.cols()) <= kDirectSvdLimit) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    out.U = svd.matrixU();
    out.sigma = svd.singularValues();
    out.V = svd.matrixV();
  } else {
    Eigen::MatrixXd q, r;
    pivoted_gram_schmidt(a, 1e-13, q, r);
    if (r.rows() == 0) {
      out.U.resize(a.rows(), 0);
      out.V.resize(a.cols(), 0);
      return out;
    }
    // r is short and wide; decompose its transpose (tall) instead.
    Eigen::BDCSVD<Eigen::MatrixXd> svd(r.transpose(), Eigen::ComputeThinU | Eigen::ComputeThinV);
    out.U = q * svd.matrixV();
    out.sigma = svd.singularValues();
    out.V = svd.matrixU();
  }
  Eigen::Index keep = 0;
  const double floor = out.sigma.size() > 0 ? relative_floor * out.sigma(0) : 0.0;
  while (keep < out.sigma.size() && out.sigma(keep) > floor) ++keep;
  out.U.conservativeResize(Eigen::NoChange, keep);
  out.V.conservativeResize(Eigen::NoChange, keep);
  out.sigma.conservativeResize(keep);
  return out;
}

namespace {

// Leading k singular triplets of the square factor r, whose full spectrum is
// already known; nullopt if the iteration stalls.
std::optional<ReducedSvd> leading_triplets(const Eigen::MatrixXd& r, const Eigen::VectorXd& spectrum,
                                           Eigen::Index k) {
  const Eigen::Index n = r.cols();
  const Eigen::Index block = std::min<Eigen::Index>(n, k + 16);
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd v = Eigen::MatrixXd::NullaryExpr(n, block, [&] { return normal(rng); });
  auto orthonormal = [](const Eigen::MatrixXd& m) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
    return Eigen::MatrixXd(qr.householderQ() * Eigen::MatrixXd::Identity(m.rows(), m.cols()));
  };
  const double tol = 1e-12 * spectrum(0);
  for (int it = 0; it < 1000; ++it) {
    v = orthonormal(v);
    const Eigen::MatrixXd w = r * v;
    Eigen::BDCSVD<Eigen::MatrixXd> small(w, Eigen::ComputeThinU | Eigen::ComputeThinV);
    ReducedSvd out;
    out.U = small.matrixU().leftCols(k);
    out.sigma = small.singularValues().head(k);
    out.V = v * small.matrixV().leftCols(k);
    const Eigen::MatrixXd back = r.transpose() * small.matrixU();
    const Eigen::MatrixXd residual =
        back.leftCols(k) - out.V * out.sigma.asDiagonal();
    if (residual.colwise().norm().maxCoeff() <= tol) return out;
    v = back;
  }
  return std::nullopt;
}

}  // namespace

TruncatedSvd truncated_svd(const Eigen::MatrixXd& a, double eps) {
  TruncatedSvd out;
  if (std::min(a.rows(), a.cols()) <= kDirectSvdLimit) {
    ReducedSvd full = reduced_svd(a);
    out.spectrum = full.sigma;
    const std::vector<double> sigma(full.sigma.data(), full.sigma.data() + full.sigma.size());
    const auto k = sigma.empty() ? Eigen::Index{0} : static_cast<Eigen::Index>(rank_truncate(sigma, eps));
    out.leading = {full.U.leftCols(k), full.sigma.head(k), full.V.leftCols(k)};
    return out;
  }
  // Work with the tall orientation: a = Q R, R square.
  const bool wide = a.cols() > a.rows();
  const Eigen::MatrixXd tall = wide ? Eigen::MatrixXd(a.transpose()) : a;
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(tall);
  const Eigen::Index n = tall.cols();
  const Eigen::MatrixXd r = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
  const Eigen::VectorXd all = Eigen::BDCSVD<Eigen::MatrixXd>(r).singularValues();
  Eigen::Index keep = 0;
  while (keep < all.size() && all(keep) > 1e-14 * all(0)) ++keep;
  out.spectrum = all.head(keep);
  if (keep == 0) return out;
  const std::vector<double> sigma(out.spectrum.data(), out.spectrum.data() + keep);
  const auto k = static_cast<Eigen::Index>(rank_truncate(sigma, eps));

  ReducedSvd lead;
  if (auto it = leading_triplets(r, out.spectrum, k)) {
    lead = std::move(*it);
  } else {
    Eigen::BDCSVD<Eigen::MatrixXd> dense(r, Eigen::ComputeThinU | Eigen::ComputeThinV);
    lead = {dense.matrixU().leftCols(k), dense.singularValues().head(k), dense.matrixV().leftCols(k)};
  }
  Eigen::MatrixXd left = Eigen::MatrixXd::Zero(tall.rows(), k);
  left.topRows(n) = lead.U;
  left.applyOnTheLeft(qr.householderQ());
  if (wide) {
    out.leading = {std::move(lead.V), std::move(lead.sigma), std::move(left)};
  } else {
    out.leading = {std::move(left), std::move(lead.sigma), std::move(lead.V)};
  }
  return out;
}

std::size_t rank_truncate(std::span<const double> singular_values, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) {
    fail(ErrorCategory::parameter_domain, "truncation tolerance must lie in (0, 1)");
  }
  double total = 0.0;
  for (double s : singular_values) {
    if (s < 0.0) fail(ErrorCategory::parameter_domain, "negative singular value");
    total += s;
  }
  if (!(total > 0.0)) fail(ErrorCategory::degenerate_data, "all singular values vanish");
  std::size_t r = 0;
  for (double s : singular_values) {
    if (s / total >= eps) ++r;
  }
  return std::max<std::size_t>(r, 1);
}

DmdModel::DmdModel(ComplexVector eigenvalues, ComplexMatrix modes, ComplexVector amplitudes,
                   double dt, double t0, Eigen::VectorXd singular_values)
    : eigenvalues_(std::move(eigenvalues)),
      modes_(std::move(modes)),
      amplitudes_(std::move(amplitudes)),
      dt_(dt),
      t0_(t0),
      singular_values_(std::move(singular_values)) {
  if (eigenvalues_.size() == 0 || modes_.cols() != eigenvalues_.size() ||
      amplitudes_.size() != eigenvalues_.size()) {
    fail(ErrorCategory::degenerate_data, "inconsistent DMD model dimensions");
  }
}

ComplexVector DmdModel::evaluate(double n) const {
  const double power = n - 1.0;
  ComplexVector weights(eigenvalues_.size());
  for (Eigen::Index k = 0; k < eigenvalues_.size(); ++k) {
    const std::complex<double> lambda = eigenvalues_(k);
    const double growth = std::pow(std::abs(lambda), power);
    if (std::abs(lambda) > 1.0 + 1e-6 && growth > kGrowthLimit) {
      std::ostringstream os;
      os << "mode " << k << " with |lambda| = " << std::abs(lambda) << " grows by " << growth
         << " at step " << n;
      fail(ErrorCategory::overflow_guard, os.str());
    }
    weights(k) = (power == 0.0 ? std::complex<double>(1.0) : std::pow(lambda, power)) *
                 amplitudes_(k);
  }
  return modes_ * weights;
}

Eigen::VectorXd DmdModel::predict(double n) const { return evaluate(n).real(); }

Eigen::VectorXd DmdModel::predict_at_time(double t) const { return predict(step_index(t)); }

double DmdModel::imaginary_residual(double n) const {
  const ComplexVector y = evaluate(n);
  const double re = y.real().norm();
  const double im = y.imag().norm();
  return re > 0.0 ? im / re : im;
}

nlohmann::json DmdModel::to_json() const {
  nlohmann::json doc;
  doc["r"] = rank();
  doc["dt"] = dt_;
  doc["t0"] = t0_;
  doc["rows"] = modes_.rows();
  auto& lam = doc["eigenvalues"] = nlohmann::json::array();
  for (Eigen::Index k = 0; k < eigenvalues_.size(); ++k) lam.push_back(write_complex(eigenvalues_(k)));
  auto& amp = doc["amplitudes"] = nlohmann::json::array();
  for (Eigen::Index k = 0; k < amplitudes_.size(); ++k) amp.push_back(write_complex(amplitudes_(k)));
  auto& phi = doc["modes"] = nlohmann::json::array();  // column-major
  for (Eigen::Index c = 0; c < modes_.cols(); ++c) {
    for (Eigen::Index i = 0; i < modes_.rows(); ++i) phi.push_back(write_complex(modes_(i, c)));
  }
  doc["singular_values"] = std::vector<double>(singular_values_.data(),
                                               singular_values_.data() + singular_values_.size());
  return doc;
}

DmdModel DmdModel::from_json(const nlohmann::json& doc) {
  try {
    const auto r = doc.at("r").get<Eigen::Index>();
    const auto rows = doc.at("rows").get<Eigen::Index>();
    ComplexVector lam(r), amp(r);
    ComplexMatrix phi(rows, r);
    const auto& jl = doc.at("eigenvalues");
    const auto& ja = doc.at("amplitudes");
    const auto& jp = doc.at("modes");
    if (static_cast<Eigen::Index>(jl.size()) != r || static_cast<Eigen::Index>(ja.size()) != r ||
        static_cast<Eigen::Index>(jp.size()) != r * rows) {
      fail(ErrorCategory::config, "DMD model document has inconsistent sizes");
    }
    for (Eigen::Index k = 0; k < r; ++k) {
      lam(k) = read_complex(jl.at(static_cast<std::size_t>(k)));
      amp(k) = read_complex(ja.at(static_cast<std::size_t>(k)));
    }
    for (Eigen::Index c = 0; c < r; ++c) {
      for (Eigen::Index i = 0; i < rows; ++i) {
        phi(i, c) = read_complex(jp.at(static_cast<std::size_t>(c * rows + i)));
      }
    }
    Eigen::VectorXd sv;
    if (doc.contains("singular_values")) {
      const auto values = doc.at("singular_values").get<std::vector<double>>();
      sv = Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
    }
    return DmdModel(std::move(lam), std::move(phi), std::move(amp), doc.at("dt").get<double>(),
                    doc.at("t0").get<double>(), std::move(sv));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCategory::config, std::string("malformed DMD model document: ") + e.what());
  }
}

DmdModel fit(const SnapshotMatrix& snapshots, double eps) {
  const Eigen::Index m = snapshots.cols();
  if (m < 3) fail(ErrorCategory::degenerate_data, "DMD needs at least three snapshots");
  const Eigen::MatrixXd& data = snapshots.data;
  const auto y1 = data.leftCols(m - 1);
  const auto y2 = data.rightCols(m - 1);

  const TruncatedSvd svd = truncated_svd(y1, eps);
  if (svd.spectrum.size() == 0) fail(ErrorCategory::degenerate_data, "snapshot matrix is zero");

  const Eigen::MatrixXd& ur = svd.leading.U;
  const Eigen::MatrixXd& vr = svd.leading.V;
  const Eigen::VectorXd inv_s = svd.leading.sigma.cwiseInverse();
  const Eigen::MatrixXd k_tilde = ur.transpose() * (y2 * vr) * inv_s.asDiagonal();

  Eigen::EigenSolver<Eigen::MatrixXd> es(k_tilde, true);
  if (es.info() != Eigen::Success) {
    fail(ErrorCategory::degenerate_data, "eigen-decomposition of the reduced operator failed");
  }
  ComplexMatrix w = es.eigenvectors();
  for (Eigen::Index c = 0; c < w.cols(); ++c) w.col(c).normalize();
  // U has orthonormal columns, so Phi = U W keeps unit columns and the
  // least-squares amplitudes reduce to W^{-1} U^T y1.
  const ComplexVector projected = (ur.transpose() * data.col(0)).cast<std::complex<double>>();
  ComplexVector b = w.colPivHouseholderQr().solve(projected);
  ComplexMatrix phi = ur.cast<std::complex<double>>() * w;
  return DmdModel(es.eigenvalues(), std::move(phi), std::move(b), snapshots.dt, snapshots.t0,
                  svd.spectrum);
}

double reconstruction_error(const DmdModel& model, const SnapshotMatrix& snapshots) {
  double worst = 0.0;
  for (Eigen::Index c = 0; c < snapshots.cols(); ++c) {
    const Eigen::VectorXd y = model.predict(static_cast<double>(c + 1));
    const double ref = snapshots.data.col(c).norm();
    const double err = (y - snapshots.data.col(c)).norm();
    worst = std::max(worst, ref > 0.0 ? err / ref : err);
  }
  return worst;
}

}  // namespace shockrom
