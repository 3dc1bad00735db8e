#include "spl/metrics.hpp"

#include "spl/error.hpp"

#include <algorithm>
#include <cmath>

namespace spl {

namespace {

void require_shape(const Matrix& phi, const Matrix& p) {
  if (phi.rows() != p.rows())
    throw Error(ErrorKind::ShapeMismatch, "representation rows do not match the state count");
}

}  // namespace

double trace_objective(const Matrix& phi, const Matrix& p) {
  require_shape(phi, p);
  return (phi.transpose() * (p * phi)).squaredNorm();
}

double trace_objective(const Representation& phi, const TransitionMatrix& p) {
  return trace_objective(phi.matrix(), p.entries());
}

double svd_trace_objective(const Matrix& left, const Matrix& right, const Matrix& p) {
  require_shape(left, p);
  require_shape(right, p);
  if (left.cols() != right.cols())
    throw Error(ErrorKind::ShapeMismatch, "left and right representations differ in width");
  return (left.transpose() * (p * right)).squaredNorm();
}

double svd_trace_objective(const BidirState& state, const TransitionMatrix& p) {
  return svd_trace_objective(state.left.matrix(), state.right.matrix(), p.entries());
}

double eigen_normalizer(const TransitionMatrix& p, Eigen::Index k) {
  if (k < 1 || k > p.size()) throw Error(ErrorKind::InvalidInput, "normalizer: k out of range");
  const SpectralSummary s = spectral(p, SpectralKind::Eigen);
  return s.values.head(k).squaredNorm();
}

double svd_normalizer(const TransitionMatrix& p, Eigen::Index k) {
  if (k < 1 || k > p.size()) throw Error(ErrorKind::InvalidInput, "normalizer: k out of range");
  const SpectralSummary s = spectral(p, SpectralKind::Svd);
  return s.values.head(k).squaredNorm();
}

Normalizers normalizers(const TransitionMatrix& p, Eigen::Index k) {
  Normalizers out;
  if (p.is_symmetric()) out.eigen_norm = eigen_normalizer(p, k);
  out.svd_norm = svd_normalizer(p, k);
  return out;
}

double ratio_normalizer(const TransitionMatrix& p, Eigen::Index k) {
  return p.is_symmetric() ? eigen_normalizer(p, k) : svd_normalizer(p, k);
}

double max_abs_cosine(const Matrix& phi, bool* zero_column) {
  const Eigen::Index k = phi.cols();
  Vector norms = phi.colwise().norm().transpose();
  bool zero = false;
  for (Eigen::Index i = 0; i < k; ++i) zero = zero || !(norms[i] >= 1e-300);
  if (zero_column) *zero_column = zero;
  if (k < 2) return 0.0;
  if (zero) return 1.0;
  double best = 0.0;
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = i + 1; j < k; ++j)
      best = std::max(best, std::abs(phi.col(i).dot(phi.col(j))) / (norms[i] * norms[j]));
  return std::min(best, 1.0);
}

CollapseMetrics collapse_metrics(const Matrix& phi, const Matrix& phi0) {
  if (phi.rows() != phi0.rows() || phi.cols() != phi0.cols())
    throw Error(ErrorKind::ShapeMismatch, "collapse_metrics: shapes differ");
  CollapseMetrics out;
  out.covariance_drift =
      (phi.transpose() * phi - phi0.transpose() * phi0).cwiseAbs().maxCoeff();
  out.max_abs_cosine = max_abs_cosine(phi, &out.zero_column);
  return out;
}

CollapseMetrics collapse_metrics(const Representation& phi, const Representation& phi0) {
  return collapse_metrics(phi.matrix(), phi0.matrix());
}

}  // namespace spl
