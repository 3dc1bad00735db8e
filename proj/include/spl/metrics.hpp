#pragma once

#include "spl/markov.hpp"
#include "spl/representation.hpp"

#include <optional>

namespace spl {

/// ||phi^T P phi||_F^2.
double trace_objective(const Representation& phi, const TransitionMatrix& p);
double trace_objective(const Matrix& phi, const Matrix& p);

/// ||phi^T P phi_tilde||_F^2.
double svd_trace_objective(const BidirState& state, const TransitionMatrix& p);
double svd_trace_objective(const Matrix& left, const Matrix& right, const Matrix& p);

/// Sum of the top-k squared eigenvalues (symmetric P only).
double eigen_normalizer(const TransitionMatrix& p, Eigen::Index k);
/// Sum of the top-k squared singular values.
double svd_normalizer(const TransitionMatrix& p, Eigen::Index k);

struct Normalizers {
  std::optional<double> eigen_norm;  // present only for symmetric P
  double svd_norm = 0.0;
};

Normalizers normalizers(const TransitionMatrix& p, Eigen::Index k);

/// Normalizer used for recorded ratios: eigen_norm for symmetric P,
/// svd_norm otherwise.
double ratio_normalizer(const TransitionMatrix& p, Eigen::Index k);

struct CollapseMetrics {
  double covariance_drift = 0.0;  // max |phi^T phi - phi0^T phi0|
  double max_abs_cosine = 0.0;    // 0 when k == 1
  bool zero_column = false;       // some column norm < 1e-300; cosine reported as 1
};

CollapseMetrics collapse_metrics(const Representation& phi, const Representation& phi0);
CollapseMetrics collapse_metrics(const Matrix& phi, const Matrix& phi0);

/// Largest |cos| between distinct columns.
double max_abs_cosine(const Matrix& phi, bool* zero_column = nullptr);

/// One recorded point of a trajectory.
struct MetricBundle {
  double f = 0.0;
  std::optional<double> f_tilde;
  std::optional<double> eigen_norm;
  double svd_norm = 0.0;
  double ratio = 0.0;
  double covariance_drift = 0.0;
  double max_abs_cosine = 0.0;
  double residual_norm = 0.0;
};

}  // namespace spl
