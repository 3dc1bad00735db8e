#pragma once

#include "spl/error.hpp"
#include "spl/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

namespace spl {

struct Rk45Options {
  double rel_tol = 1e-9;
  double abs_tol = 1e-9;
  double max_step = std::numeric_limits<double>::infinity();
  long max_steps = 50'000'000;
};

struct Rk45Stats {
  long accepted = 0;
  long rejected = 0;
  long rhs_evals = 0;
};

namespace detail {

// Dormand-Prince 5(4) tableau.
inline constexpr double kA[6][5] = {
    {0, 0, 0, 0, 0},
    {1.0 / 5, 0, 0, 0, 0},
    {3.0 / 40, 9.0 / 40, 0, 0, 0},
    {44.0 / 45, -56.0 / 15, 32.0 / 9, 0, 0},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729, 0},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
};
inline constexpr double kB[6] = {35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84};
inline constexpr double kE[7] = {-71.0 / 57600, 0, 71.0 / 16695, -71.0 / 1920,
                                 17253.0 / 339200, -22.0 / 525, 1.0 / 40};

inline double rms_scaled(const Matrix& err, const Matrix& y0, const Matrix& y1, const Rk45Options& o) {
  const Eigen::Index size = err.size();
  if (size == 0) return 0.0;
  const auto scale = o.abs_tol + o.rel_tol * y0.array().abs().max(y1.array().abs());
  return std::sqrt((err.array() / scale).square().sum() / static_cast<double>(size));
}

}  // namespace detail

/// Adaptive Dormand-Prince RK45 integration of dy/dt = rhs(y) (autonomous).
///
/// `y` is advanced in place from `t0` through every time in `record_times`
/// (ascending, each >= t0); steps are clipped so that each record time is hit
/// exactly, and `observe(t, y)` is called there. `on_step(t, y)` runs after
/// every accepted step. Step control follows the usual scheme: error measured
/// as the RMS of err / (abs_tol + rel_tol * max(|y_old|, |y_new|)), step factor
/// 0.9 * err^(-1/5) clamped to [0.2, 10]. Throws StepSizeUnderflow when the
/// controller asks for a step below 10 ulp of the current time.
template <class Rhs, class Observe, class OnStep>
Rk45Stats integrate_rk45(Rhs&& rhs, Matrix& y, double t0, std::span<const double> record_times,
                         const Rk45Options& options, Observe&& observe, OnStep&& on_step) {
  using detail::kA;
  using detail::kB;
  using detail::kE;
  Rk45Stats stats;
  double t = t0;
  Matrix k[7];
  k[0] = rhs(y);
  ++stats.rhs_evals;

  // Initial step (Hairer, Norsett & Wanner II.4).
  double h;
  {
    const auto scale = (options.abs_tol + options.rel_tol * y.array().abs()).eval();
    const double count = std::max<double>(1.0, static_cast<double>(y.size()));
    const double d0 = std::sqrt((y.array() / scale).square().sum() / count);
    const double d1 = std::sqrt((k[0].array() / scale).square().sum() / count);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    Matrix y1 = y + h0 * k[0];
    Matrix f1 = rhs(y1);
    ++stats.rhs_evals;
    const double d2 = std::sqrt(((f1 - k[0]).array() / scale).square().sum() / count) / h0;
    const double h1 = (d1 <= 1e-15 && d2 <= 1e-15) ? std::max(1e-6, h0 * 1e-3)
                                                   : std::pow(0.01 / std::max(d1, d2), 1.0 / 5.0);
    h = std::min({100.0 * h0, h1, options.max_step});
  }

  Matrix y_stage(y.rows(), y.cols());
  Matrix y_new(y.rows(), y.cols());
  Matrix err(y.rows(), y.cols());
  for (const double target : record_times) {
    if (target < t) throw Error(ErrorKind::InvalidInput, "record times must be ascending");
    while (t < target) {
      const double min_step = 10.0 * std::abs(std::nextafter(t, std::numeric_limits<double>::infinity()) - t);
      if (h < min_step) throw Error(ErrorKind::StepSizeUnderflow, "RK45 step size underflow");
      if (stats.accepted + stats.rejected >= options.max_steps)
        throw Error(ErrorKind::StepSizeUnderflow, "RK45 step budget exhausted");
      const bool clipped = t + h >= target;
      const double step = clipped ? target - t : h;

      for (int s = 1; s < 6; ++s) {
        y_stage = y;
        for (int j = 0; j < s; ++j)
          if (kA[s][j] != 0.0) y_stage.noalias() += (step * kA[s][j]) * k[j];
        k[s] = rhs(y_stage);
      }
      y_new = y;
      for (int j = 0; j < 6; ++j)
        if (kB[j] != 0.0) y_new.noalias() += (step * kB[j]) * k[j];
      k[6] = rhs(y_new);
      stats.rhs_evals += 6;

      err.setZero();
      for (int j = 0; j < 7; ++j)
        if (kE[j] != 0.0) err.noalias() += (step * kE[j]) * k[j];
      const double err_norm = detail::rms_scaled(err, y, y_new, options);

      if (err_norm <= 1.0) {
        t = clipped ? target : t + step;
        y.swap(y_new);
        k[0].swap(k[6]);
        ++stats.accepted;
        on_step(t, static_cast<const Matrix&>(y));
        const double factor = err_norm == 0.0 ? 10.0 : std::min(10.0, 0.9 * std::pow(err_norm, -0.2));
        // A clipped step says nothing about how large the free step could be.
        h = std::min(clipped ? std::max(h, step * factor) : step * factor, options.max_step);
      } else {
        ++stats.rejected;
        h = step * std::max(0.2, 0.9 * std::pow(err_norm, -0.2));
      }
    }
    observe(t, static_cast<const Matrix&>(y));
  }
  return stats;
}

}  // namespace spl
