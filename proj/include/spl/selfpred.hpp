#pragma once

#include "spl/losses.hpp"
#include "spl/markov.hpp"
#include "spl/representation.hpp"
#include "spl/rng.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace spl {

enum class GradientMode { Semi, Full };
enum class PredictorMode { Optimal, Noisy, InnerSolved };

/// Knobs of a discrete self-predictive run.
struct DynamicsConfig {
  double eta = 1e-3;
  long iters = 10000;
  GradientMode gradient = GradientMode::Semi;
  PredictorMode predictor = PredictorMode::Optimal;
  double sigma = 0.0;                 // noise scale for PredictorMode::Noisy
  LossSpec loss;
  std::optional<double> target_beta;  // nullopt: no target representation
  int n_step = 1;
  long record_every = 100;
  std::uint64_t noise_seed = 0;

  void validate() const;
};

/// One recorded point. `time` is the step index for discrete runs and the
/// ODE time otherwise; `ratio` divides by eigen_norm for symmetric P and by
/// svd_norm otherwise (for bidirectional runs it is f_tilde / svd_norm).
struct TrajectoryRecord {
  double time = 0.0;
  double f = 0.0;
  double ratio = 0.0;
  std::optional<double> f_tilde;
  double covariance_drift = 0.0;
  double max_abs_cosine = 0.0;
  double residual = 0.0;
};

struct Trajectory {
  std::vector<TrajectoryRecord> records;
  Representation final_phi;
  double max_covariance_drift = 0.0;
};

PredictorMatrix optimal_predictor(const Representation& phi, const TransitionMatrix& p,
                                  const DistributionVector& d);

/// Optimal predictor when the targets come from `target` (target network).
PredictorMatrix optimal_predictor(const Representation& phi, const Representation& target,
                                  const TransitionMatrix& p, const DistributionVector& d);

/// phi + 2 eta (D P phi - D phi pred) pred^T: one step on the stop-gradient
/// squared loss.
Representation semi_gradient_step(const Representation& phi, const PredictorMatrix& pred,
                                  const TransitionMatrix& p, const DistributionVector& d,
                                  double eta);

/// Same step with the gradient also flowing through the target phi^T y.
Representation full_gradient_step(const Representation& phi, const PredictorMatrix& pred,
                                  const TransitionMatrix& p, const DistributionVector& d,
                                  double eta);

/// pred + eps with eps_ij ~ N(0, sigma^2), drawn row by row from `rng`.
PredictorMatrix noisy_predictor(const PredictorMatrix& pred, double sigma, Rng& rng);

/// (I - phi phi^T) P phi (phi^T P phi)^T, the uniform-d, orthonormal-init flow.
Matrix ode_rhs(const Representation& phi, const TransitionMatrix& p);
Matrix ode_rhs(const Matrix& phi, const Matrix& p);

struct OdeOptions {
  double t_end = 100.0;
  double rel_tol = 1e-9;
  double abs_tol = 1e-9;
  double record_every = 1.0;  // records at 0, dt, 2 dt, ... and t_end
};

std::vector<double> record_grid(double t_end, double record_every);

/// Adaptive RK45 integration of ode_rhs without re-orthonormalization;
/// max_covariance_drift is taken over every accepted step.
Trajectory integrate_ode(const Representation& phi0, const TransitionMatrix& p,
                         const OdeOptions& options = {});

/// Discrete self-predictive learning: per iteration a predictor (closed form,
/// noisy, or inner-solved) and one gradient step. With a target representation
/// phi' the targets are phi'^T y and phi' <- phi' + eta beta (phi - phi').
Trajectory run_discrete(const Representation& phi0, const TransitionMatrix& p,
                        const DistributionVector& d, const DynamicsConfig& config);

}  // namespace spl
