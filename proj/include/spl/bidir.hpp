#pragma once

#include "spl/markov.hpp"
#include "spl/representation.hpp"
#include "spl/selfpred.hpp"

#include <utility>
#include <vector>

namespace spl {

// Bidirectional self-predictive learning: the left representation phi predicts
// phi_tilde^T y forward through P_fwd, the right representation phi_tilde
// predicts phi^T x backward through P_bwd. Every operation here needs a doubly
// stochastic P (so the reverse chain is a Markov chain under uniform d) and
// throws NotDoublyStochastic otherwise.

struct BidirPredictors {
  PredictorMatrix forward;   // phi^T P phi_tilde
  PredictorMatrix backward;  // phi_tilde^T P^T phi = forward^T
};

/// Closed forms for orthonormal states (within 1e-8) under uniform d.
BidirPredictors bidir_optimal_predictors(const BidirState& state, const TransitionMatrix& p);

/// Normal-equation predictors for arbitrary (full-rank) states:
/// (phi^T D phi) P_fwd = phi^T D P phi_tilde and
/// (phi_tilde^T Q phi_tilde) P_bwd = phi_tilde^T P^T D phi with Q = diag(P^T d).
BidirPredictors bidir_least_squares_predictors(const BidirState& state, const TransitionMatrix& p,
                                               const DistributionVector& d);

struct BidirDerivative {
  Matrix left;
  Matrix right;
};

/// dphi = (I - phi phi^T) P phi_tilde P_fwd^T,
/// dphi_tilde = (I - phi_tilde phi_tilde^T) P^T phi P_bwd^T.
BidirDerivative bidir_ode_rhs(const BidirState& state, const TransitionMatrix& p);

/// sqrt(||dphi||^2 + ||dphi_tilde||^2).
double bidir_residual(const BidirState& state, const TransitionMatrix& p);

/// Simultaneous semi-gradient steps on both stop-gradient losses:
/// phi <- phi + 2 eta D (P phi_tilde - phi P_fwd) P_fwd^T,
/// phi_tilde <- phi_tilde + 2 eta (P^T D phi - Q phi_tilde P_bwd) P_bwd^T.
BidirState bidir_semi_gradient_step(const BidirState& state, const BidirPredictors& preds,
                                    const TransitionMatrix& p, const DistributionVector& d,
                                    double eta);

struct BidirTrajectory {
  std::vector<TrajectoryRecord> records;  // f of phi, f_tilde, ratio f_tilde / svd_norm
  BidirState final_state;
  double max_left_drift = 0.0;
  double max_right_drift = 0.0;
};

BidirTrajectory integrate_bidir(const BidirState& state0, const TransitionMatrix& p,
                                const OdeOptions& options = {});

/// Discrete bidirectional run. Requires semi gradients and an optimal or
/// noisy predictor (noise is drawn for P_fwd then P_bwd each iteration).
BidirTrajectory run_discrete_bidir(const BidirState& state0, const TransitionMatrix& p,
                                   const DistributionVector& d, const DynamicsConfig& config);

}  // namespace spl
