#pragma once

#include "spl/markov.hpp"
#include "spl/representation.hpp"

namespace spl {

enum class LossKind { Squared, L1, CosineEps };

struct LossSpec {
  LossKind kind = LossKind::Squared;
  double epsilon = 1e-8;  // regularizer of the cosine loss

  void validate() const;
};

// Per-pair losses f(a, b) between a prediction a = pred^T phi^T x and a
// target b = target^T y, both in R^k:
//   squared    ||a - b||^2
//   l1         sum_c |a_c - b_c|          (subgradient 0 at a kink)
//   cosine_eps -a.b / (||a|| ||b|| + eps)
// Expectations are exact: the pair (x = i, y = j) has weight d_i P_ij.

struct LossEvaluation {
  double value = 0.0;
  Matrix d_prediction;  // dL/dA for A = phi pred (n x k)
  Matrix d_target;      // dL/dT for the target matrix T (n x k)
};

/// Loss and its partial derivatives with respect to the prediction matrix
/// A (row i is the prediction from state i) and the target matrix T (row j
/// is the target at state j).
LossEvaluation evaluate_loss(const Matrix& prediction, const Matrix& target,
                             const TransitionMatrix& p, const DistributionVector& d,
                             const LossSpec& loss);

/// E[f(pred^T phi^T x, phi_target^T y)] summed over all n^2 pairs.
double general_loss_value(const Representation& phi, const PredictorMatrix& pred,
                          const Representation& phi_target, const TransitionMatrix& p,
                          const DistributionVector& d, const LossSpec& loss);

struct InnerSolveOptions {
  double grad_tol = 1e-8;  // on max |dL/dP|
  long max_iters = 100000;
};

struct InnerSolution {
  PredictorMatrix pred;
  /// dL/dA at the solution. For l1 the entries belonging to pairs with zero
  /// residual carry the subgradient selected by the optimality certificate,
  /// so that phi^T d_prediction = dL/dP vanishes.
  Matrix d_prediction;
  double grad_inf = 0.0;  // max |phi^T d_prediction|
  long iterations = 0;
};

/// Minimizes the loss over the predictor for fixed phi and target.
///   squared:    BFGS with Armijo backtracking from `warm_start` (or the
///               least-squares predictor)
///   cosine_eps: the same search over directions on the unit sphere, then a
///               walk outward along the ray (the loss only falls with scale
///               there) until the full gradient meets the tolerance
///   l1:         exact least-absolute-deviation solve per predictor
///               column by vertex walking with weighted-median line
///               searches, finished with a subgradient certificate
/// Throws InnerSolveFailure when grad_inf > grad_tol after the budget, and for
/// cosine_eps also when the best direction is not stationary on the sphere
/// (the gradient would only shrink with scale, not vanish).
InnerSolution solve_predictor(const Matrix& phi, const Matrix& target, const TransitionMatrix& p,
                              const DistributionVector& d, const LossSpec& loss,
                              const Matrix* warm_start = nullptr,
                              const InnerSolveOptions& options = {});

}  // namespace spl

namespace spl {

/// Solution of the normal equations (phi^T D phi) pred = phi^T D P target via
/// the pseudo-inverse with relative cutoff 1e-12.
Matrix least_squares_predictor(const Matrix& phi, const Matrix& target, const Matrix& p,
                               const Vector& d);

}  // namespace spl
