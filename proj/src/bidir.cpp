#include "spl/bidir.hpp"

#include "spl/error.hpp"
#include "spl/losses.hpp"
#include "spl/metrics.hpp"
#include "spl/ode.hpp"

#include <algorithm>
#include <cmath>

namespace spl {

namespace {

void require_doubly_stochastic(const TransitionMatrix& p) {
  if (!p.is_doubly_stochastic())
    throw Error(ErrorKind::NotDoublyStochastic, "bidirectional dynamics need a doubly stochastic P");
}

void require_state(const BidirState& s, const TransitionMatrix& p) {
  if (s.left.n() != p.size()) throw Error(ErrorKind::ShapeMismatch, "state size differs from P");
}

struct Derivative {
  Matrix left;
  Matrix right;
};

Derivative rhs(const Matrix& left, const Matrix& right, const Matrix& p) {
  const Matrix p_right = p * right;
  const Matrix pt_left = p.transpose() * left;
  const Matrix fwd = left.transpose() * p_right;
  const Matrix bwd = fwd.transpose();
  return {(p_right - left * (left.transpose() * p_right)) * fwd.transpose(),
          (pt_left - right * (right.transpose() * pt_left)) * bwd.transpose()};
}

TrajectoryRecord make_record(double time, const Matrix& left, const Matrix& right,
                             const Matrix& left0, const Matrix& right0, const Matrix& p,
                             double svd_norm, double* left_drift, double* right_drift) {
  TrajectoryRecord r;
  r.time = time;
  r.f = trace_objective(left, p);
  r.f_tilde = svd_trace_objective(left, right, p);
  r.ratio = *r.f_tilde / svd_norm;
  const CollapseMetrics cl = collapse_metrics(left, left0);
  const CollapseMetrics cr = collapse_metrics(right, right0);
  *left_drift = std::max(*left_drift, cl.covariance_drift);
  *right_drift = std::max(*right_drift, cr.covariance_drift);
  r.covariance_drift = std::max(cl.covariance_drift, cr.covariance_drift);
  r.max_abs_cosine = std::max(cl.max_abs_cosine, cr.max_abs_cosine);
  const Derivative dv = rhs(left, right, p);
  r.residual = std::sqrt(dv.left.squaredNorm() + dv.right.squaredNorm());
  return r;
}

}  // namespace

BidirPredictors bidir_optimal_predictors(const BidirState& state, const TransitionMatrix& p) {
  require_doubly_stochastic(p);
  require_state(state, p);
  const Matrix& l = state.left.matrix();
  const Matrix& r = state.right.matrix();
  const Eigen::Index k = l.cols();
  const double dev = std::max((l.transpose() * l - Matrix::Identity(k, k)).cwiseAbs().maxCoeff(),
                              (r.transpose() * r - Matrix::Identity(k, k)).cwiseAbs().maxCoeff());
  if (dev > 1e-8)
    throw Error(ErrorKind::InvalidInput, "closed-form predictors need orthonormal representations");
  Matrix fwd = l.transpose() * (p.entries() * r);
  Matrix bwd = fwd.transpose();
  return {PredictorMatrix(std::move(fwd)), PredictorMatrix(std::move(bwd))};
}

BidirPredictors bidir_least_squares_predictors(const BidirState& state, const TransitionMatrix& p,
                                               const DistributionVector& d) {
  require_doubly_stochastic(p);
  require_state(state, p);
  if (d.size() != p.size()) throw Error(ErrorKind::ShapeMismatch, "d size differs from P");
  const Matrix& l = state.left.matrix();
  const Matrix& r = state.right.matrix();
  const Matrix& pm = p.entries();
  const Vector q = pm.transpose() * d.values();
  Matrix fwd = least_squares_predictor(l, r, pm, d.values());
  const Matrix qr = q.asDiagonal() * r;
  Matrix bwd = symmetric_pinv(r.transpose() * qr) * (r.transpose() * (pm.transpose() * (d.values().asDiagonal() * l)));
  return {PredictorMatrix(std::move(fwd)), PredictorMatrix(std::move(bwd))};
}

BidirDerivative bidir_ode_rhs(const BidirState& state, const TransitionMatrix& p) {
  require_doubly_stochastic(p);
  require_state(state, p);
  Derivative dv = rhs(state.left.matrix(), state.right.matrix(), p.entries());
  return {std::move(dv.left), std::move(dv.right)};
}

double bidir_residual(const BidirState& state, const TransitionMatrix& p) {
  const BidirDerivative dv = bidir_ode_rhs(state, p);
  return std::sqrt(dv.left.squaredNorm() + dv.right.squaredNorm());
}

BidirState bidir_semi_gradient_step(const BidirState& state, const BidirPredictors& preds,
                                    const TransitionMatrix& p, const DistributionVector& d,
                                    double eta) {
  require_doubly_stochastic(p);
  require_state(state, p);
  if (!(eta > 0.0)) throw Error(ErrorKind::InvalidInput, "eta must be positive");
  if (preds.forward.k() != state.left.k() || preds.backward.k() != state.left.k())
    throw Error(ErrorKind::ShapeMismatch, "predictor width differs from the state");
  const Matrix& l = state.left.matrix();
  const Matrix& r = state.right.matrix();
  const Matrix& pm = p.entries();
  const Vector& dv = d.values();
  const Vector q = pm.transpose() * dv;
  const Matrix& f = preds.forward.matrix();
  const Matrix& b = preds.backward.matrix();
  Matrix left = l + (2.0 * eta) * (dv.asDiagonal() * (pm * r - l * f)) * f.transpose();
  Matrix right = r + (2.0 * eta) * (pm.transpose() * (dv.asDiagonal() * l) - q.asDiagonal() * (r * b)) * b.transpose();
  return BidirState(Representation(std::move(left)), Representation(std::move(right)));
}

BidirTrajectory integrate_bidir(const BidirState& state0, const TransitionMatrix& p,
                                const OdeOptions& options) {
  require_doubly_stochastic(p);
  require_state(state0, p);
  const auto times = record_grid(options.t_end, options.record_every);
  const Eigen::Index n = p.size();
  const Eigen::Index k = state0.left.k();
  const double svd_norm = svd_normalizer(p, k);
  const Matrix& pm = p.entries();
  const Matrix& left0 = state0.left.matrix();
  const Matrix& right0 = state0.right.matrix();
  const Matrix cov_l = left0.transpose() * left0;
  const Matrix cov_r = right0.transpose() * right0;

  Matrix y(n, 2 * k);
  y << left0, right0;
  BidirTrajectory out{{}, state0, 0.0, 0.0};
  Rk45Options rk;
  rk.rel_tol = options.rel_tol;
  rk.abs_tol = options.abs_tol;
  integrate_rk45(
      [&](const Matrix& s) {
        Derivative dv = rhs(s.leftCols(k), s.rightCols(k), pm);
        Matrix stacked(n, 2 * k);
        stacked << dv.left, dv.right;
        return stacked;
      },
      y, 0.0, times, rk,
      [&](double t, const Matrix& s) {
        out.records.push_back(make_record(t, s.leftCols(k), s.rightCols(k), left0, right0, pm,
                                          svd_norm, &out.max_left_drift, &out.max_right_drift));
      },
      [&](double, const Matrix& s) {
        const auto l = s.leftCols(k);
        const auto r = s.rightCols(k);
        out.max_left_drift = std::max(out.max_left_drift, (l.transpose() * l - cov_l).cwiseAbs().maxCoeff());
        out.max_right_drift = std::max(out.max_right_drift, (r.transpose() * r - cov_r).cwiseAbs().maxCoeff());
      });
  out.final_state = BidirState(Representation(y.leftCols(k)), Representation(y.rightCols(k)));
  return out;
}

BidirTrajectory run_discrete_bidir(const BidirState& state0, const TransitionMatrix& p,
                                   const DistributionVector& d, const DynamicsConfig& config) {
  config.validate();
  require_doubly_stochastic(p);
  require_state(state0, p);
  if (config.gradient != GradientMode::Semi)
    throw Error(ErrorKind::InvalidInput, "bidirectional runs use semi-gradients only");
  if (config.predictor == PredictorMode::InnerSolved || config.loss.kind != LossKind::Squared)
    throw Error(ErrorKind::InvalidInput, "bidirectional runs use optimal or noisy predictors");
  if (config.target_beta || config.n_step != 1)
    throw Error(ErrorKind::InvalidInput, "bidirectional runs do not support targets or n-step");

  const Eigen::Index k = state0.left.k();
  const double svd_norm = svd_normalizer(p, k);
  const Matrix& pm = p.entries();
  const Matrix& left0 = state0.left.matrix();
  const Matrix& right0 = state0.right.matrix();
  Rng noise(config.noise_seed);

  BidirTrajectory out{{}, state0, 0.0, 0.0};
  BidirState state = state0;
  auto record = [&](long step) {
    out.records.push_back(make_record(static_cast<double>(step), state.left.matrix(),
                                      state.right.matrix(), left0, right0, pm, svd_norm,
                                      &out.max_left_drift, &out.max_right_drift));
  };
  record(0);
  for (long step = 1; step <= config.iters; ++step) {
    BidirPredictors preds = bidir_least_squares_predictors(state, p, d);
    if (config.predictor == PredictorMode::Noisy) {
      preds.forward = noisy_predictor(preds.forward, config.sigma, noise);
      preds.backward = noisy_predictor(preds.backward, config.sigma, noise);
    }
    state = bidir_semi_gradient_step(state, preds, p, d, config.eta);
    if (!state.left.matrix().allFinite() || !state.right.matrix().allFinite())
      throw Error(ErrorKind::InvalidInput, "representation diverged to non-finite values");
    if (step % config.record_every == 0 || step == config.iters) record(step);
  }
  out.final_state = std::move(state);
  return out;
}

}  // namespace spl
