#include "spl/selfpred.hpp"

#include "spl/error.hpp"
#include "spl/metrics.hpp"
#include "spl/ode.hpp"

#include <algorithm>
#include <cmath>

namespace spl {

Representation orthonormal_init(Eigen::Index n, Eigen::Index k, std::uint64_t seed) {
  if (k < 1 || k > n) throw Error(ErrorKind::InvalidInput, "orthonormal_init: need 1 <= k <= n");
  Rng rng(seed);
  Matrix g(n, k);
  for (Eigen::Index j = 0; j < k; ++j)
    for (Eigen::Index i = 0; i < n; ++i) g(i, j) = rng.normal();
  return Representation(orthonormalize_columns(g));
}

void DynamicsConfig::validate() const {
  if (!(eta > 0.0)) throw Error(ErrorKind::InvalidInput, "eta must be positive");
  if (iters < 1) throw Error(ErrorKind::InvalidInput, "iters must be >= 1");
  if (!(sigma >= 0.0)) throw Error(ErrorKind::InvalidInput, "sigma must be non-negative");
  if (n_step < 1) throw Error(ErrorKind::InvalidInput, "n_step must be >= 1");
  if (record_every < 1) throw Error(ErrorKind::InvalidInput, "record_every must be >= 1");
  if (target_beta && !(*target_beta >= 0.0))
    throw Error(ErrorKind::InvalidInput, "target beta must be non-negative");
  loss.validate();
  if (loss.kind != LossKind::Squared && predictor != PredictorMode::InnerSolved)
    throw Error(ErrorKind::InvalidInput, "non-squared losses need the inner-solved predictor");
  if (gradient == GradientMode::Full && target_beta)
    throw Error(ErrorKind::InvalidInput, "full gradient is undefined with a target representation");
}

namespace {

void require_compatible(const Matrix& phi, const TransitionMatrix& p, const DistributionVector& d) {
  if (phi.rows() != p.size() || d.size() != p.size())
    throw Error(ErrorKind::ShapeMismatch, "representation, P and d disagree in size");
}

// Direction G of the semi-gradient step phi + eta G on the squared loss with
// targets from `target`.
Matrix semi_direction(const Matrix& phi, const Matrix& target, const Matrix& pred,
                      const Matrix& p, const Vector& d) {
  return 2.0 * d.asDiagonal() * (p * target - phi * pred) * pred.transpose();
}

Matrix full_direction(const Matrix& phi, const Matrix& pred, const Matrix& p, const Vector& d) {
  const Vector q = p.transpose() * d;
  const Matrix dphi_pred = d.asDiagonal() * (phi * pred);
  const Matrix d_pred = 2.0 * (dphi_pred - d.asDiagonal() * (p * phi));
  const Matrix d_target = 2.0 * (q.asDiagonal() * phi - p.transpose() * dphi_pred);
  return -(d_pred * pred.transpose() + d_target);
}

TrajectoryRecord make_record(double time, const Matrix& phi, const Matrix& phi0, const Matrix& p,
                             double normalizer) {
  TrajectoryRecord r;
  r.time = time;
  r.f = trace_objective(phi, p);
  r.ratio = r.f / normalizer;
  const CollapseMetrics cm = collapse_metrics(phi, phi0);
  r.covariance_drift = cm.covariance_drift;
  r.max_abs_cosine = cm.max_abs_cosine;
  r.residual = ode_rhs(phi, p).norm();
  return r;
}

}  // namespace

PredictorMatrix optimal_predictor(const Representation& phi, const TransitionMatrix& p,
                                  const DistributionVector& d) {
  return optimal_predictor(phi, phi, p, d);
}

PredictorMatrix optimal_predictor(const Representation& phi, const Representation& target,
                                  const TransitionMatrix& p, const DistributionVector& d) {
  require_compatible(phi.matrix(), p, d);
  require_compatible(target.matrix(), p, d);
  if (phi.k() != target.k()) throw Error(ErrorKind::ShapeMismatch, "target width differs");
  return PredictorMatrix(least_squares_predictor(phi.matrix(), target.matrix(), p.entries(), d.values()));
}

Representation semi_gradient_step(const Representation& phi, const PredictorMatrix& pred,
                                  const TransitionMatrix& p, const DistributionVector& d,
                                  double eta) {
  require_compatible(phi.matrix(), p, d);
  if (pred.k() != phi.k()) throw Error(ErrorKind::ShapeMismatch, "predictor width differs");
  if (!(eta > 0.0)) throw Error(ErrorKind::InvalidInput, "eta must be positive");
  return Representation(phi.matrix() + eta * semi_direction(phi.matrix(), phi.matrix(), pred.matrix(),
                                                            p.entries(), d.values()));
}

Representation full_gradient_step(const Representation& phi, const PredictorMatrix& pred,
                                  const TransitionMatrix& p, const DistributionVector& d,
                                  double eta) {
  require_compatible(phi.matrix(), p, d);
  if (pred.k() != phi.k()) throw Error(ErrorKind::ShapeMismatch, "predictor width differs");
  if (!(eta > 0.0)) throw Error(ErrorKind::InvalidInput, "eta must be positive");
  return Representation(phi.matrix() +
                        eta * full_direction(phi.matrix(), pred.matrix(), p.entries(), d.values()));
}

PredictorMatrix noisy_predictor(const PredictorMatrix& pred, double sigma, Rng& rng) {
  if (!(sigma >= 0.0)) throw Error(ErrorKind::InvalidInput, "sigma must be non-negative");
  if (sigma == 0.0) return pred;
  Matrix out = pred.matrix();
  for (Eigen::Index i = 0; i < out.rows(); ++i)
    for (Eigen::Index j = 0; j < out.cols(); ++j) out(i, j) += sigma * rng.normal();
  return PredictorMatrix(std::move(out));
}

Matrix ode_rhs(const Matrix& phi, const Matrix& p) {
  if (phi.rows() != p.rows()) throw Error(ErrorKind::ShapeMismatch, "ode_rhs: size mismatch");
  const Matrix pphi = p * phi;
  const Matrix m = phi.transpose() * pphi;
  return (pphi - phi * m) * m.transpose();
}

Matrix ode_rhs(const Representation& phi, const TransitionMatrix& p) {
  return ode_rhs(phi.matrix(), p.entries());
}

std::vector<double> record_grid(double t_end, double record_every) {
  if (!(t_end > 0.0)) throw Error(ErrorKind::InvalidInput, "t_end must be positive");
  if (!(record_every > 0.0)) throw Error(ErrorKind::InvalidInput, "record interval must be positive");
  std::vector<double> times{0.0};
  for (long i = 1;; ++i) {
    const double t = static_cast<double>(i) * record_every;
    if (t >= t_end * (1.0 - 1e-12)) break;
    times.push_back(t);
  }
  times.push_back(t_end);
  return times;
}

Trajectory integrate_ode(const Representation& phi0, const TransitionMatrix& p,
                         const OdeOptions& options) {
  if (phi0.n() != p.size()) throw Error(ErrorKind::ShapeMismatch, "integrate_ode: size mismatch");
  const auto times = record_grid(options.t_end, options.record_every);
  const double normalizer = ratio_normalizer(p, phi0.k());
  const Matrix& pm = p.entries();
  const Matrix& start = phi0.matrix();
  const Matrix cov0 = start.transpose() * start;

  Trajectory out;
  Matrix y = start;
  Rk45Options rk;
  rk.rel_tol = options.rel_tol;
  rk.abs_tol = options.abs_tol;
  integrate_rk45(
      [&](const Matrix& phi) { return ode_rhs(phi, pm); }, y, 0.0, times, rk,
      [&](double t, const Matrix& phi) {
        out.records.push_back(make_record(t, phi, start, pm, normalizer));
        out.max_covariance_drift = std::max(out.max_covariance_drift, out.records.back().covariance_drift);
      },
      [&](double, const Matrix& phi) {
        out.max_covariance_drift = std::max(
            out.max_covariance_drift, (phi.transpose() * phi - cov0).cwiseAbs().maxCoeff());
      });
  out.final_phi = Representation(std::move(y));
  return out;
}

Trajectory run_discrete(const Representation& phi0, const TransitionMatrix& p_one_step,
                        const DistributionVector& d, const DynamicsConfig& config) {
  config.validate();
  require_compatible(phi0.matrix(), p_one_step, d);
  const TransitionMatrix p =
      config.n_step > 1 ? n_step_matrix(p_one_step, config.n_step) : p_one_step;
  const Matrix& pm = p.entries();
  const Vector& dv = d.values();
  const double normalizer = ratio_normalizer(p, phi0.k());
  const Matrix& start = phi0.matrix();
  Rng noise(config.noise_seed);

  Trajectory out;
  Matrix phi = start;
  Matrix target_net = start;
  Matrix pred;
  bool have_pred = false;
  auto record = [&](long step) {
    out.records.push_back(make_record(static_cast<double>(step), phi, start, pm, normalizer));
    out.max_covariance_drift = std::max(out.max_covariance_drift, out.records.back().covariance_drift);
  };
  record(0);

  Matrix direction;
  for (long step = 1; step <= config.iters; ++step) {
    const Matrix& target = config.target_beta ? target_net : phi;
    Matrix d_prediction;  // set by the inner solver
    switch (config.predictor) {
      case PredictorMode::Optimal:
      case PredictorMode::Noisy:
        pred = least_squares_predictor(phi, target, pm, dv);
        if (config.predictor == PredictorMode::Noisy && config.sigma > 0.0)
          for (Eigen::Index i = 0; i < pred.rows(); ++i)
            for (Eigen::Index j = 0; j < pred.cols(); ++j) pred(i, j) += config.sigma * noise.normal();
        break;
      case PredictorMode::InnerSolved: {
        InnerSolution sol = solve_predictor(phi, target, p, d, config.loss, have_pred ? &pred : nullptr);
        pred = sol.pred.matrix();
        d_prediction = std::move(sol.d_prediction);
        break;
      }
    }
    have_pred = true;

    if (config.loss.kind == LossKind::Squared) {
      direction = config.gradient == GradientMode::Semi ? semi_direction(phi, target, pred, pm, dv)
                                                        : full_direction(phi, pred, pm, dv);
    } else {
      if (d_prediction.size() == 0 || config.gradient == GradientMode::Full) {
        LossEvaluation eval = evaluate_loss(phi * pred, target, p, d, config.loss);
        if (d_prediction.size() == 0) d_prediction = eval.d_prediction;
        direction = -d_prediction * pred.transpose();
        if (config.gradient == GradientMode::Full) direction -= eval.d_target;
      } else {
        direction = -d_prediction * pred.transpose();
      }
    }

    if (config.target_beta) target_net += (config.eta * *config.target_beta) * (phi - target_net);
    phi += config.eta * direction;

    if (!phi.allFinite())
      throw Error(ErrorKind::InvalidInput, "representation diverged to non-finite values");
    if (step % config.record_every == 0 || step == config.iters) record(step);
  }
  out.final_phi = Representation(std::move(phi));
  return out;
}

}  // namespace spl
