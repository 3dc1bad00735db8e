#include "spl/losses.hpp"

#include "spl/error.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace spl {

void LossSpec::validate() const {
  if (kind == LossKind::CosineEps && !(epsilon > 0.0))
    throw Error(ErrorKind::InvalidInput, "cosine loss needs epsilon > 0");
}

Matrix least_squares_predictor(const Matrix& phi, const Matrix& target, const Matrix& p,
                               const Vector& d) {
  const Matrix dphi = d.asDiagonal() * phi;
  const Matrix cov = phi.transpose() * dphi;
  const Matrix cross = dphi.transpose() * (p * target);
  return symmetric_pinv(cov) * cross;
}

namespace {

double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

void require_shapes(const Matrix& a, const Matrix& t, const TransitionMatrix& p,
                    const DistributionVector& d) {
  if (a.rows() != p.size() || t.rows() != p.size() || d.size() != p.size() || a.cols() != t.cols())
    throw Error(ErrorKind::ShapeMismatch, "loss: prediction, target, P and d disagree in shape");
}


// f(a, b) and its partials for one pair; returns the value.
double pair_loss(const LossSpec& loss, const Eigen::Ref<const Eigen::RowVectorXd>& a,
                 const Eigen::Ref<const Eigen::RowVectorXd>& b, Eigen::RowVectorXd& da,
                 Eigen::RowVectorXd& db) {
  switch (loss.kind) {
    case LossKind::Squared: {
      const Eigen::RowVectorXd r = a - b;
      da = 2.0 * r;
      db = -2.0 * r;
      return r.squaredNorm();
    }
    case LossKind::L1: {
      const Eigen::RowVectorXd r = a - b;
      da = r.unaryExpr([](double x) { return sgn(x); });
      db = -da;
      return r.cwiseAbs().sum();
    }
    case LossKind::CosineEps: {
      const double na = a.norm();
      const double nb = b.norm();
      const double dot = a.dot(b);
      const double denom = na * nb + loss.epsilon;
      da = -b / denom;
      db = -a / denom;
      if (na > 0.0) da += (dot * nb / (na * denom * denom)) * a;
      if (nb > 0.0) db += (dot * na / (nb * denom * denom)) * b;
      return -dot / denom;
    }
  }
  return 0.0;
}

}  // namespace

LossEvaluation evaluate_loss(const Matrix& a, const Matrix& t, const TransitionMatrix& p,
                             const DistributionVector& d, const LossSpec& loss) {
  loss.validate();
  require_shapes(a, t, p, d);
  const Matrix& pm = p.entries();
  const Vector& dv = d.values();
  LossEvaluation out;
  if (loss.kind == LossKind::Squared) {
    const Vector q = pm.transpose() * dv;  // marginal of the next state
    const Matrix da_rows = dv.asDiagonal() * a;
    const Matrix pt = pm * t;
    out.value = (a.cwiseProduct(da_rows)).sum() - 2.0 * (da_rows.cwiseProduct(pt)).sum() +
                (t.cwiseProduct(q.asDiagonal() * t)).sum();
    out.d_prediction = 2.0 * (da_rows - dv.asDiagonal() * pt);
    out.d_target = 2.0 * (q.asDiagonal() * t - pm.transpose() * da_rows);
    return out;
  }
  const Eigen::Index n = a.rows();
  out.d_prediction = Matrix::Zero(n, a.cols());
  out.d_target = Matrix::Zero(n, a.cols());
  Eigen::RowVectorXd da(a.cols());
  Eigen::RowVectorXd db(a.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double w = dv[i] * pm(i, j);
      if (w == 0.0) continue;
      out.value += w * pair_loss(loss, a.row(i), t.row(j), da, db);
      out.d_prediction.row(i) += w * da;
      out.d_target.row(j) += w * db;
    }
  }
  return out;
}

double general_loss_value(const Representation& phi, const PredictorMatrix& pred,
                          const Representation& phi_target, const TransitionMatrix& p,
                          const DistributionVector& d, const LossSpec& loss) {
  loss.validate();
  if (pred.k() != phi.k() || phi_target.k() != phi.k() || phi_target.n() != phi.n())
    throw Error(ErrorKind::ShapeMismatch, "general_loss_value: shapes disagree");
  const Matrix a = phi.matrix() * pred.matrix();
  const Matrix& t = phi_target.matrix();
  require_shapes(a, t, p, d);
  Eigen::RowVectorXd da(a.cols());
  Eigen::RowVectorXd db(a.cols());
  double total = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.rows(); ++j) {
      const double w = d.values()[i] * p(i, j);
      if (w != 0.0) total += w * pair_loss(loss, a.row(i), t.row(j), da, db);
    }
  return total;
}

namespace {

struct BfgsResult {
  Vector x;
  Vector grad;
  long iterations = 0;
};

// BFGS with Armijo backtracking on a smooth function of a short vector.
// `eval(x, &grad)` returns the value and fills the gradient.
template <class Eval>
BfgsResult bfgs(Eval&& eval, Vector x, double grad_tol, long max_iters) {
  const Eigen::Index dim = x.size();
  Vector g(dim);
  double value = eval(x, &g);
  Matrix h_inv = Matrix::Identity(dim, dim);
  long iter = 0;
  int stalled = 0;  // consecutive steps that left the value unchanged to roundoff
  while (g.cwiseAbs().maxCoeff() > grad_tol && iter < max_iters && stalled < 50) {
    ++iter;
    Vector dir = -h_inv * g;
    double slope = g.dot(dir);
    if (!(slope < 0.0)) {
      h_inv.setIdentity();
      dir = -g;
      slope = -g.squaredNorm();
    }
    double step = 1.0;
    Vector x_new, g_new(dim);
    double v_new = value;
    bool accepted = false;
    while (step > 1e-20) {
      x_new = x + step * dir;
      v_new = eval(x_new, &g_new);
      if (v_new <= value + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (h_inv.isIdentity()) break;
      h_inv.setIdentity();
      continue;
    }
    const Vector s = x_new - x;
    const Vector y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-300) {
      const double rho = 1.0 / sy;
      const Matrix id = Matrix::Identity(dim, dim);
      h_inv = (id - rho * s * y.transpose()) * h_inv * (id - rho * y * s.transpose()) + rho * s * s.transpose();
    }
    stalled = value - v_new <= 1e-15 * (1.0 + std::abs(value)) ? stalled + 1 : 0;
    x = std::move(x_new);
    g = std::move(g_new);
    value = v_new;
  }
  return {std::move(x), std::move(g), iter};
}

// Newton refinement on the gradient alone, for when value differences have
// sunk below roundoff. The Hessian comes from central differences of `grad`;
// a step is kept only if it shrinks the largest gradient entry.
template <class Grad>
Vector polish(Grad&& grad, Vector x, double grad_tol, int max_rounds) {
  const Eigen::Index dim = x.size();
  Vector g = grad(x);
  for (int round = 0; round < max_rounds && g.cwiseAbs().maxCoeff() > grad_tol; ++round) {
    const double h = 1e-6 * std::max(1.0, x.norm());
    Matrix hess(dim, dim);
    for (Eigen::Index c = 0; c < dim; ++c) {
      Vector up = x, down = x;
      up[c] += h;
      down[c] -= h;
      hess.col(c) = (grad(up) - grad(down)) / (2.0 * h);
    }
    const Matrix sym = 0.5 * (hess + hess.transpose());
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(sym);
    cod.setThreshold(1e-10);
    const Vector delta = -(cod.pseudoInverse() * g);
    bool improved = false;
    for (double t = 1.0; t > 1e-4; t *= 0.5) {
      const Vector trial = x + t * delta;
      const Vector gt = grad(trial);
      if (gt.cwiseAbs().maxCoeff() < g.cwiseAbs().maxCoeff()) {
        x = trial;
        g = gt;
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  return x;
}

InnerSolution finish(const Matrix& phi, const Matrix& target, const TransitionMatrix& p,
                     const DistributionVector& d, const LossSpec& loss, Matrix pred, long iterations) {
  LossEvaluation eval = evaluate_loss(phi * pred, target, p, d, loss);
  InnerSolution out;
  out.grad_inf = (phi.transpose() * eval.d_prediction).cwiseAbs().maxCoeff();
  out.iterations = iterations;
  out.pred = PredictorMatrix(std::move(pred));
  out.d_prediction = std::move(eval.d_prediction);
  return out;
}

InnerSolution solve_smooth(const Matrix& phi, const Matrix& target, const TransitionMatrix& p,
                           const DistributionVector& d, const LossSpec& loss, const Matrix& start,
                           const InnerSolveOptions& options) {
  const Eigen::Index k = start.rows();
  auto shaped = [k](const Vector& v) { return Matrix(Eigen::Map<const Matrix>(v.data(), k, k)); };
  auto flat = [](const Matrix& m) { return Vector(Eigen::Map<const Vector>(m.data(), m.size())); };

  if (loss.kind == LossKind::Squared) {
    auto eval = [&](const Vector& x, Vector* g) {
      const LossEvaluation e = evaluate_loss(phi * shaped(x), target, p, d, loss);
      *g = flat(phi.transpose() * e.d_prediction);
      return e.value;
    };
    BfgsResult r = bfgs(eval, flat(start), options.grad_tol, options.max_iters);
    return finish(phi, target, p, d, loss, shaped(r.x), r.iterations);
  }

  // The regularized cosine loss depends on the predictor's scale only through
  // eps and decreases along rays where the predictions align with the targets.
  // Solve for the direction on the unit sphere, which must be stationary at
  // unit scale, then walk out along the ray until the full gradient meets the
  // tolerance.
  auto on_sphere = [&](const Vector& x, Vector* g) {
    const double norm = x.norm();
    const Vector unit = x / norm;
    const LossEvaluation e = evaluate_loss(phi * shaped(unit), target, p, d, loss);
    const Vector grad = flat(phi.transpose() * e.d_prediction);
    *g = (grad - unit * unit.dot(grad)) / norm;
    return e.value;
  };
  const double start_norm = start.norm();
  if (!(start_norm > 0.0)) throw Error(ErrorKind::InnerSolveFailure, "zero starting predictor");
  const double direction_tol = 1e-3 * options.grad_tol;
  BfgsResult r = bfgs(on_sphere, flat(start) / start_norm, direction_tol, options.max_iters);
  if (r.grad.cwiseAbs().maxCoeff() > direction_tol) {
    auto sphere_grad = [&](const Vector& x) {
      Vector g(x.size());
      on_sphere(x, &g);
      return g;
    };
    r.x = polish(sphere_grad, r.x / r.x.norm(), direction_tol, 30);
  }
  const Vector unit = r.x / r.x.norm();
  Vector tangential(unit.size());
  on_sphere(unit, &tangential);
  if (tangential.cwiseAbs().maxCoeff() > options.grad_tol)
    throw Error(ErrorKind::InnerSolveFailure,
                "no stationary predictor direction (max tangential |grad| = " +
                    std::to_string(tangential.cwiseAbs().maxCoeff()) + ")");
  double scale = 1.0;
  InnerSolution best = finish(phi, target, p, d, loss, shaped(unit), r.iterations);
  while (best.grad_inf > options.grad_tol && scale < 1e12) {
    scale *= 2.0;
    InnerSolution next = finish(phi, target, p, d, loss, shaped(scale * unit), r.iterations);
    if (next.grad_inf >= best.grad_inf) break;
    best = std::move(next);
  }
  return best;
}

struct Observation {
  Eigen::Index row;  // state i providing the design row phi_i
  double response;   // target entry T(j, c)
  double weight;     // d_i P_ij
};

struct LadColumn {
  Vector p;
  Vector d_prediction;  // dL/dA column with certified subgradients
  long iterations = 0;
};

// Exact weighted least-absolute-deviation fit of one predictor column.
LadColumn solve_lad_column(const Matrix& phi, const std::vector<Observation>& obs, Vector p,
                           long max_iters) {
  const Eigen::Index k = phi.cols();
  const auto m_count = static_cast<Eigen::Index>(obs.size());
  std::vector<Eigen::Index> active;
  Vector r(m_count);
  auto residuals = [&] {
    for (Eigen::Index m = 0; m < m_count; ++m)
      r[m] = phi.row(obs[m].row).dot(p) - obs[m].response;
  };
  auto is_active = [&](Eigen::Index m) {
    return std::find(active.begin(), active.end(), m) != active.end();
  };
  auto inactive_gradient = [&] {
    Vector g = Vector::Zero(k);
    for (Eigen::Index m = 0; m < m_count; ++m)
      if (!is_active(m)) g += obs[m].weight * sgn(r[m]) * phi.row(obs[m].row).transpose();
    return g;
  };

  Vector multipliers;
  long iter = 0;
  for (;; ++iter) {
    if (iter > max_iters)
      throw Error(ErrorKind::InnerSolveFailure, "l1 predictor solve did not terminate");
    residuals();
    if (static_cast<Eigen::Index>(active.size()) == k) {
      Matrix xa(k, k);
      Vector ya(k);
      for (Eigen::Index a = 0; a < k; ++a) {
        xa.row(a) = phi.row(obs[active[a]].row);
        ya[a] = obs[active[a]].response;
      }
      Eigen::FullPivLU<Matrix> lu(xa);
      if (!lu.isInvertible()) {
        active.pop_back();
        continue;
      }
      p = lu.solve(ya);
      residuals();
      Matrix m = xa.transpose();
      for (Eigen::Index a = 0; a < k; ++a) m.col(a) *= obs[active[a]].weight;
      multipliers = m.fullPivLu().solve(-inactive_gradient());
      Eigen::Index worst = 0;
      const double worst_abs = multipliers.cwiseAbs().maxCoeff(&worst);
      if (worst_abs <= 1.0 + 1e-10) break;
      active.erase(active.begin() + worst);
    }

    // Search direction inside the null space of the active rows.
    const auto na = static_cast<Eigen::Index>(active.size());
    Matrix basis;
    if (na == 0) {
      basis = Matrix::Identity(k, k);
    } else {
      Matrix xat(k, na);
      for (Eigen::Index a = 0; a < na; ++a) xat.col(a) = phi.row(obs[active[a]].row).transpose();
      Eigen::HouseholderQR<Matrix> qr(xat);
      const Matrix q = qr.householderQ();
      basis = q.rightCols(k - na);
    }
    const Vector g = inactive_gradient();
    Vector dir = -(basis * (basis.transpose() * g));
    if (dir.norm() <= 1e-14 * (g.norm() + 1.0)) dir = basis.col(0);

    struct Break {
      double t;
      double weight;
      Eigen::Index m;
    };
    std::vector<Break> breaks;
    double total = 0.0;
    for (Eigen::Index m = 0; m < m_count; ++m) {
      if (is_active(m)) continue;
      const double b = phi.row(obs[m].row).dot(dir);
      if (std::abs(b) <= 1e-15 * phi.row(obs[m].row).norm() * dir.norm()) continue;
      breaks.push_back({-r[m] / b, obs[m].weight * std::abs(b), m});
      total += breaks.back().weight;
    }
    if (breaks.empty())
      throw Error(ErrorKind::InnerSolveFailure, "l1 predictor solve found a flat direction");
    std::sort(breaks.begin(), breaks.end(), [](const Break& x, const Break& y) {
      return x.t < y.t || (x.t == y.t && x.m < y.m);
    });
    double cumulative = 0.0;
    const Break* median = &breaks.back();
    for (const auto& br : breaks) {
      cumulative += br.weight;
      if (cumulative >= 0.5 * total) {
        median = &br;
        break;
      }
    }
    p += median->t * dir;
    active.push_back(median->m);
  }

  LadColumn out;
  out.p = std::move(p);
  out.iterations = iter;
  out.d_prediction = Vector::Zero(phi.rows());
  for (Eigen::Index m = 0; m < m_count; ++m)
    if (!is_active(m)) out.d_prediction[obs[m].row] += obs[m].weight * sgn(r[m]);
  for (Eigen::Index a = 0; a < k; ++a)
    out.d_prediction[obs[active[a]].row] += obs[active[a]].weight * multipliers[a];
  return out;
}

}  // namespace

InnerSolution solve_predictor(const Matrix& phi, const Matrix& target, const TransitionMatrix& p,
                              const DistributionVector& d, const LossSpec& loss,
                              const Matrix* warm_start, const InnerSolveOptions& options) {
  loss.validate();
  if (phi.rows() != p.size() || target.rows() != p.size() || phi.cols() != target.cols())
    throw Error(ErrorKind::ShapeMismatch, "solve_predictor: shapes disagree");
  const Eigen::Index k = phi.cols();
  Matrix start = warm_start ? *warm_start
                            : least_squares_predictor(phi, target, p.entries(), d.values());
  if (start.rows() != k || start.cols() != k)
    throw Error(ErrorKind::ShapeMismatch, "solve_predictor: warm start has the wrong shape");

  InnerSolution out;
  if (loss.kind == LossKind::L1) {
    Matrix pred(k, k);
    out.d_prediction.resize(phi.rows(), k);
    for (Eigen::Index c = 0; c < k; ++c) {
      std::vector<Observation> obs;
      for (Eigen::Index i = 0; i < p.size(); ++i)
        for (Eigen::Index j = 0; j < p.size(); ++j) {
          const double w = d.values()[i] * p(i, j);
          if (w > 0.0) obs.push_back({i, target(j, c), w});
        }
      LadColumn col = solve_lad_column(phi, obs, start.col(c), options.max_iters);
      pred.col(c) = col.p;
      out.d_prediction.col(c) = col.d_prediction;
      out.iterations += col.iterations;
    }
    out.pred = PredictorMatrix(std::move(pred));
    out.grad_inf = (phi.transpose() * out.d_prediction).cwiseAbs().maxCoeff();
  } else {
    out = solve_smooth(phi, target, p, d, loss, start, options);
  }
  if (!(out.grad_inf <= options.grad_tol))
    throw Error(ErrorKind::InnerSolveFailure,
                "predictor stationarity not reached (max |grad| = " + std::to_string(out.grad_inf) + ")");
  return out;
}

}  // namespace spl
