#include "spl/markov.hpp"

#include "spl/error.hpp"
#include "spl/rng.hpp"

#include <cmath>
#include <string>

namespace spl {

namespace {

double max_row_deviation(const Matrix& m) {
  return (m.rowwise().sum().array() - 1.0).abs().maxCoeff();
}

double max_col_deviation(const Matrix& m) {
  return (m.colwise().sum().array() - 1.0).abs().maxCoeff();
}

}  // namespace

TransitionMatrix TransitionMatrix::from_matrix(Matrix entries, double tol) {
  if (entries.rows() != entries.cols() || entries.rows() == 0)
    throw Error(ErrorKind::InvalidInput, "transition matrix must be square and non-empty");
  if (!entries.allFinite())
    throw Error(ErrorKind::InvalidInput, "transition matrix has non-finite entries");
  if (entries.minCoeff() < 0.0)
    throw Error(ErrorKind::InvalidInput, "transition matrix has negative entries");
  const double row_dev = max_row_deviation(entries);
  if (row_dev > tol)
    throw Error(ErrorKind::InvalidInput,
                "transition matrix rows do not sum to 1 (max deviation " + std::to_string(row_dev) + ")");
  const bool symmetric = (entries - entries.transpose()).cwiseAbs().maxCoeff() <= tol;
  const bool doubly = max_col_deviation(entries) <= tol;
  return TransitionMatrix(std::move(entries), symmetric, doubly);
}

DistributionVector DistributionVector::uniform(Eigen::Index n) {
  if (n <= 0) throw Error(ErrorKind::InvalidInput, "distribution size must be positive");
  return DistributionVector(Vector::Constant(n, 1.0 / static_cast<double>(n)), true);
}

DistributionVector DistributionVector::from_vector(Vector probabilities, double tol) {
  if (probabilities.size() == 0 || !probabilities.allFinite() || probabilities.minCoeff() < 0.0)
    throw Error(ErrorKind::InvalidInput, "distribution entries must be finite and non-negative");
  if (std::abs(probabilities.sum() - 1.0) > tol)
    throw Error(ErrorKind::InvalidInput, "distribution does not sum to 1");
  const double u = 1.0 / static_cast<double>(probabilities.size());
  const bool uniform = (probabilities.array() - u).abs().maxCoeff() == 0.0;
  return DistributionVector(std::move(probabilities), uniform);
}

SpectralSummary spectral(const TransitionMatrix& p, SpectralKind kind) {
  SpectralSummary out;
  out.kind = kind;
  const Eigen::Index n = p.size();
  if (kind == SpectralKind::Eigen) {
    if (!p.is_symmetric())
      throw Error(ErrorKind::NotSymmetric, "eigen decomposition requires a symmetric matrix");
    const SymmetricEigen eig = symmetric_eigen(p.entries());
    const double scale = std::max(1.0, eig.values.cwiseAbs().maxCoeff());
    const auto order = canonical_order({eig.values.data(), static_cast<std::size_t>(n)}, 1e-10 * scale);
    out.values.resize(n);
    out.left.resize(n, n);
    for (Eigen::Index c = 0; c < n; ++c) {
      const auto src = static_cast<Eigen::Index>(order[c]);
      out.values[c] = eig.values[src];
      out.left.col(c) = leading_sign(eig.vectors.col(src)) * eig.vectors.col(src);
    }
    out.right = out.left;
    return out;
  }

  const SingularDecomposition svd = jacobi_svd(p.entries());
  const double scale = std::max(1.0, svd.values.maxCoeff());
  const auto order = canonical_order({svd.values.data(), static_cast<std::size_t>(n)}, 1e-10 * scale);
  out.values.resize(n);
  out.left.resize(n, n);
  out.right.resize(n, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    const auto src = static_cast<Eigen::Index>(order[c]);
    const double sign = leading_sign(svd.left.col(src));
    out.values[c] = svd.values[src];
    out.left.col(c) = sign * svd.left.col(src);
    out.right.col(c) = sign * svd.right.col(src);
  }
  return out;
}

SinkhornResult sinkhorn_normalize(const Matrix& m, const SinkhornOptions& options) {
  if (m.rows() != m.cols() || m.rows() == 0)
    throw Error(ErrorKind::InvalidInput, "sinkhorn: matrix must be square and non-empty");
  if (!(options.tol > 0.0)) throw Error(ErrorKind::InvalidInput, "sinkhorn: tol must be positive");
  if (!m.allFinite() || m.minCoeff() < 0.0)
    throw Error(ErrorKind::InvalidInput, "sinkhorn: entries must be finite and non-negative");
  if (m.rowwise().sum().minCoeff() <= 0.0 || m.colwise().sum().minCoeff() <= 0.0)
    throw Error(ErrorKind::InvalidInput, "sinkhorn: every row and column needs a positive entry");

  Matrix x = m;
  long iter = 0;
  while (std::max(max_row_deviation(x), max_col_deviation(x)) > options.tol) {
    if (iter == options.max_iters)
      throw Error(ErrorKind::NonConvergence, "sinkhorn: iteration budget exhausted");
    for (Eigen::Index i = 0; i < x.rows(); ++i) x.row(i) /= x.row(i).sum();
    for (Eigen::Index j = 0; j < x.cols(); ++j) x.col(j) /= x.col(j).sum();
    ++iter;
  }
  return {TransitionMatrix::from_matrix(std::move(x), options.tol), iter};
}

TransitionMatrix permutation_matrix(std::span<const std::size_t> perm) {
  const auto n = static_cast<Eigen::Index>(perm.size());
  Matrix m = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (perm[i] >= perm.size()) throw Error(ErrorKind::InvalidInput, "permutation index out of range");
    m(i, static_cast<Eigen::Index>(perm[i])) = 1.0;
  }
  return TransitionMatrix::from_matrix(std::move(m));
}

TransitionMatrix gen_doubly_stochastic(Eigen::Index n, std::uint64_t seed, MixingWeight alpha) {
  if (n < 2) throw Error(ErrorKind::InvalidInput, "gen_doubly_stochastic: n must be at least 2");
  if (alpha && !(*alpha >= 0.0 && *alpha <= 1.0))
    throw Error(ErrorKind::InvalidInput, "gen_doubly_stochastic: alpha must lie in [0, 1]");
  Rng rng(seed);
  Matrix u(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) u(i, j) = rng.uniform();
  const double drawn_alpha = rng.uniform();
  const double a = alpha.value_or(drawn_alpha);
  const auto perm = rng.permutation(static_cast<std::size_t>(n));

  Matrix mixed = a * sinkhorn_normalize(u).matrix.entries();
  for (Eigen::Index i = 0; i < n; ++i) mixed(i, static_cast<Eigen::Index>(perm[i])) += 1.0 - a;
  return TransitionMatrix::from_matrix(std::move(mixed));
}

TransitionMatrix gen_symmetric(Eigen::Index n, std::uint64_t seed) {
  if (n < 2) throw Error(ErrorKind::InvalidInput, "gen_symmetric: n must be at least 2");
  const TransitionMatrix base = gen_doubly_stochastic(n, seed);
  const Matrix& g = base.entries();
  Matrix sym = (g + g.transpose()) / 2.0;
  return TransitionMatrix::from_matrix(std::move(sym));
}

TransitionMatrix fixed_example_2x2() {
  Matrix m(2, 2);
  m << 0.1, 0.9,
       0.9, 0.1;
  return TransitionMatrix::from_matrix(std::move(m));
}

TransitionMatrix fixed_example_3x3() {
  Matrix m(3, 3);
  m << 0.0, 0.5, 0.5,
       0.0, 0.5, 0.5,
       1.0, 0.0, 0.0;
  return TransitionMatrix::from_matrix(std::move(m));
}

TransitionMatrix n_step_matrix(const TransitionMatrix& p, int steps) {
  if (steps < 1) throw Error(ErrorKind::InvalidInput, "n_step_matrix: steps must be >= 1");
  Matrix result = Matrix::Identity(p.size(), p.size());
  Matrix base = p.entries();
  bool first = true;
  for (int e = steps; e > 0; e >>= 1) {
    if (e & 1) {
      result = first ? base : Matrix(result * base);
      first = false;
    }
    if (e > 1) base = base * base;
  }
  return TransitionMatrix::from_matrix(std::move(result), 1e-10);
}

}  // namespace spl
