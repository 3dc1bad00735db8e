#include "spl/linalg.hpp"

#include "spl/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace spl {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr int kMaxSweeps = 100;

double off_diagonal_norm2(const Matrix& a) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      if (i != j) s += a(i, j) * a(i, j);
  return s;
}

}  // namespace

SymmetricEigen symmetric_eigen(const Matrix& input) {
  if (input.rows() != input.cols())
    throw Error(ErrorKind::InvalidInput, "symmetric_eigen: matrix is not square");
  const Eigen::Index n = input.rows();
  Matrix a = 0.5 * (input + input.transpose());
  Matrix v = Matrix::Identity(n, n);
  const double scale2 = a.squaredNorm();

  SymmetricEigen out;
  if (n == 0 || scale2 == 0.0) {
    out.values = a.diagonal();
    out.vectors = v;
    return out;
  }

  const double target = kEps * kEps * scale2 * 1e-2;
  int sweep = 0;
  while (off_diagonal_norm2(a) > target) {
    if (++sweep > kMaxSweeps)
      throw Error(ErrorKind::NonConvergence, "symmetric_eigen: Jacobi sweeps exhausted");
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        // a <- J^T a J with J the (p, q) rotation [c s; -s c].
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  out.values = a.diagonal();
  out.vectors = std::move(v);
  out.sweeps = sweep;
  return out;
}

SingularDecomposition jacobi_svd(const Matrix& a) {
  if (a.rows() != a.cols())
    throw Error(ErrorKind::InvalidInput, "jacobi_svd: matrix is not square");
  const Eigen::Index n = a.rows();
  Matrix w = a.transpose();
  Matrix j = Matrix::Identity(n, n);

  int sweep = 0;
  for (bool rotated = true; rotated;) {
    rotated = false;
    if (++sweep > kMaxSweeps)
      throw Error(ErrorKind::NonConvergence, "jacobi_svd: Jacobi sweeps exhausted");
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double alpha = w.col(p).squaredNorm();
        const double beta = w.col(q).squaredNorm();
        const double gamma = w.col(p).dot(w.col(q));
        if (gamma == 0.0 || std::abs(gamma) <= kEps * std::sqrt(alpha * beta))
          continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double wp = w(k, p);
          const double wq = w(k, q);
          w(k, p) = c * wp - s * wq;
          w(k, q) = s * wp + c * wq;
          const double jp = j(k, p);
          const double jq = j(k, q);
          j(k, p) = c * jp - s * jq;
          j(k, q) = s * jp + c * jq;
        }
      }
    }
  }

  SingularDecomposition out;
  out.values.resize(n);
  out.right.setZero(n, n);
  double largest = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values[i] = w.col(i).norm();
    largest = std::max(largest, out.values[i]);
  }
  const double negligible = std::max(largest, 1.0) * static_cast<double>(n) * kEps;
  std::vector<Eigen::Index> missing;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (out.values[i] > negligible) {
      out.right.col(i) = w.col(i) / out.values[i];
    } else {
      missing.push_back(i);
    }
  }
  // Complete the right basis for the (numerically) zero singular values.
  Eigen::Index candidate = 0;
  for (const Eigen::Index i : missing) {
    for (; candidate < n; ++candidate) {
      Vector e = Vector::Unit(n, candidate);
      for (int pass = 0; pass < 2; ++pass)
        for (Eigen::Index c = 0; c < n; ++c)
          if (c != i && out.right.col(c).squaredNorm() > 0.0)
            e -= out.right.col(c).dot(e) * out.right.col(c);
      const double norm = e.norm();
      if (norm > 0.5) {
        out.right.col(i) = e / norm;
        ++candidate;
        break;
      }
    }
    if (out.right.col(i).squaredNorm() == 0.0)
      throw Error(ErrorKind::NonConvergence, "jacobi_svd: basis completion failed");
  }
  out.left = std::move(j);
  out.sweeps = sweep;
  return out;
}

std::vector<std::size_t> canonical_order(std::span<const double> values, double tie_tol) {
  std::vector<std::size_t> remaining(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) remaining[i] = i;
  std::vector<std::size_t> order;
  order.reserve(values.size());
  while (!remaining.empty()) {
    double top_abs = -1.0;
    for (const auto i : remaining) top_abs = std::max(top_abs, std::abs(values[i]));
    double top_signed = -std::numeric_limits<double>::infinity();
    for (const auto i : remaining)
      if (std::abs(values[i]) >= top_abs - tie_tol) top_signed = std::max(top_signed, values[i]);
    // `remaining` is kept in index order, so the first hit is the lowest index.
    auto pick = remaining.end();
    for (auto it = remaining.begin(); it != remaining.end(); ++it) {
      const double v = values[*it];
      if (std::abs(v) >= top_abs - tie_tol && v >= top_signed - tie_tol) {
        pick = it;
        break;
      }
    }
    order.push_back(*pick);
    remaining.erase(pick);
  }
  return order;
}

double leading_sign(const Eigen::Ref<const Vector>& v, double tol) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > tol) return v[i] > 0.0 ? 1.0 : -1.0;
  }
  return 1.0;
}

Matrix symmetric_pinv(const Matrix& s, double rel_cutoff) {
  const Eigen::Index k = s.rows();
  if (k != s.cols()) throw Error(ErrorKind::ShapeMismatch, "symmetric_pinv: matrix is not square");
  if (!s.allFinite())
    throw Error(ErrorKind::DegenerateCovariance, "symmetric_pinv: non-finite covariance");
  if (k == 1) {
    const double x = s(0, 0);
    if (std::abs(x) <= std::numeric_limits<double>::min())
      throw Error(ErrorKind::DegenerateCovariance, "symmetric_pinv: covariance is zero");
    return Matrix::Constant(1, 1, 1.0 / x);
  }
  const SymmetricEigen eig = symmetric_eigen(s);
  const double largest = eig.values.cwiseAbs().maxCoeff();
  if (!(largest > std::numeric_limits<double>::min()))
    throw Error(ErrorKind::DegenerateCovariance, "symmetric_pinv: covariance is zero");
  Matrix out = Matrix::Zero(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const double lambda = eig.values[i];
    if (std::abs(lambda) < rel_cutoff * largest) continue;
    out.noalias() += (1.0 / lambda) * eig.vectors.col(i) * eig.vectors.col(i).transpose();
  }
  return out;
}

Matrix orthonormalize_columns(const Matrix& a) {
  Matrix q = a;
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    const double original = q.col(j).norm();
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index i = 0; i < j; ++i) q.col(j) -= q.col(i).dot(q.col(j)) * q.col(i);
    const double norm = q.col(j).norm();
    if (!(norm > 1e-10 * std::max(original, std::numeric_limits<double>::min())))
      throw Error(ErrorKind::InvalidInput, "orthonormalize_columns: columns are dependent");
    q.col(j) /= norm;
  }
  return q;
}

}  // namespace spl
