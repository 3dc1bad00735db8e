#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace spl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Dense decompositions for small matrices (n up to a few hundred). Results are
// returned in the order the algorithm leaves them; callers that need a
// canonical order go through canonical_order().

struct SymmetricEigen {
  Vector values;
  Matrix vectors;  // column i pairs with values[i]
  int sweeps = 0;
};

/// Cyclic Jacobi rotations. Throws InvalidInput for non-square input and
/// NonConvergence if the off-diagonal mass does not vanish within 100 sweeps.
SymmetricEigen symmetric_eigen(const Matrix& a);

struct SingularDecomposition {
  Vector values;  // >= 0
  Matrix left;    // a * right.col(i) = values[i] * left.col(i)
  Matrix right;
  int sweeps = 0;
};

/// One-sided (Hestenes) Jacobi applied to the rows of `a`: the columns of
/// a^T are rotated until mutually orthogonal, the accumulated rotation is the
/// left factor and the normalized rotated columns are the right factor.
/// Right vectors whose singular value is at roundoff level are completed to
/// an orthonormal basis by Gram-Schmidt against the standard basis.
SingularDecomposition jacobi_svd(const Matrix& a);

/// Ordering of `values` by descending magnitude; entries whose magnitudes
/// agree within `tie_tol` are ordered by descending signed value and then by
/// lowest original index.
std::vector<std::size_t> canonical_order(std::span<const double> values,
                                         double tie_tol);

/// Sign that makes the first component with |x_i| > tol positive.
double leading_sign(const Eigen::Ref<const Vector>& v, double tol = 1e-12);

/// Pseudo-inverse of a symmetric matrix, dropping eigenvalues whose magnitude
/// is below rel_cutoff * (largest magnitude). Throws DegenerateCovariance when
/// every eigenvalue is negligible.
Matrix symmetric_pinv(const Matrix& s, double rel_cutoff = 1e-12);

/// Modified Gram-Schmidt with one re-orthogonalization pass. Throws
/// InvalidInput when the columns are numerically dependent.
Matrix orthonormalize_columns(const Matrix& a);

}  // namespace spl
