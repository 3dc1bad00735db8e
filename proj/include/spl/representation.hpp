#pragma once

#include "spl/error.hpp"
#include "spl/linalg.hpp"

#include <cstdint>

namespace spl {

/// n x k representation matrix; column j is the j-th representation vector.
class Representation {
 public:
  Representation() = default;
  explicit Representation(Matrix columns) : columns_(std::move(columns)) {
    if (columns_.cols() > columns_.rows() || columns_.cols() == 0)
      throw Error(ErrorKind::ShapeMismatch, "representation must be n x k with 1 <= k <= n");
  }

  const Matrix& matrix() const noexcept { return columns_; }
  Eigen::Index n() const noexcept { return columns_.rows(); }
  Eigen::Index k() const noexcept { return columns_.cols(); }

 private:
  Matrix columns_;
};

/// k x k latent prediction matrix.
class PredictorMatrix {
 public:
  PredictorMatrix() = default;
  explicit PredictorMatrix(Matrix values) : values_(std::move(values)) {
    if (values_.rows() != values_.cols())
      throw Error(ErrorKind::ShapeMismatch, "predictor must be square");
  }

  const Matrix& matrix() const noexcept { return values_; }
  Eigen::Index k() const noexcept { return values_.rows(); }

 private:
  Matrix values_;
};

/// Left (forward) and right (backward) representations of the bidirectional
/// dynamics.
struct BidirState {
  Representation left;
  Representation right;

  BidirState(Representation l, Representation r) : left(std::move(l)), right(std::move(r)) {
    if (left.n() != right.n() || left.k() != right.k())
      throw Error(ErrorKind::ShapeMismatch, "left and right representations differ in shape");
  }
};

/// Orthonormalized n x k i.i.d. standard Gaussian matrix drawn from
/// Rng(seed), filled column by column. Throws InvalidInput when k > n.
Representation orthonormal_init(Eigen::Index n, Eigen::Index k, std::uint64_t seed);

}  // namespace spl
