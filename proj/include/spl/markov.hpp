#pragma once

#include "spl/linalg.hpp"

#include <cstdint>
#include <optional>

namespace spl {

/// Row-stochastic n x n matrix with structural flags computed at construction.
class TransitionMatrix {
 public:
  /// Validates non-negativity and unit row sums within `tol`; the symmetric
  /// and doubly-stochastic flags are derived with the same tolerance.
  static TransitionMatrix from_matrix(Matrix entries, double tol = 1e-12);

  const Matrix& entries() const noexcept { return entries_; }
  Eigen::Index size() const noexcept { return entries_.rows(); }
  bool is_symmetric() const noexcept { return symmetric_; }
  bool is_doubly_stochastic() const noexcept { return doubly_stochastic_; }

  double operator()(Eigen::Index i, Eigen::Index j) const { return entries_(i, j); }

 private:
  TransitionMatrix(Matrix entries, bool symmetric, bool doubly_stochastic)
      : entries_(std::move(entries)),
        symmetric_(symmetric),
        doubly_stochastic_(doubly_stochastic) {}

  Matrix entries_;
  bool symmetric_ = false;
  bool doubly_stochastic_ = false;
};

/// Probability vector over states (the first-state distribution d).
class DistributionVector {
 public:
  static DistributionVector uniform(Eigen::Index n);
  static DistributionVector from_vector(Vector probabilities, double tol = 1e-12);

  const Vector& values() const noexcept { return values_; }
  Eigen::Index size() const noexcept { return values_.size(); }
  bool is_uniform() const noexcept { return uniform_; }

 private:
  DistributionVector(Vector values, bool uniform) : values_(std::move(values)), uniform_(uniform) {}

  Vector values_;
  bool uniform_ = false;
};

enum class SpectralKind { Eigen, Svd };

/// Canonically ordered decomposition: descending |value|, ties by descending
/// signed value then lowest original index. Eigen kind: left == right, first
/// non-negligible component of every vector positive. Svd kind: the sign is
/// fixed on each left vector and carried to its right partner so that
/// P v_i = sigma_i u_i holds.
struct SpectralSummary {
  SpectralKind kind = SpectralKind::Eigen;
  Vector values;
  Matrix left;
  Matrix right;
};

SpectralSummary spectral(const TransitionMatrix& p, SpectralKind kind);

struct SinkhornOptions {
  double tol = 1e-12;
  long max_iters = 100000;
};

struct SinkhornResult {
  TransitionMatrix matrix;
  long iterations = 0;
};

/// Alternating row then column normalization until every row and column sum
/// is within `tol` of one. Zero entries are allowed, negative entries and
/// empty rows/columns are rejected.
SinkhornResult sinkhorn_normalize(const Matrix& m, const SinkhornOptions& options = {});

/// alpha in [0, 1]; std::nullopt draws alpha ~ Uniform(0, 1).
using MixingWeight = std::optional<double>;

/// alpha * Sinkhorn(U) + (1 - alpha) * Perm from one Rng(seed) stream, in this
/// order: n*n Uniform(0,1) entries of U (row-major), one uniform for alpha
/// (always consumed, used only when alpha is random), then a Fisher-Yates
/// permutation; Perm(i, perm[i]) = 1.
TransitionMatrix gen_doubly_stochastic(Eigen::Index n, std::uint64_t seed,
                                       MixingWeight alpha = std::nullopt);

/// (G + G^T) / 2 with G = gen_doubly_stochastic(n, seed, random alpha).
TransitionMatrix gen_symmetric(Eigen::Index n, std::uint64_t seed);

TransitionMatrix permutation_matrix(std::span<const std::size_t> perm);

/// [[0.1, 0.9], [0.9, 0.1]]: symmetric, eigenvalues 1 and -0.8.
TransitionMatrix fixed_example_2x2();

/// [[0, 1/2, 1/2], [0, 1/2, 1/2], [1, 0, 0]]: doubly stochastic, with very
/// different top left and right singular vectors.
TransitionMatrix fixed_example_3x3();

/// P^steps by repeated squaring. Throws InvalidInput for steps == 0.
TransitionMatrix n_step_matrix(const TransitionMatrix& p, int steps);

}  // namespace spl
