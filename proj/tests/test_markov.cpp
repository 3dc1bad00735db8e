#include "spl/error.hpp"
#include "spl/markov.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace spl;
using namespace spl::testing;

namespace {

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::IoError;
}

}  // namespace

TEST(TransitionMatrix, FlagsFollowStructure) {
  const TransitionMatrix two = fixed_example_2x2();
  EXPECT_TRUE(two.is_symmetric());
  EXPECT_TRUE(two.is_doubly_stochastic());
  const TransitionMatrix three = fixed_example_3x3();
  EXPECT_FALSE(three.is_symmetric());
  EXPECT_TRUE(three.is_doubly_stochastic());
  Matrix m(2, 2);
  m << 0.5, 0.5, 1.0, 0.0;
  const TransitionMatrix plain = TransitionMatrix::from_matrix(m);
  EXPECT_FALSE(plain.is_symmetric());
  EXPECT_FALSE(plain.is_doubly_stochastic());
}

TEST(TransitionMatrix, RejectsBadInput) {
  Matrix neg(2, 2);
  neg << 1.5, -0.5, 0.5, 0.5;
  EXPECT_EQ(kind_of([&] { TransitionMatrix::from_matrix(neg); }), ErrorKind::InvalidInput);
  Matrix rows(2, 2);
  rows << 0.5, 0.4, 0.5, 0.5;
  EXPECT_EQ(kind_of([&] { TransitionMatrix::from_matrix(rows); }), ErrorKind::InvalidInput);
  EXPECT_THROW(TransitionMatrix::from_matrix(Matrix::Zero(2, 3)), Error);
}

TEST(DistributionVector, UniformAndValidation) {
  const DistributionVector d = DistributionVector::uniform(4);
  EXPECT_TRUE(d.is_uniform());
  EXPECT_DOUBLE_EQ(d.values().sum(), 1.0);
  Vector v(3);
  v << 0.2, 0.3, 0.5;
  EXPECT_FALSE(DistributionVector::from_vector(v).is_uniform());
  v << 0.2, 0.3, 0.6;
  EXPECT_THROW(DistributionVector::from_vector(v), Error);
  v << -0.1, 0.6, 0.5;
  EXPECT_THROW(DistributionVector::from_vector(v), Error);
}

TEST(Spectral, TwoStateExample) {
  const SpectralSummary s = spectral(fixed_example_2x2(), SpectralKind::Eigen);
  EXPECT_NEAR(s.values(0), 1.0, 1e-15);
  EXPECT_NEAR(s.values(1), -0.8, 1e-15);
  const double r = 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(s.left(0, 0), r, 1e-15);
  EXPECT_NEAR(s.left(1, 0), r, 1e-15);
  EXPECT_NEAR(s.left(0, 1), r, 1e-15);
  EXPECT_NEAR(s.left(1, 1), -r, 1e-15);
  EXPECT_EQ(s.left, s.right);
}

TEST(Spectral, ThreeStateExampleTopSingularPair) {
  const SpectralSummary s = spectral(fixed_example_3x3(), SpectralKind::Svd);
  EXPECT_NEAR(s.values(0), 1.0, 1e-12);
  EXPECT_NEAR(s.values(1), 1.0, 1e-12);
  EXPECT_NEAR(s.values(2), 0.0, 1e-12);
  const double r = 1.0 / std::sqrt(2.0);
  Vector u(3), v(3);
  u << r, r, 0.0;
  v << 0.0, r, r;
  EXPECT_LT((s.left.col(0) - u).norm(), 1e-12);
  EXPECT_LT((s.right.col(0) - v).norm(), 1e-12);
  const Matrix p = fixed_example_3x3().entries();
  EXPECT_LT((p * s.right - s.left * s.values.asDiagonal()).norm(), 1e-12);
}

TEST(Spectral, EigenKindNeedsSymmetry) {
  EXPECT_EQ(kind_of([] { spectral(fixed_example_3x3(), SpectralKind::Eigen); }), ErrorKind::NotSymmetric);
}

TEST(Spectral, RandomSymmetricIsOrderedAndSigned) {
  const TransitionMatrix p = gen_symmetric(20, 5);
  const SpectralSummary s = spectral(p, SpectralKind::Eigen);
  EXPECT_NEAR(s.values(0), 1.0, 1e-12);
  for (Eigen::Index i = 1; i < s.values.size(); ++i)
    EXPECT_GE(std::abs(s.values(i - 1)), std::abs(s.values(i)) - 1e-12);
  for (Eigen::Index i = 0; i < s.left.cols(); ++i) {
    Eigen::Index first = 0;
    while (std::abs(s.left(first, i)) <= 1e-12) ++first;
    EXPECT_GT(s.left(first, i), 0.0);
  }
  EXPECT_LT((p.entries() * s.left - s.left * s.values.asDiagonal()).norm(), 1e-12);
}

TEST(Sinkhorn, IdentityNeedsNoPasses) {
  const SinkhornResult r = sinkhorn_normalize(Matrix::Identity(3, 3));
  EXPECT_EQ(r.iterations, 0);
  EXPECT_EQ(r.matrix.entries(), Matrix::Identity(3, 3));
  EXPECT_TRUE(r.matrix.is_doubly_stochastic());
}

TEST(Sinkhorn, OnesBecomeHalves) {
  const SinkhornResult r = sinkhorn_normalize(Matrix::Ones(2, 2));
  EXPECT_EQ(r.matrix.entries(), Matrix::Constant(2, 2, 0.5));
}

TEST(Sinkhorn, MatchesAlternatingNormalizationGolden) {
  const auto golden = load_json("sinkhorn_seed7_n20.json");
  Rng rng(7);
  Matrix u(20, 20);
  for (Eigen::Index i = 0; i < 20; ++i)
    for (Eigen::Index j = 0; j < 20; ++j) u(i, j) = rng.uniform();
  const SinkhornResult r = sinkhorn_normalize(u);
  EXPECT_EQ(r.iterations, golden["iterations"].get<long>());
  EXPECT_LT((r.matrix.entries() - matrix_from_json(golden["matrix"])).cwiseAbs().maxCoeff(), 1e-15);
  const Matrix& x = r.matrix.entries();
  EXPECT_LE((x.rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-12);
  EXPECT_LE((x.colwise().sum().array() - 1.0).abs().maxCoeff(), 1e-12);
}

TEST(Sinkhorn, Errors) {
  Matrix neg = Matrix::Ones(2, 2);
  neg(0, 1) = -1.0;
  EXPECT_EQ(kind_of([&] { sinkhorn_normalize(neg); }), ErrorKind::InvalidInput);
  Matrix empty_row = Matrix::Ones(2, 2);
  empty_row.row(1).setZero();
  EXPECT_EQ(kind_of([&] { sinkhorn_normalize(empty_row); }), ErrorKind::InvalidInput);
  Rng rng(1);
  const Matrix u = gaussian(rng, 6, 6).cwiseAbs();
  EXPECT_EQ(kind_of([&] { sinkhorn_normalize(u, {1e-12, 1}); }), ErrorKind::NonConvergence);
}

TEST(Generators, DoublyStochasticMatchesGolden) {
  const auto golden = load_json("doubly_stochastic_seed11_n20.json");
  const TransitionMatrix p = gen_doubly_stochastic(20, 11);
  EXPECT_LT((p.entries() - matrix_from_json(golden["matrix"])).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_TRUE(p.is_doubly_stochastic());
}

TEST(Generators, SymmetricMatchesGolden) {
  const auto golden = load_json("symmetric_seed3_n20.json");
  const TransitionMatrix p = gen_symmetric(20, 3);
  EXPECT_LT((p.entries() - matrix_from_json(golden["matrix"])).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_TRUE(p.is_symmetric());
  EXPECT_TRUE(p.is_doubly_stochastic());
}

TEST(Generators, AlphaEndpoints) {
  const TransitionMatrix pure = gen_doubly_stochastic(6, 21, 0.0);
  for (Eigen::Index i = 0; i < 6; ++i) {
    EXPECT_EQ(pure.entries().row(i).maxCoeff(), 1.0);
    EXPECT_EQ((pure.entries().row(i).array() == 0.0).count(), 5);
  }
  Rng rng(21);
  Matrix u(6, 6);
  for (Eigen::Index i = 0; i < 6; ++i)
    for (Eigen::Index j = 0; j < 6; ++j) u(i, j) = rng.uniform();
  EXPECT_EQ(gen_doubly_stochastic(6, 21, 1.0).entries(), sinkhorn_normalize(u).matrix.entries());
  EXPECT_THROW(gen_doubly_stochastic(6, 21, 1.5), Error);
  EXPECT_THROW(gen_doubly_stochastic(1, 21), Error);
}

TEST(Generators, PermutationMatrix) {
  const std::vector<std::size_t> perm = {2, 0, 1};
  const TransitionMatrix p = permutation_matrix(perm);
  EXPECT_EQ(p(0, 2), 1.0);
  EXPECT_EQ(p(1, 0), 1.0);
  EXPECT_EQ(p(2, 1), 1.0);
  EXPECT_TRUE(p.is_doubly_stochastic());
}

TEST(NStep, SquaringTwoStateExample) {
  Matrix expected(2, 2);
  expected << 0.82, 0.18, 0.18, 0.82;
  EXPECT_LT((n_step_matrix(fixed_example_2x2(), 2).entries() - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(NStep, MatchesRepeatedMultiplication) {
  const TransitionMatrix p = gen_doubly_stochastic(8, 4);
  Matrix naive = Matrix::Identity(8, 8);
  for (int s = 1; s <= 7; ++s) {
    naive = naive * p.entries();
    EXPECT_LT((n_step_matrix(p, s).entries() - naive).cwiseAbs().maxCoeff(), 1e-14);
  }
  EXPECT_EQ(n_step_matrix(p, 1).entries(), p.entries());
  EXPECT_THROW(n_step_matrix(p, 0), Error);
}
