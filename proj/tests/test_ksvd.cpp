#include <gtest/gtest.h>

#include "batchdl/batch_svd.hpp"
#include "oracles.hpp"

using namespace batchdl;

TEST(Ksvd, SparseColumnsInOrthonormalBasis) {
  Rng rng(1);
  const DenseMatrix a0 = oracle::orthonormal(6, rng);
  DenseMatrix xs = DenseMatrix::Zero(6, 25);
  for (Index j = 0; j < 25; ++j) {
    xs(static_cast<Index>(rng.uniform_index(6)), j) = 1.0 + rng.uniform01();
    xs(static_cast<Index>(rng.uniform_index(6)), j) = -1.0 - rng.uniform01();
  }
  const DenseMatrix y = a0 * xs;
  const KsvdResult res = ksvd(y, a0, 2, 1);
  EXPECT_LE(res.trace.back(), 1e-20 * y.squaredNorm());
  EXPECT_LE(objective(y, res.a, res.x), 1e-20 * y.squaredNorm());
  EXPECT_LE(res.x.nnz(), 50U);
}

TEST(Ksvd, CompleteBasis) {
  Rng rng(2);
  const DenseMatrix a0 = oracle::orthonormal(5, rng);
  const DenseMatrix y = oracle::gaussian(5, 12, rng);
  const KsvdResult res = ksvd(y, a0, 5, 3);
  EXPECT_LE(objective(y, res.a, res.x), 1e-20 * y.squaredNorm());
}

TEST(Ksvd, PerSampleBudgetAndUnitAtoms) {
  Rng rng(3);
  const DenseMatrix y = oracle::gaussian(6, 40, rng);
  const DenseMatrix a0 = oracle::unit_columns(6, 10, rng);
  const KsvdResult res = ksvd(y, a0, 3, 5);
  for (Index j = 0; j < 40; ++j) EXPECT_LE(res.x.column_support(j).size(), 3U);
  for (Index i = 0; i < 10; ++i) EXPECT_NEAR(res.a.col(i).norm(), 1.0, 1e-10);
  EXPECT_EQ(res.trace.size(), 10U);
  EXPECT_LE(res.trace.back(), y.squaredNorm());
}

TEST(Ksvd, Preconditions) {
  const DenseMatrix a = DenseMatrix::Identity(3, 3);
  EXPECT_THROW(ksvd(DenseMatrix::Ones(3, 4), a, 4, 1), InvalidArgument);
  EXPECT_THROW(ksvd(DenseMatrix::Ones(3, 4), a, 1, 0), InvalidArgument);
  EXPECT_THROW(ksvd(DenseMatrix::Ones(2, 4), a, 1, 1), InvalidArgument);
}
