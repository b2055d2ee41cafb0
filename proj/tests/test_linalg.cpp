#include <gtest/gtest.h>

#include "batchdl/linalg.hpp"
#include "batchdl/sparse_coeff.hpp"
#include "oracles.hpp"

using namespace batchdl;

TEST(LeastSquares, IdentitySystem) {
  const Vector x = least_squares(DenseMatrix::Identity(2, 2), Vector{{3.0, -1.0}});
  EXPECT_DOUBLE_EQ(x(0), 3.0);
  EXPECT_DOUBLE_EQ(x(1), -1.0);
}

TEST(LeastSquares, SingleColumnProjection) {
  const DenseMatrix a{{2.0}, {0.0}};
  const Vector x = least_squares(a, Vector{{4.0, 0.0}});
  ASSERT_EQ(x.size(), 1);
  EXPECT_DOUBLE_EQ(x(0), 2.0);
}

TEST(LeastSquares, MatchesQrReference) {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const DenseMatrix a = oracle::gaussian(6, 3, rng);
    const Vector y = oracle::gaussian(6, 1, rng).col(0);
    const Vector expected = oracle::qr_solve(a, y);
    const Vector got = least_squares(a, y);
    EXPECT_LE((got - expected).cwiseAbs().maxCoeff(), 1e-10) << "trial " << trial;
  }
}

TEST(LeastSquares, ResidualOrthogonalToColumns) {
  Rng rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const Index m = 3 + static_cast<Index>(rng.uniform_index(8));
    const Index k = 1 + static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(m)));
    const DenseMatrix a = oracle::gaussian(m, k, rng);
    const Vector y = oracle::gaussian(m, 1, rng).col(0);
    const Vector r = y - a * least_squares(a, y);
    for (Index i = 0; i < k; ++i) {
      EXPECT_LE(std::abs(a.col(i).dot(r)), 1e-8 * y.norm() * a.col(i).norm());
    }
  }
}

TEST(LeastSquares, RejectsBadShapes) {
  EXPECT_THROW(least_squares(DenseMatrix::Identity(3, 3), Vector::Ones(2)), InvalidArgument);
  EXPECT_THROW(least_squares(DenseMatrix::Ones(2, 3), Vector::Ones(2)), InvalidArgument);
}

TEST(LeastSquares, RidgeRescuesDuplicateColumns) {
  DenseMatrix a(3, 2);
  a << 1, 1, 2, 2, 3, 3;
  bool ridge = false;
  const Vector x = least_squares(a, Vector{{1.0, 2.0, 3.0}}, &ridge);
  EXPECT_TRUE(ridge);
  EXPECT_NEAR((a * x - Vector{{1.0, 2.0, 3.0}}).norm(), 0.0, 1e-6);
}

TEST(LeastSquares, ZeroMatrixIsNumericalError) {
  try {
    least_squares(DenseMatrix::Zero(3, 2), Vector::Ones(3));
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_GT(e.condition_estimate(), kRidgeConditionLimit);
  }
}

TEST(Rank1Svd, ExactRankOne) {
  DenseMatrix m(2, 2);
  m << 2, 1, 0, 0;
  const SingularTriple t = rank1_svd(m);
  EXPECT_NEAR(t.sigma, std::sqrt(5.0), 1e-12);
  EXPECT_NEAR(t.u(0), 1.0, 1e-12);
  EXPECT_NEAR(t.u(1), 0.0, 1e-12);
  EXPECT_NEAR(t.v(0), 2.0 / std::sqrt(5.0), 1e-12);
  EXPECT_NEAR(t.v(1), 1.0 / std::sqrt(5.0), 1e-12);
  EXPECT_TRUE(t.converged);
}

TEST(Rank1Svd, Diagonal) {
  const DenseMatrix m = Vector{{3.0, 1.0}}.asDiagonal();
  const SingularTriple t = rank1_svd(m);
  EXPECT_NEAR(t.sigma, 3.0, 1e-12);
  EXPECT_NEAR(t.u(0), 1.0, 1e-12);
  EXPECT_NEAR(t.v(0), 1.0, 1e-12);
  EXPECT_NEAR(t.u(1), 0.0, 1e-10);
}

TEST(Rank1Svd, LeadingEntryOfUIsPositive) {
  const DenseMatrix m = -DenseMatrix::Identity(3, 3) * 2.0 + DenseMatrix::Constant(3, 3, -0.1);
  const SingularTriple t = rank1_svd(m);
  Index lead = 0;
  t.u.cwiseAbs().maxCoeff(&lead);
  EXPECT_GT(t.u(lead), 0.0);
  EXPECT_NEAR(t.u.norm(), 1.0, 1e-12);
  EXPECT_NEAR(t.v.norm(), 1.0, 1e-12);
}

TEST(Rank1Svd, MatchesJacobiOnFiveBySeven) {
  Rng rng(21);
  const DenseMatrix m = oracle::gaussian(5, 7, rng);
  const SingularTriple t = rank1_svd(m);
  const oracle::JacobiTriple ref = oracle::jacobi_leading(m);
  EXPECT_NEAR(t.sigma, ref.sigma, 1e-8);
  EXPECT_LE((t.u - ref.u).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LE((t.v - ref.v).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LE((m * t.v - t.sigma * t.u).norm(), 1e-10 * m.norm());
}

TEST(Rank1Svd, BestRankOneApproximation) {
  Rng rng(22);
  for (int trial = 0; trial < 200; ++trial) {
    const Index rows = 1 + static_cast<Index>(rng.uniform_index(8));
    const Index cols = 1 + static_cast<Index>(rng.uniform_index(8));
    const DenseMatrix m = oracle::gaussian(rows, cols, rng);
    const SingularTriple t = rank1_svd(m);
    const oracle::JacobiTriple ref = oracle::jacobi_leading(m);
    const double ours = (m - t.sigma * t.u * t.v.transpose()).squaredNorm();
    const double best = (m - ref.sigma * ref.u * ref.v.transpose()).squaredNorm();
    EXPECT_LE(ours, best + 1e-8) << rows << "x" << cols << " trial " << trial;
  }
}

TEST(Rank1Svd, Deterministic) {
  Rng rng(23);
  const DenseMatrix m = oracle::gaussian(6, 4, rng);
  const SingularTriple a = rank1_svd(m);
  const SingularTriple b = rank1_svd(m);
  EXPECT_EQ(a.sigma, b.sigma);
  EXPECT_EQ(a.u, b.u);
  EXPECT_EQ(a.v, b.v);
}

TEST(Rank1Svd, StartOrthogonalToLeadingSpace) {
  // The all-ones start is exactly the second singular vector here.
  DenseMatrix m(2, 2);
  m << 1.5, -0.5, -0.5, 1.5;
  const SingularTriple t = rank1_svd(m);
  const oracle::JacobiTriple ref = oracle::jacobi_leading(m);
  EXPECT_NEAR(t.sigma, 2.0, 1e-10);
  EXPECT_NEAR(ref.sigma, 2.0, 1e-12);
  EXPECT_LE((t.u - ref.u).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Rank1Svd, Errors) {
  EXPECT_THROW(rank1_svd(DenseMatrix::Zero(3, 2)), DegenerateInput);
  EXPECT_THROW(rank1_svd(DenseMatrix::Ones(2, 2), 0.0), InvalidArgument);
  DenseMatrix bad = DenseMatrix::Ones(2, 2);
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(rank1_svd(bad), InvalidArgument);
}

TEST(Objective, ExactFactorisationIsZero) {
  Rng rng(31);
  const DenseMatrix a = oracle::gaussian(4, 3, rng);
  const DenseMatrix xd = oracle::gaussian(3, 5, rng);
  EXPECT_NEAR(objective(a * xd, a, oracle::to_sparse(xd)), 0.0, 1e-24);
}

TEST(Objective, IdentityAgainstEmptyCode) {
  EXPECT_DOUBLE_EQ(objective(DenseMatrix::Identity(2, 2), DenseMatrix::Identity(2, 2), SparseCoeff(2, 2)), 2.0);
}

TEST(Objective, MatchesNaiveSummation) {
  Rng rng(32);
  const DenseMatrix y = oracle::gaussian(4, 10, rng);
  const DenseMatrix a = oracle::gaussian(4, 6, rng);
  DenseMatrix xd = oracle::gaussian(6, 10, rng);
  for (Index c = 0; c < 10; ++c) {
    for (Index r = 0; r < 6; ++r) {
      if (rng.uniform01() < 0.6) xd(r, c) = 0.0;
    }
  }
  const double expected = oracle::naive_objective(y, a, xd);
  EXPECT_NEAR(objective(y, a, oracle::to_sparse(xd)), expected, 1e-12 * expected);
  EXPECT_NEAR(residual(y, a, oracle::to_sparse(xd)).squaredNorm(), expected, 1e-12 * expected);
}

TEST(Objective, AdditiveOverColumnBlocks) {
  Rng rng(33);
  for (int trial = 0; trial < 20; ++trial) {
    const DenseMatrix y = oracle::gaussian(5, 9, rng);
    const DenseMatrix a = oracle::gaussian(5, 4, rng);
    const DenseMatrix xd = oracle::gaussian(4, 9, rng);
    const SparseCoeff x = oracle::to_sparse(xd);
    const double whole = objective(y, a, x);
    const double left = objective(y.leftCols(4), a, oracle::to_sparse(xd.leftCols(4)));
    const double right = objective(y.rightCols(5), a, oracle::to_sparse(xd.rightCols(5)));
    EXPECT_NEAR(whole, left + right, 1e-12 * whole);
    const DenseMatrix r = y - a * xd;
    EXPECT_NEAR(whole, objective(r, DenseMatrix::Zero(5, 4), SparseCoeff(4, 9)), 1e-12 * whole);
    const Vector errs = column_errors(y, a, x);
    EXPECT_NEAR(errs.squaredNorm(), whole, 1e-12 * whole);
  }
}

TEST(Objective, ShapeMismatch) {
  EXPECT_THROW(objective(DenseMatrix::Ones(2, 3), DenseMatrix::Ones(2, 2), SparseCoeff(2, 4)), InvalidArgument);
  EXPECT_THROW(objective(DenseMatrix::Ones(2, 3), DenseMatrix::Ones(3, 2), SparseCoeff(2, 3)), InvalidArgument);
}
