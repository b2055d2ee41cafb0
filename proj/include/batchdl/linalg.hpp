#pragma once

#include <Eigen/Dense>

#include <span>

#include "batchdl/errors.hpp"

namespace batchdl {

using Index = Eigen::Index;
/// Column-major real matrix. Holds samples Y, dictionaries A and residuals.
using DenseMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

class SparseCoeff;

/// Throws InvalidArgument unless the matrix is non-empty with finite entries.
void require_valid(const DenseMatrix& m, const char* what);

/// Leading singular triple of a matrix. `u` has its largest-magnitude entry positive.
struct SingularTriple {
  double sigma = 0.0;
  Vector u;
  Vector v;
  bool converged = true;
  int iterations = 0;
};

/// Condition above which the Gram solve switches to the ridge-regularised system.
inline constexpr double kRidgeConditionLimit = 1e12;
/// Relative ridge weight: lambda = kRidgeScale * trace(G) / k.
inline constexpr double kRidgeScale = 1e-10;

/// Solves G X = B for symmetric positive (semi)definite G by Cholesky.
/// When G's condition estimate exceeds kRidgeConditionLimit a ridge term is added.
/// `ridge_used` (optional) reports whether that happened.
DenseMatrix solve_gram(const DenseMatrix& gram, const DenseMatrix& rhs, bool* ridge_used = nullptr);

/// argmin_x ||y - A x||_2 via normal equations. Requires A.cols() <= A.rows().
Vector least_squares(const DenseMatrix& a, const Vector& y, bool* ridge_used = nullptr);

/// Leading singular triple by power iteration on the smaller Gram matrix.
/// The start vector is the normalised all-ones vector, so the result is a
/// deterministic function of `m`. Throws DegenerateInput for an all-zero matrix.
SingularTriple rank1_svd(const DenseMatrix& m, double tol = 1e-10, int max_iter = 500);

/// ||Y - A X||_F^2.
double objective(const DenseMatrix& y, const DenseMatrix& a, const SparseCoeff& x);

/// Y - A X.
DenseMatrix residual(const DenseMatrix& y, const DenseMatrix& a, const SparseCoeff& x);

/// Euclidean norm of each column of Y - A X.
Vector column_errors(const DenseMatrix& y, const DenseMatrix& a, const SparseCoeff& x);

}  // namespace batchdl
