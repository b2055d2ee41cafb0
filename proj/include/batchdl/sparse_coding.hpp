#pragma once

#include <cstdint>
#include <vector>

#include "batchdl/linalg.hpp"
#include "batchdl/sparse_coeff.hpp"
#include "batchdl/trace.hpp"

namespace batchdl {

struct OmpResult {
  std::vector<Index> support;  // atoms in selection order
  Vector coeffs;               // aligned with `support`
  std::vector<double> residual_norms;  // ||r|| before the first step and after each step
  bool stopped_early = false;  // residual vanished before k atoms were chosen
};

/// Pursuit stops once the best remaining correlation is at most this
/// fraction of the signal norm: the residual has numerically vanished.
inline constexpr double kVanishingCorrelation = 1e-12;

/// Orthogonal matching pursuit with a full least-squares refit after each step.
/// Among equal correlations the lower atom index wins.
OmpResult omp(const Vector& y, const DenseMatrix& a, Index k);

struct BlockOmpResult {
  SparseCoeff x;
  bool stopped_early = false;
};

/// Greedy pursuit on vec(Y) with the block-diagonal dictionary I_p (x) A,
/// run without forming the Kronecker product. Every step picks the largest
/// |a_i^T r_j| over unselected (atom, sample) pairs, ties going to the lower
/// sample and then the lower atom, and refits that sample only.
/// A must have unit-norm columns.
BlockOmpResult block_omp(const DenseMatrix& y, const DenseMatrix& a, Index budget);

/// Sample support size above which block_omp keeps an incremental Cholesky factor.
inline constexpr std::size_t kIncrementalRefitThreshold = 8;

/// n distinct columns of Y picked uniformly (seeded) and normalised. When
/// p < n, or a picked column is zero, the atom is Gaussian instead.
DenseMatrix initial_dictionary(const DenseMatrix& y, Index atoms, std::uint64_t seed);

/// Least-squares dictionary for fixed X: A_S = Y X_S^T (X_S X_S^T)^{-1} over
/// the rows S with non-empty support. Atoms of empty rows are copied from `a`.
DenseMatrix update_dictionary(const DenseMatrix& y, const SparseCoeff& x, const DenseMatrix& a,
                              bool* ridge_used = nullptr);

/// Rescales every nonzero atom to unit norm and multiplies the matching row of X
/// by the old norm, leaving A X unchanged.
void normalize_atoms(DenseMatrix& a, SparseCoeff& x);

/// Replaces the atom of every empty row of X by the sample column with the
/// largest residual norm (each sample used at most once), normalised.
/// Returns the number of atoms replaced. AX is unchanged.
std::size_t reseed_dead_atoms(const DenseMatrix& y, const DenseMatrix& residual, DenseMatrix& a,
                              const SparseCoeff& x);

struct DictApproxResult {
  DenseMatrix a;
  SparseCoeff x;
  ObjectiveTrace trace;
  std::size_t reseeded = 0;
};

/// Alternates block OMP with the least-squares dictionary update T times.
/// The trace is not guaranteed monotone.
DictApproxResult dict_approx_init(const DenseMatrix& y, const DenseMatrix& a0, Index budget,
                                  int iterations);

}  // namespace batchdl
