#pragma once

#include <vector>

#include "batchdl/config.hpp"
#include "batchdl/linalg.hpp"
#include "batchdl/sparse_coeff.hpp"
#include "batchdl/trace.hpp"

namespace batchdl {

/// One row of X as a sorted support with matching values.
struct SparseRow {
  std::vector<Index> support;
  std::vector<double> values;

  std::size_t size() const noexcept { return support.size(); }
};

/// An atom together with its coefficient row.
struct RowWorkspace {
  Index row = 0;
  Vector atom;
  SparseRow coeffs;
};

RowWorkspace extract_row(const DenseMatrix& a, const SparseCoeff& x, Index row);
/// Writes atom and coefficients back, replacing the row's previous support.
void store_row(const RowWorkspace& ws, DenseMatrix& a, SparseCoeff& x);

/// ||R - atom * coeffs||_F^2 computed column by column.
double row_objective(const DenseMatrix& residual, const Vector& atom, const SparseRow& coeffs);

/// The k columns with the largest |atom^T r_j| (ties to the lower index), sorted.
std::vector<Index> select_row_support(const DenseMatrix& residual, const Vector& atom, std::size_t k);

struct InnerSwitchResult {
  RowWorkspace ws;
  /// Local objective at the input and after each of the 2N half-steps.
  std::vector<double> local_objectives;
  bool degenerate = false;  // residual was zero on the support
};

/// Inner-row support switching on `residual` = Y minus every other row's contribution.
/// Each of the N iterations fits the best rank-one term on the current support,
/// then moves the k nonzeros to the columns with the largest projections.
InnerSwitchResult inner_row_switch(const DenseMatrix& residual, RowWorkspace ws, int iterations);

struct InterSwitchResult {
  RowWorkspace first;
  RowWorkspace second;
  double objective_before = 0.0;
  double objective_after = 0.0;
};

/// Inter-row support switching for two rows with unit atoms. `residual`
/// excludes both rows. Shared columns are kept; the |symmetric difference|
/// nonzeros are redistributed over all other columns, one row per column.
InterSwitchResult inter_row_switch(const DenseMatrix& residual, RowWorkspace first,
                                   RowWorkspace second);

struct AmplitudeResult {
  DenseMatrix a;
  SparseCoeff x;
  ObjectiveTrace trace;  // initial value plus one entry per half-step
  std::size_t ridge_solves = 0;
};

/// Alternating least squares on A and the supported entries of X. The
/// support of X is never modified.
AmplitudeResult amplitude_adjust(const DenseMatrix& y, DenseMatrix a, SparseCoeff x, int iterations);

struct BatchSvdResult {
  DenseMatrix a;
  SparseCoeff x;
  ObjectiveTrace trace;
  int outer_iterations = 0;
  bool stop_rule_fired = false;
  int inter_phases = 0;
  std::size_t reseeded = 0;
};

/// The monotone batchwise learner. Per outer iteration: inner-row switching on
/// every nonempty row (largest row support first), atom rescaling, inter-row
/// switching over sampled row pairs when the inner phase gained less than
/// cfg.trigger, then amplitude adjustment. Stops when an outer iteration
/// gains at most cfg.epsilon or after cfg.max_outer iterations.
/// ||X||_0 must not exceed cfg.budget and is preserved exactly.
BatchSvdResult batch_svd(const DenseMatrix& y, DenseMatrix a, SparseCoeff x, const LearnConfig& cfg);

struct KsvdResult {
  DenseMatrix a;
  SparseCoeff x;
  ObjectiveTrace trace;
  std::size_t reseeded = 0;
};

/// K-SVD with per-sample sparsity k. The objective is not guaranteed monotone.
KsvdResult ksvd(const DenseMatrix& y, const DenseMatrix& a0, Index k, int iterations);

}  // namespace batchdl
