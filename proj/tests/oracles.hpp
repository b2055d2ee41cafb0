#pragma once

// Independent reference implementations used as test oracles. They favour
// literal transcription over speed and share no code with the library beyond
// the matrix types.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "batchdl/linalg.hpp"
#include "batchdl/random.hpp"
#include "batchdl/sparse_coeff.hpp"

namespace oracle {

using batchdl::DenseMatrix;
using batchdl::Index;
using batchdl::Vector;

inline DenseMatrix gaussian(Index rows, Index cols, batchdl::Rng& rng) {
  DenseMatrix m(rows, cols);
  for (Index c = 0; c < cols; ++c) {
    for (Index r = 0; r < rows; ++r) m(r, c) = rng.normal();
  }
  return m;
}

inline DenseMatrix unit_columns(Index rows, Index cols, batchdl::Rng& rng) {
  DenseMatrix m = gaussian(rows, cols, rng);
  for (Index c = 0; c < cols; ++c) m.col(c).normalize();
  return m;
}

/// Square orthonormal matrix from the QR factor of a Gaussian matrix.
inline DenseMatrix orthonormal(Index size, batchdl::Rng& rng) {
  const DenseMatrix g = gaussian(size, size, rng);
  Eigen::HouseholderQR<DenseMatrix> qr(g);
  return qr.householderQ() * DenseMatrix::Identity(size, size);
}

inline Vector qr_solve(const DenseMatrix& a, const Vector& y) { return a.householderQr().solve(y); }

/// Brute-force sum of squared entries of Y - A X using a dense copy of X.
inline double naive_objective(const DenseMatrix& y, const DenseMatrix& a, const DenseMatrix& x) {
  double total = 0.0;
  for (Index r = 0; r < y.rows(); ++r) {
    for (Index c = 0; c < y.cols(); ++c) {
      double v = y(r, c);
      for (Index i = 0; i < a.cols(); ++i) v -= a(r, i) * x(i, c);
      total += v * v;
    }
  }
  return total;
}

struct GreedyStep {
  std::vector<Index> support;
  Vector coeffs;
  double residual_norm = 0.0;
};

/// Textbook OMP: pick the column with the largest |<d, r>| / ||d|| (lowest
/// index on ties), refit on the whole support with QR. `eligible` can veto
/// a column; `stop_below` ends the pursuit when the best score is that small.
inline std::vector<GreedyStep> greedy_pursuit(const DenseMatrix& d, const Vector& y, Index steps,
                                              double stop_below,
                                              const std::function<bool(Index, const std::vector<Index>&)>& eligible) {
  std::vector<GreedyStep> out;
  std::vector<Index> support;
  Vector r = y;
  for (Index s = 0; s < steps; ++s) {
    Index best = -1;
    double best_score = -1.0;
    for (Index c = 0; c < d.cols(); ++c) {
      if (std::find(support.begin(), support.end(), c) != support.end()) continue;
      if (eligible && !eligible(c, support)) continue;
      const double score = std::abs(d.col(c).dot(r)) / d.col(c).norm();
      if (score > best_score) {
        best_score = score;
        best = c;
      }
    }
    if (best < 0 || best_score <= stop_below) break;
    support.push_back(best);
    DenseMatrix sub(d.rows(), static_cast<Index>(support.size()));
    for (std::size_t t = 0; t < support.size(); ++t) sub.col(static_cast<Index>(t)) = d.col(support[t]);
    const Vector coeffs = qr_solve(sub, y);
    r = y - sub * coeffs;
    out.push_back({support, coeffs, r.norm()});
  }
  return out;
}

/// OMP on vec(Y) with the explicitly formed dictionary I_p (x) A. Kronecker
/// column j*n + i is atom i in sample j, so the lowest index rule prefers the
/// lower sample, then the lower atom. A sample block whose support already
/// holds m atoms is ineligible.
inline DenseMatrix kronecker_omp(const DenseMatrix& y, const DenseMatrix& a, Index budget) {
  const Index m = a.rows();
  const Index n = a.cols();
  const Index p = y.cols();
  DenseMatrix d = DenseMatrix::Zero(m * p, n * p);
  for (Index j = 0; j < p; ++j) d.block(j * m, j * n, m, n) = a;
  const Vector vec_y = Eigen::Map<const Vector>(y.data(), m * p);
  double max_col = 0.0;
  for (Index j = 0; j < p; ++j) max_col = std::max(max_col, y.col(j).norm());

  auto eligible = [&](Index c, const std::vector<Index>& support) {
    const Index block = c / n;
    Index used = 0;
    for (const Index s : support) used += (s / n == block) ? 1 : 0;
    return used < m;
  };
  const auto steps = greedy_pursuit(d, vec_y, budget, 1e-12 * max_col, eligible);
  DenseMatrix x = DenseMatrix::Zero(n, p);
  if (steps.empty()) return x;
  const GreedyStep& last = steps.back();
  for (std::size_t t = 0; t < last.support.size(); ++t) {
    const Index c = last.support[t];
    x(c % n, c / n) = last.coeffs(static_cast<Index>(t));
  }
  return x;
}

/// Calls `visit` with every k-subset of {0..p-1} in lexicographic order.
inline void for_each_subset(Index p, Index k, const std::function<void(const std::vector<Index>&)>& visit) {
  std::vector<Index> pick(static_cast<std::size_t>(k));
  std::function<void(Index, Index)> rec = [&](Index start, Index depth) {
    if (depth == k) {
      visit(pick);
      return;
    }
    for (Index c = start; c < p; ++c) {
      pick[static_cast<std::size_t>(depth)] = c;
      rec(c + 1, depth + 1);
    }
  };
  rec(0, 0);
}

/// min over size-k supports of ||R - a x||^2 with a fixed and x optimal on the support.
inline double best_fixed_atom_objective(const DenseMatrix& residual, const Vector& atom, Index k) {
  double best = std::numeric_limits<double>::infinity();
  for_each_subset(residual.cols(), k, [&](const std::vector<Index>& support) {
    DenseMatrix fit = residual;
    for (const Index c : support) {
      const double value = atom.dot(residual.col(c)) / atom.squaredNorm();
      fit.col(c) -= value * atom;
    }
    best = std::min(best, fit.squaredNorm());
  });
  return best;
}

/// Largest sum of squared projections over all ways of choosing `count`
/// columns from `free_cols` and assigning each to one of the two rows.
inline double best_assignment_gain(const Vector& proj_first, const Vector& proj_second,
                                   const std::vector<Index>& free_cols, Index count) {
  double best = -1.0;
  for_each_subset(static_cast<Index>(free_cols.size()), count, [&](const std::vector<Index>& pick) {
    const auto combos = std::uint64_t{1} << pick.size();
    for (std::uint64_t mask = 0; mask < combos; ++mask) {
      double gain = 0.0;
      for (std::size_t t = 0; t < pick.size(); ++t) {
        const Index c = free_cols[static_cast<std::size_t>(pick[t])];
        const double v = (mask >> t) & 1U ? proj_second(c) : proj_first(c);
        gain += v * v;
      }
      best = std::max(best, gain);
    }
  });
  return best;
}

/// Leading singular triple from Eigen's two-sided Jacobi SVD with the
/// library's sign convention applied.
struct JacobiTriple {
  double sigma;
  Vector u;
  Vector v;
  double second;  // next singular value, 0 if none
};

inline JacobiTriple jacobi_leading(const DenseMatrix& m) {
  Eigen::JacobiSVD<DenseMatrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  JacobiTriple t{svd.singularValues()(0), svd.matrixU().col(0), svd.matrixV().col(0),
                 svd.singularValues().size() > 1 ? svd.singularValues()(1) : 0.0};
  Index lead = 0;
  t.u.cwiseAbs().maxCoeff(&lead);
  if (t.u(lead) < 0.0) {
    t.u = -t.u;
    t.v = -t.v;
  }
  return t;
}

/// Planted factorisation: unit-norm Gaussian dictionary, and per column a
/// support of size `sparsity[j]` with Gaussian values.
struct Planted {
  DenseMatrix a;
  DenseMatrix x;
  DenseMatrix y;
};

inline Planted planted(Index m, Index n, const std::vector<Index>& sparsity, batchdl::Rng& rng) {
  Planted out;
  out.a = unit_columns(m, n, rng);
  const auto p = static_cast<Index>(sparsity.size());
  out.x = DenseMatrix::Zero(n, p);
  for (Index j = 0; j < p; ++j) {
    std::vector<Index> atoms(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) atoms[static_cast<std::size_t>(i)] = i;
    for (Index t = 0; t < sparsity[static_cast<std::size_t>(j)]; ++t) {
      const auto pick = t + static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(n - t)));
      std::swap(atoms[static_cast<std::size_t>(t)], atoms[static_cast<std::size_t>(pick)]);
      double value = rng.normal();
      value += value >= 0.0 ? 0.5 : -0.5;
      out.x(atoms[static_cast<std::size_t>(t)], j) = value;
    }
  }
  out.y = out.a * out.x;
  return out;
}

/// Adds white Gaussian noise at the given signal-to-noise ratio in dB.
inline void add_noise(DenseMatrix& y, double snr_db, batchdl::Rng& rng) {
  const double signal = y.squaredNorm() / static_cast<double>(y.size());
  const double sigma = std::sqrt(signal / std::pow(10.0, snr_db / 10.0));
  for (Index c = 0; c < y.cols(); ++c) {
    for (Index r = 0; r < y.rows(); ++r) y(r, c) += sigma * rng.normal();
  }
}

inline batchdl::SparseCoeff to_sparse(const DenseMatrix& x) {
  batchdl::SparseCoeff out(x.rows(), x.cols());
  for (Index c = 0; c < x.cols(); ++c) {
    for (Index r = 0; r < x.rows(); ++r) {
      if (x(r, c) != 0.0) out.set(r, c, x(r, c));
    }
  }
  return out;
}

}  // namespace oracle
