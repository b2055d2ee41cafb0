#include "batchdl/sparse_coding.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>

#include "batchdl/random.hpp"

namespace batchdl {

namespace {

DenseMatrix gather_columns(const DenseMatrix& a, const std::vector<Index>& cols) {
  DenseMatrix out(a.rows(), static_cast<Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) out.col(static_cast<Index>(c)) = a.col(cols[c]);
  return out;
}

void require_unit_atoms(const DenseMatrix& a, const char* what) {
  for (Index i = 0; i < a.cols(); ++i) {
    if (std::abs(a.col(i).norm() - 1.0) > 1e-8) {
      throw InvalidArgument(std::string(what) + ": atom " + std::to_string(i) + " is not unit norm");
    }
  }
}

// Least-squares fit of one sample on its support. Beyond
// kIncrementalRefitThreshold atoms the Cholesky factor of the support Gram
// matrix is extended by one row per added atom instead of refactored.
class SampleFit {
 public:
  void add(Index atom) { support_.push_back(atom); }
  const std::vector<Index>& support() const { return support_; }
  const Vector& coeffs() const { return coeffs_; }

  void refit(const DenseMatrix& a, const Vector& y) {
    const std::size_t s = support_.size();
    if (s <= kIncrementalRefitThreshold) {
      factor_.reset();
      coeffs_ = least_squares(gather_columns(a, support_), y);
      return;
    }
    if (factor_ && factor_->rows() + 1 == static_cast<Index>(s)) {
      extend_factor(a);
    } else {
      build_factor(a);
    }
    if (!factor_) {
      coeffs_ = least_squares(gather_columns(a, support_), y);
      return;
    }
    const DenseMatrix sub = gather_columns(a, support_);
    const Vector rhs = sub.transpose() * y;
    const Vector z = factor_->triangularView<Eigen::Lower>().solve(rhs);
    coeffs_ = factor_->transpose().triangularView<Eigen::Upper>().solve(z);
  }

 private:
  static bool well_conditioned(const DenseMatrix& l) {
    const Vector d = l.diagonal().cwiseAbs();
    const double lo = d.minCoeff();
    const double hi = d.maxCoeff();
    return lo > 0.0 && (hi / lo) * (hi / lo) <= kRidgeConditionLimit;
  }

  void build_factor(const DenseMatrix& a) {
    const DenseMatrix sub = gather_columns(a, support_);
    Eigen::LLT<DenseMatrix> llt(sub.transpose() * sub);
    factor_.reset();
    if (llt.info() != Eigen::Success) return;
    DenseMatrix l = llt.matrixL();
    if (well_conditioned(l)) factor_ = std::move(l);
  }

  void extend_factor(const DenseMatrix& a) {
    const Index k = factor_->rows();
    const auto atom = a.col(support_.back());
    Vector g(k);
    for (Index c = 0; c < k; ++c) g(c) = a.col(support_[static_cast<std::size_t>(c)]).dot(atom);
    const Vector w = factor_->triangularView<Eigen::Lower>().solve(g);
    const double d2 = atom.squaredNorm() - w.squaredNorm();
    if (!(d2 > 0.0)) {
      factor_.reset();
      return;
    }
    DenseMatrix l = DenseMatrix::Zero(k + 1, k + 1);
    l.topLeftCorner(k, k) = *factor_;
    l.block(k, 0, 1, k) = w.transpose();
    l(k, k) = std::sqrt(d2);
    if (well_conditioned(l)) {
      factor_ = std::move(l);
    } else {
      factor_.reset();
    }
  }

  std::vector<Index> support_;
  Vector coeffs_;
  std::optional<DenseMatrix> factor_;
};

}  // namespace

OmpResult omp(const Vector& y, const DenseMatrix& a, Index k) {
  require_valid(a, "omp");
  if (y.size() != a.rows()) throw InvalidArgument("omp: y length differs from dictionary rows");
  if (!y.allFinite()) throw InvalidArgument("omp: y contains non-finite entries");
  if (k < 1 || k > std::min(a.rows(), a.cols())) {
    throw InvalidArgument("omp: sparsity must lie in [1, min(m, n)]");
  }
  const Vector norms = a.colwise().norm().transpose();
  if ((norms.array() == 0.0).any()) throw InvalidArgument("omp: dictionary has a zero column");

  OmpResult out;
  Vector r = y;
  const double scale = y.norm();
  out.residual_norms.push_back(scale);
  std::vector<char> chosen(static_cast<std::size_t>(a.cols()), 0);

  for (Index step = 0; step < k; ++step) {
    const Vector corr = (a.transpose() * r).cwiseAbs().cwiseQuotient(norms);
    Index best = -1;
    double best_value = -1.0;
    for (Index i = 0; i < a.cols(); ++i) {
      if (chosen[static_cast<std::size_t>(i)]) continue;
      if (corr(i) > best_value) {
        best_value = corr(i);
        best = i;
      }
    }
    if (best < 0 || best_value <= kVanishingCorrelation * scale) {
      out.stopped_early = true;
      break;
    }
    chosen[static_cast<std::size_t>(best)] = 1;
    out.support.push_back(best);
    const DenseMatrix sub = gather_columns(a, out.support);
    out.coeffs = least_squares(sub, y);
    r = y - sub * out.coeffs;
    out.residual_norms.push_back(r.norm());
  }
  if (out.support.empty()) out.coeffs.resize(0);
  return out;
}

BlockOmpResult block_omp(const DenseMatrix& y, const DenseMatrix& a, Index budget) {
  require_valid(y, "block_omp");
  require_valid(a, "block_omp");
  if (y.rows() != a.rows()) throw InvalidArgument("block_omp: Y and A have different row counts");
  const Index n = a.cols();
  const Index p = y.cols();
  const Index m = a.rows();
  if (budget < 1 || budget > n * p) {
    throw InvalidArgument("block_omp: budget must lie in [1, n*p]");
  }
  require_unit_atoms(a, "block_omp");

  std::vector<SampleFit> fits(static_cast<std::size_t>(p));
  std::vector<char> chosen(static_cast<std::size_t>(n * p), 0);
  DenseMatrix corr = (a.transpose() * y).cwiseAbs();

  // Best unselected atom of each sample; -1 once the sample is exhausted.
  std::vector<Index> best_atom(static_cast<std::size_t>(p), -1);
  std::vector<double> best_value(static_cast<std::size_t>(p), -1.0);
  auto rescan = [&](Index j) {
    const auto js = static_cast<std::size_t>(j);
    best_atom[js] = -1;
    best_value[js] = -1.0;
    if (static_cast<Index>(fits[js].support().size()) >= m) return;
    for (Index i = 0; i < n; ++i) {
      if (chosen[static_cast<std::size_t>(j * n + i)]) continue;
      if (corr(i, j) > best_value[js]) {
        best_value[js] = corr(i, j);
        best_atom[js] = i;
      }
    }
  };
  for (Index j = 0; j < p; ++j) rescan(j);

  const double scale = y.colwise().norm().maxCoeff();
  BlockOmpResult out;
  for (Index step = 0; step < budget; ++step) {
    Index pick = -1;
    double value = -1.0;
    for (Index j = 0; j < p; ++j) {
      if (best_atom[static_cast<std::size_t>(j)] >= 0 && best_value[static_cast<std::size_t>(j)] > value) {
        value = best_value[static_cast<std::size_t>(j)];
        pick = j;
      }
    }
    if (pick < 0 || value <= kVanishingCorrelation * scale) {
      out.stopped_early = true;
      break;
    }
    const auto js = static_cast<std::size_t>(pick);
    const Index atom = best_atom[js];
    chosen[static_cast<std::size_t>(pick * n + atom)] = 1;
    SampleFit& fit = fits[js];
    fit.add(atom);
    fit.refit(a, y.col(pick));
    Vector r = y.col(pick);
    for (std::size_t c = 0; c < fit.support().size(); ++c) {
      r -= fit.coeffs()(static_cast<Index>(c)) * a.col(fit.support()[c]);
    }
    corr.col(pick) = (a.transpose() * r).cwiseAbs();
    rescan(pick);
  }

  out.x = SparseCoeff(n, p);
  for (Index j = 0; j < p; ++j) {
    const SampleFit& fit = fits[static_cast<std::size_t>(j)];
    for (std::size_t c = 0; c < fit.support().size(); ++c) {
      out.x.set(fit.support()[c], j, fit.coeffs()(static_cast<Index>(c)));
    }
  }
  return out;
}

DenseMatrix initial_dictionary(const DenseMatrix& y, Index atoms, std::uint64_t seed) {
  require_valid(y, "initial_dictionary");
  if (atoms < 1) throw InvalidArgument("initial_dictionary: need at least one atom");
  const Index m = y.rows();
  const Index p = y.cols();
  Rng rng(seed);

  auto gaussian_atom = [&] {
    Vector v(m);
    for (Index r = 0; r < m; ++r) v(r) = rng.normal();
    return Vector(v.normalized());
  };

  std::vector<Index> order(static_cast<std::size_t>(p));
  std::iota(order.begin(), order.end(), Index{0});
  const Index picks = std::min(atoms, p);
  for (Index t = 0; t < picks; ++t) {
    const auto swap_with = t + static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(p - t)));
    std::swap(order[static_cast<std::size_t>(t)], order[static_cast<std::size_t>(swap_with)]);
  }

  DenseMatrix a(m, atoms);
  for (Index i = 0; i < atoms; ++i) {
    if (i < picks) {
      const auto col = y.col(order[static_cast<std::size_t>(i)]);
      const double norm = col.norm();
      if (norm > 0.0) {
        a.col(i) = col / norm;
        continue;
      }
    }
    a.col(i) = gaussian_atom();
  }
  return a;
}

DenseMatrix update_dictionary(const DenseMatrix& y, const SparseCoeff& x, const DenseMatrix& a,
                              bool* ridge_used) {
  if (y.rows() != a.rows() || a.cols() != x.atoms() || y.cols() != x.samples()) {
    throw InvalidArgument("update_dictionary: shape mismatch");
  }
  if (ridge_used) *ridge_used = false;
  std::vector<Index> active;
  std::vector<Index> local(static_cast<std::size_t>(x.atoms()), -1);
  for (Index i = 0; i < x.atoms(); ++i) {
    if (x.row_count(i) > 0) {
      local[static_cast<std::size_t>(i)] = static_cast<Index>(active.size());
      active.push_back(i);
    }
  }
  if (active.empty()) return a;

  const auto s = static_cast<Index>(active.size());
  DenseMatrix gram = DenseMatrix::Zero(s, s);
  DenseMatrix cross = DenseMatrix::Zero(y.rows(), s);
  for (Index j = 0; j < x.samples(); ++j) {
    const auto& column = x.column(j);
    for (const auto& [i, xi] : column) {
      const Index li = local[static_cast<std::size_t>(i)];
      cross.col(li) += xi * y.col(j);
      for (const auto& [k, xk] : column) gram(li, local[static_cast<std::size_t>(k)]) += xi * xk;
    }
  }
  const DenseMatrix solved = solve_gram(gram, cross.transpose(), ridge_used);
  DenseMatrix out = a;
  for (Index l = 0; l < s; ++l) out.col(active[static_cast<std::size_t>(l)]) = solved.row(l).transpose();
  return out;
}

void normalize_atoms(DenseMatrix& a, SparseCoeff& x) {
  for (Index i = 0; i < a.cols(); ++i) {
    const double norm = a.col(i).norm();
    if (norm > 0.0 && norm != 1.0) {
      a.col(i) /= norm;
      x.scale_row(i, norm);
    }
  }
}

std::size_t reseed_dead_atoms(const DenseMatrix& y, const DenseMatrix& residual, DenseMatrix& a,
                              const SparseCoeff& x) {
  std::vector<Index> dead;
  for (Index i = 0; i < x.atoms(); ++i) {
    if (x.row_count(i) == 0) dead.push_back(i);
  }
  if (dead.empty()) return 0;

  const Vector errors = residual.colwise().squaredNorm().transpose();
  std::vector<Index> order(static_cast<std::size_t>(y.cols()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index l, Index r) { return errors(l) > errors(r); });

  std::size_t replaced = 0;
  std::size_t next = 0;
  for (const Index atom : dead) {
    while (next < order.size()) {
      const Index j = order[next++];
      if (!(errors(j) > 0.0)) {
        next = order.size();
        break;
      }
      const double norm = y.col(j).norm();
      if (norm > 0.0) {
        a.col(atom) = y.col(j) / norm;
        ++replaced;
        break;
      }
    }
  }
  return replaced;
}

DictApproxResult dict_approx_init(const DenseMatrix& y, const DenseMatrix& a0, Index budget,
                                  int iterations) {
  if (iterations < 1) throw InvalidArgument("dict_approx_init: iteration count must be at least 1");
  require_valid(y, "dict_approx_init");
  require_valid(a0, "dict_approx_init");

  DictApproxResult out;
  out.a = a0;
  out.trace.set_scale(y.squaredNorm());
  for (int t = 0; t < iterations; ++t) {
    out.x = block_omp(y, out.a, budget).x;
    out.trace.push(Phase::InitCode, objective(y, out.a, out.x));
    out.a = update_dictionary(y, out.x, out.a);
    out.reseeded += reseed_dead_atoms(y, residual(y, out.a, out.x), out.a, out.x);
    normalize_atoms(out.a, out.x);
    out.trace.push(Phase::InitDict, objective(y, out.a, out.x));
  }
  return out;
}

}  // namespace batchdl
