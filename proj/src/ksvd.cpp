#include <algorithm>
#include <cmath>

#include "batchdl/batch_svd.hpp"
#include "batchdl/sparse_coding.hpp"

namespace batchdl {

KsvdResult ksvd(const DenseMatrix& y, const DenseMatrix& a0, Index k, int iterations) {
  require_valid(y, "ksvd");
  require_valid(a0, "ksvd");
  if (y.rows() != a0.rows()) throw InvalidArgument("ksvd: Y and A0 have different row counts");
  if (k < 1 || k > std::min(a0.rows(), a0.cols())) {
    throw InvalidArgument("ksvd: per-sample sparsity must lie in [1, min(m, n)]");
  }
  if (iterations < 1) throw InvalidArgument("ksvd: iteration count must be at least 1");

  const Index n = a0.cols();
  const Index p = y.cols();
  KsvdResult out;
  out.a = a0;
  out.trace.set_scale(y.squaredNorm());

  for (int it = 0; it < iterations; ++it) {
    out.x = SparseCoeff(n, p);
    for (Index j = 0; j < p; ++j) {
      const OmpResult code = omp(y.col(j), out.a, k);
      for (std::size_t t = 0; t < code.support.size(); ++t) {
        out.x.set(code.support[t], j, code.coeffs(static_cast<Index>(t)));
      }
    }
    DenseMatrix r = residual(y, out.a, out.x);
    out.trace.push(Phase::Code, r.squaredNorm());

    out.reseeded += reseed_dead_atoms(y, r, out.a, out.x);
    for (Index i = 0; i < n; ++i) {
      const std::vector<Index> users(out.x.row_support(i).begin(), out.x.row_support(i).end());
      if (users.empty()) continue;
      DenseMatrix err(y.rows(), static_cast<Index>(users.size()));
      for (std::size_t t = 0; t < users.size(); ++t) {
        const Index j = users[t];
        err.col(static_cast<Index>(t)) = r.col(j) + out.x.value(i, j) * out.a.col(i);
      }
      if (err.squaredNorm() == 0.0) continue;
      const SingularTriple triple = rank1_svd(err);
      out.a.col(i) = triple.u;
      for (std::size_t t = 0; t < users.size(); ++t) {
        const Index j = users[t];
        const double value = triple.sigma * triple.v(static_cast<Index>(t));
        out.x.set(i, j, value);
        r.col(j) = err.col(static_cast<Index>(t)) - value * triple.u;
      }
    }
    out.trace.push(Phase::Dict, objective(y, out.a, out.x));
  }
  return out;
}

}  // namespace batchdl
