#include "batchdl/linalg.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "batchdl/sparse_coeff.hpp"

namespace batchdl {

void require_valid(const DenseMatrix& m, const char* what) {
  if (m.rows() < 1 || m.cols() < 1) {
    throw InvalidArgument(std::string(what) + ": matrix must have at least one row and column");
  }
  if (!m.allFinite()) {
    throw InvalidArgument(std::string(what) + ": matrix contains non-finite entries");
  }
}

DenseMatrix solve_gram(const DenseMatrix& gram, const DenseMatrix& rhs, bool* ridge_used) {
  const Index k = gram.rows();
  if (k < 1 || gram.cols() != k) throw InvalidArgument("solve_gram: Gram matrix must be square");
  if (rhs.rows() != k) throw InvalidArgument("solve_gram: right-hand side has wrong row count");
  if (!gram.allFinite() || !rhs.allFinite()) {
    throw InvalidArgument("solve_gram: non-finite input");
  }
  if (ridge_used) *ridge_used = false;

  Eigen::LLT<DenseMatrix> llt(gram);
  double condition = std::numeric_limits<double>::infinity();
  if (llt.info() == Eigen::Success) {
    const double rc = llt.rcond();
    if (rc > 0.0) condition = 1.0 / rc;
    if (condition <= kRidgeConditionLimit) return llt.solve(rhs);
  }

  const double trace = gram.trace();
  if (!(trace > 0.0)) {
    throw NumericalError("solve_gram: Gram matrix is zero or indefinite", condition);
  }
  const double lambda = kRidgeScale * trace / static_cast<double>(k);
  DenseMatrix regularised = gram;
  regularised.diagonal().array() += lambda;
  Eigen::LLT<DenseMatrix> ridge(regularised);
  if (ridge.info() != Eigen::Success) {
    throw NumericalError("solve_gram: system singular after ridge regularisation", condition);
  }
  if (ridge_used) *ridge_used = true;
  return ridge.solve(rhs);
}

Vector least_squares(const DenseMatrix& a, const Vector& y, bool* ridge_used) {
  if (a.rows() != y.size()) throw InvalidArgument("least_squares: A and y have different row counts");
  if (a.cols() < 1) throw InvalidArgument("least_squares: A has no columns");
  if (a.cols() > a.rows()) throw InvalidArgument("least_squares: more unknowns than equations");
  const DenseMatrix gram = a.transpose() * a;
  const DenseMatrix rhs = a.transpose() * y;
  return solve_gram(gram, rhs, ridge_used).col(0);
}

namespace {

// State of one power-iteration candidate, expressed on the original matrix.
struct Candidate {
  double sigma = 0.0;
  double residual = std::numeric_limits<double>::infinity();
  Vector u;
  Vector v;
};

// Completes the triple from an iterate `w` living on the Gram side.
Candidate complete(const DenseMatrix& m, const Vector& w, bool left) {
  Candidate c;
  if (left) {
    c.u = w;
    c.v = m.transpose() * w;
    c.sigma = c.v.norm();
    if (c.sigma > 0.0) c.v /= c.sigma;
  } else {
    c.v = w;
    c.u = m * w;
    c.sigma = c.u.norm();
    if (c.sigma > 0.0) c.u /= c.sigma;
  }
  // One of the two terms vanishes by construction; the other measures convergence.
  if (c.sigma > 0.0) {
    c.residual = std::hypot((m * c.v - c.sigma * c.u).norm(), (m.transpose() * c.u - c.sigma * c.v).norm());
  }
  return c;
}

}  // namespace

SingularTriple rank1_svd(const DenseMatrix& m, double tol, int max_iter) {
  require_valid(m, "rank1_svd");
  if (!(tol > 0.0)) throw InvalidArgument("rank1_svd: tol must be positive");
  if (max_iter < 1) throw InvalidArgument("rank1_svd: max_iter must be positive");
  const double fro = m.norm();
  if (fro == 0.0) throw DegenerateInput("rank1_svd: matrix is all zero");

  // Iterate on the smaller Gram matrix; scale so its spectral radius is <= 1.
  const bool left = m.rows() <= m.cols();
  const DenseMatrix scaled = m / fro;
  DenseMatrix gram = left ? DenseMatrix(scaled * scaled.transpose())
                          : DenseMatrix(scaled.transpose() * scaled);
  const Index dim = gram.rows();

  // sigma_1^2 >= every diagonal entry of the Gram matrix.
  Index heaviest = 0;
  const double max_diag = gram.diagonal().maxCoeff(&heaviest);

  Vector w = Vector::Constant(dim, 1.0 / std::sqrt(static_cast<double>(dim)));
  bool tried_unit_start = false;
  bool tried_heaviest_start = false;

  constexpr int kSquaringPeriod = 6;
  constexpr int kMaxSquarings = 10;
  const double floor = 1e-14 * fro;

  DenseMatrix power = gram;
  int squarings = 0;
  int since_squaring = 0;
  Candidate best;
  int stale = 0;  // iterations without improving `best`
  int iter = 0;
  for (; iter < max_iter; ++iter) {
    Vector z = power * w;
    double nz = z.norm();
    if (!(nz > 0.0)) {
      // Start vector orthogonal to the range: restart from a coordinate vector.
      if (!tried_unit_start) {
        tried_unit_start = true;
        w = Vector::Unit(dim, 0);
      } else {
        tried_heaviest_start = true;
        w = Vector::Unit(dim, heaviest);
      }
      continue;
    }
    w = z / nz;
    Candidate c = complete(m, w, left);
    if (c.residual < best.residual) {
      best = c;
      stale = 0;
    } else {
      ++stale;
    }
    if (c.residual <= tol * fro) {
      const double rq = c.sigma * c.sigma / (fro * fro);
      if (rq < max_diag * (1.0 - 1e-12) && !tried_heaviest_start) {
        // Converged onto a non-leading singular pair; restart where the
        // Rayleigh quotient already exceeds it.
        tried_heaviest_start = true;
        w = Vector::Unit(dim, heaviest);
        power = gram;
        squarings = 0;
        since_squaring = 0;
        best = Candidate{};
        stale = 0;
        continue;
      }
    }
    if (c.residual <= floor) break;
    if (best.residual <= tol * fro && stale >= 10) break;

    if (++since_squaring >= kSquaringPeriod && squarings < kMaxSquarings) {
      power = power * power;
      const double t = power.trace();
      if (t > 0.0) power /= t;
      ++squarings;
      since_squaring = 0;
    }
  }

  SingularTriple out;
  if (best.sigma <= 0.0) throw DegenerateInput("rank1_svd: no nonzero singular direction found");
  out.sigma = best.sigma;
  out.u = best.u.normalized();
  out.v = best.v.normalized();
  out.converged = best.residual <= tol * fro;
  out.iterations = iter;

  Index pivot = 0;
  out.u.cwiseAbs().maxCoeff(&pivot);
  if (out.u(pivot) < 0.0) {
    out.u = -out.u;
    out.v = -out.v;
  }
  return out;
}

namespace {

void check_shapes(const DenseMatrix& y, const DenseMatrix& a, const SparseCoeff& x) {
  if (y.rows() != a.rows()) throw InvalidArgument("objective: Y and A have different row counts");
  if (a.cols() != x.atoms()) throw InvalidArgument("objective: A columns differ from X rows");
  if (y.cols() != x.samples()) throw InvalidArgument("objective: Y and X have different column counts");
}

}  // namespace

DenseMatrix residual(const DenseMatrix& y, const DenseMatrix& a, const SparseCoeff& x) {
  check_shapes(y, a, x);
  DenseMatrix r = y;
  for (Index j = 0; j < y.cols(); ++j) {
    for (const auto& [i, value] : x.column(j)) r.col(j) -= value * a.col(i);
  }
  return r;
}

double objective(const DenseMatrix& y, const DenseMatrix& a, const SparseCoeff& x) {
  return residual(y, a, x).squaredNorm();
}

Vector column_errors(const DenseMatrix& y, const DenseMatrix& a, const SparseCoeff& x) {
  return residual(y, a, x).colwise().norm().transpose();
}

}  // namespace batchdl
