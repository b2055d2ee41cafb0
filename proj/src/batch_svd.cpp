#include "batchdl/batch_svd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "batchdl/random.hpp"
#include "batchdl/sparse_coding.hpp"

namespace batchdl {

namespace {

// Slack granted to steps that are exact minimisers but are evaluated in floating point.
constexpr double kAcceptSlack = 1e-12;

bool not_worse(double candidate, double current, double scale) {
  return candidate <= current + kAcceptSlack * std::max(current, 1e-12 * scale);
}

void validate_row(const DenseMatrix& residual, const RowWorkspace& ws, const char* what) {
  if (ws.atom.size() != residual.rows()) {
    throw InvalidArgument(std::string(what) + ": atom length differs from residual rows");
  }
  if (ws.coeffs.values.size() != ws.coeffs.support.size()) {
    throw InvalidArgument(std::string(what) + ": support and values have different lengths");
  }
  for (std::size_t t = 0; t < ws.coeffs.support.size(); ++t) {
    const Index c = ws.coeffs.support[t];
    if (c < 0 || c >= residual.cols()) {
      throw InvalidArgument(std::string(what) + ": support index out of range");
    }
    if (t > 0 && c <= ws.coeffs.support[t - 1]) {
      throw InvalidArgument(std::string(what) + ": support must be strictly increasing");
    }
  }
  if (!ws.atom.allFinite()) throw InvalidArgument(std::string(what) + ": atom is not finite");
}

DenseMatrix gather(const DenseMatrix& m, const std::vector<Index>& cols) {
  DenseMatrix out(m.rows(), static_cast<Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) out.col(static_cast<Index>(c)) = m.col(cols[c]);
  return out;
}

// Coefficients of a row spread over all p columns.
Vector dense_row(const SparseRow& row, Index p) {
  Vector d = Vector::Zero(p);
  for (std::size_t t = 0; t < row.support.size(); ++t) d(row.support[t]) = row.values[t];
  return d;
}

double pair_objective(const DenseMatrix& residual, const RowWorkspace& first, const RowWorkspace& second) {
  const Vector x1 = dense_row(first.coeffs, residual.cols());
  const Vector x2 = dense_row(second.coeffs, residual.cols());
  double total = 0.0;
  for (Index c = 0; c < residual.cols(); ++c) {
    if (x1(c) == 0.0 && x2(c) == 0.0) {
      total += residual.col(c).squaredNorm();
    } else {
      total += (residual.col(c) - x1(c) * first.atom - x2(c) * second.atom).squaredNorm();
    }
  }
  return total;
}

// Y~ = R + a x for one row, restricted to the row's support.
void add_row(DenseMatrix& r, const RowWorkspace& ws, double sign) {
  for (std::size_t t = 0; t < ws.coeffs.support.size(); ++t) {
    r.col(ws.coeffs.support[t]) += sign * ws.coeffs.values[t] * ws.atom;
  }
}

std::vector<std::pair<Index, Index>> sample_pairs(Index n, double fraction, Rng& rng) {
  std::vector<std::pair<Index, Index>> pairs;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  }
  if (pairs.empty()) return pairs;
  const auto total = static_cast<double>(pairs.size());
  auto count = static_cast<std::size_t>(std::ceil(fraction * total - 1e-9));
  count = std::clamp<std::size_t>(count, 1, pairs.size());
  for (std::size_t t = 0; t < count; ++t) {
    const auto pick = t + static_cast<std::size_t>(rng.uniform_index(pairs.size() - t));
    std::swap(pairs[t], pairs[pick]);
  }
  pairs.resize(count);
  return pairs;
}

// Least squares on a support that may exceed the sample dimension; the
// singular Gram matrix then goes through the ridge fallback.
Vector fit_support(const DenseMatrix& sub, const Vector& y, bool* ridge) {
  if (sub.cols() <= sub.rows()) return least_squares(sub, y, ridge);
  const DenseMatrix gram = sub.transpose() * sub;
  const DenseMatrix rhs = sub.transpose() * y;
  return solve_gram(gram, rhs, ridge).col(0);
}

}  // namespace

RowWorkspace extract_row(const DenseMatrix& a, const SparseCoeff& x, Index row) {
  RowWorkspace ws;
  ws.row = row;
  ws.atom = a.col(row);
  for (const Index c : x.row_support(row)) {
    ws.coeffs.support.push_back(c);
    ws.coeffs.values.push_back(x.value(row, c));
  }
  return ws;
}

void store_row(const RowWorkspace& ws, DenseMatrix& a, SparseCoeff& x) {
  a.col(ws.row) = ws.atom;
  x.clear_row(ws.row);
  for (std::size_t t = 0; t < ws.coeffs.support.size(); ++t) {
    x.set(ws.row, ws.coeffs.support[t], ws.coeffs.values[t]);
  }
}

double row_objective(const DenseMatrix& residual, const Vector& atom, const SparseRow& coeffs) {
  std::vector<char> used(static_cast<std::size_t>(residual.cols()), 0);
  double total = 0.0;
  for (std::size_t t = 0; t < coeffs.support.size(); ++t) {
    const Index c = coeffs.support[t];
    used[static_cast<std::size_t>(c)] = 1;
    total += (residual.col(c) - coeffs.values[t] * atom).squaredNorm();
  }
  for (Index c = 0; c < residual.cols(); ++c) {
    if (!used[static_cast<std::size_t>(c)]) total += residual.col(c).squaredNorm();
  }
  return total;
}

std::vector<Index> select_row_support(const DenseMatrix& residual, const Vector& atom, std::size_t k) {
  if (atom.size() != residual.rows()) throw InvalidArgument("select_row_support: atom length mismatch");
  if (k > static_cast<std::size_t>(residual.cols())) {
    throw InvalidArgument("select_row_support: k exceeds the number of columns");
  }
  const Vector proj = (residual.transpose() * atom).cwiseAbs();
  std::vector<Index> order(static_cast<std::size_t>(residual.cols()));
  std::iota(order.begin(), order.end(), Index{0});
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](Index l, Index r) { return proj(l) > proj(r) || (proj(l) == proj(r) && l < r); });
  order.resize(k);
  std::sort(order.begin(), order.end());
  return order;
}

InnerSwitchResult inner_row_switch(const DenseMatrix& residual, RowWorkspace ws, int iterations) {
  require_valid(residual, "inner_row_switch");
  validate_row(residual, ws, "inner_row_switch");
  if (iterations < 1) throw InvalidArgument("inner_row_switch: iteration count must be at least 1");
  const std::size_t k = ws.coeffs.size();
  if (k == 0) throw InvalidArgument("inner_row_switch: row has an empty support");

  // Unit atom, same product a x.
  if (const double norm = ws.atom.norm(); norm > 0.0 && norm != 1.0) {
    ws.atom /= norm;
    for (double& v : ws.coeffs.values) v *= norm;
  }

  InnerSwitchResult out;
  const double scale = residual.squaredNorm();
  double current = row_objective(residual, ws.atom, ws.coeffs);
  out.local_objectives.push_back(current);

  for (int it = 0; it < iterations; ++it) {
    // Best rank-one term on the current support.
    const DenseMatrix on_support = gather(residual, ws.coeffs.support);
    if (on_support.squaredNorm() == 0.0) {
      std::fill(ws.coeffs.values.begin(), ws.coeffs.values.end(), 0.0);
      out.degenerate = true;
      out.local_objectives.push_back(row_objective(residual, ws.atom, ws.coeffs));
      break;
    }
    const SingularTriple triple = rank1_svd(on_support);
    SparseRow fitted{ws.coeffs.support, {}};
    const Vector proj = on_support.transpose() * triple.u;
    fitted.values.assign(proj.data(), proj.data() + proj.size());
    double fitted_value = row_objective(residual, triple.u, fitted);
    Vector atom = triple.u;

    // Keep the incoming direction if the iterative SVD did not beat it.
    if (ws.atom.norm() > 0.0) {
      const Vector& unit = ws.atom;
      SparseRow projected{ws.coeffs.support, {}};
      const Vector p0 = on_support.transpose() * unit;
      projected.values.assign(p0.data(), p0.data() + p0.size());
      const double projected_value = row_objective(residual, unit, projected);
      if (projected_value < fitted_value) {
        fitted = std::move(projected);
        fitted_value = projected_value;
        atom = unit;
      }
    }
    if (not_worse(fitted_value, current, scale)) {
      ws.atom = atom;
      ws.coeffs = std::move(fitted);
      current = fitted_value;
    }
    out.local_objectives.push_back(current);

    // Re-select the support for the fixed unit atom.
    SparseRow moved;
    moved.support = select_row_support(residual, ws.atom, k);
    const Vector values = gather(residual, moved.support).transpose() * ws.atom;
    moved.values.assign(values.data(), values.data() + values.size());
    const double moved_value = row_objective(residual, ws.atom, moved);
    if (not_worse(moved_value, current, scale)) {
      ws.coeffs = std::move(moved);
      current = moved_value;
    }
    out.local_objectives.push_back(current);
  }
  out.ws = std::move(ws);
  return out;
}

InterSwitchResult inter_row_switch(const DenseMatrix& residual, RowWorkspace first, RowWorkspace second) {
  require_valid(residual, "inter_row_switch");
  validate_row(residual, first, "inter_row_switch");
  validate_row(residual, second, "inter_row_switch");
  for (const RowWorkspace* ws : {&first, &second}) {
    if (std::abs(ws->atom.norm() - 1.0) > 1e-8) {
      throw InvalidArgument("inter_row_switch: atoms must have unit norm");
    }
  }

  const Index p = residual.cols();
  std::vector<char> in_first(static_cast<std::size_t>(p), 0);
  std::vector<char> in_second(static_cast<std::size_t>(p), 0);
  for (const Index c : first.coeffs.support) in_first[static_cast<std::size_t>(c)] = 1;
  for (const Index c : second.coeffs.support) in_second[static_cast<std::size_t>(c)] = 1;
  std::size_t shared = 0;
  for (Index c = 0; c < p; ++c) shared += in_first[static_cast<std::size_t>(c)] && in_second[static_cast<std::size_t>(c)];
  const std::size_t unique = first.coeffs.size() + second.coeffs.size() - 2 * shared;

  InterSwitchResult out;
  out.objective_before = pair_objective(residual, first, second);
  out.objective_after = out.objective_before;
  if (unique == 0) {
    out.first = std::move(first);
    out.second = std::move(second);
    return out;
  }

  struct Candidate {
    Index col;
    bool to_first;
    double value;
  };
  std::vector<Candidate> candidates;
  const Vector proj_first = residual.transpose() * first.atom;
  const Vector proj_second = residual.transpose() * second.atom;
  for (Index c = 0; c < p; ++c) {
    if (in_first[static_cast<std::size_t>(c)] && in_second[static_cast<std::size_t>(c)]) continue;
    const bool to_first = std::abs(proj_first(c)) >= std::abs(proj_second(c));
    candidates.push_back({c, to_first, to_first ? proj_first(c) : proj_second(c)});
  }
  std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& l, const Candidate& r) {
    return std::abs(l.value) > std::abs(r.value);
  });
  candidates.resize(unique);

  // Shared columns keep their entries; the chosen candidates fill the rest.
  auto rebuild = [&](const RowWorkspace& old, bool is_first) {
    RowWorkspace ws;
    ws.row = old.row;
    ws.atom = old.atom;
    std::vector<std::pair<Index, double>> entries;
    for (std::size_t t = 0; t < old.coeffs.size(); ++t) {
      const auto c = static_cast<std::size_t>(old.coeffs.support[t]);
      if (in_first[c] && in_second[c]) entries.emplace_back(old.coeffs.support[t], old.coeffs.values[t]);
    }
    for (const Candidate& cand : candidates) {
      if (cand.to_first == is_first) entries.emplace_back(cand.col, cand.value);
    }
    std::sort(entries.begin(), entries.end());
    for (const auto& [c, v] : entries) {
      ws.coeffs.support.push_back(c);
      ws.coeffs.values.push_back(v);
    }
    return ws;
  };
  RowWorkspace new_first = rebuild(first, true);
  RowWorkspace new_second = rebuild(second, false);
  const double after = pair_objective(residual, new_first, new_second);
  if (not_worse(after, out.objective_before, residual.squaredNorm())) {
    out.first = std::move(new_first);
    out.second = std::move(new_second);
    out.objective_after = after;
  } else {
    out.first = std::move(first);
    out.second = std::move(second);
  }
  return out;
}

AmplitudeResult amplitude_adjust(const DenseMatrix& y, DenseMatrix a, SparseCoeff x, int iterations) {
  require_valid(y, "amplitude_adjust");
  require_valid(a, "amplitude_adjust");
  if (y.rows() != a.rows() || a.cols() != x.atoms() || y.cols() != x.samples()) {
    throw InvalidArgument("amplitude_adjust: shape mismatch");
  }
  if (iterations < 1) throw InvalidArgument("amplitude_adjust: iteration count must be at least 1");

  AmplitudeResult out;
  const double scale = y.squaredNorm();
  out.trace.set_scale(scale);
  double current = objective(y, a, x);
  out.trace.push(Phase::Amplitude, current);

  for (int it = 0; it < iterations; ++it) {
    bool ridge = false;
    DenseMatrix updated = update_dictionary(y, x, a, &ridge);
    out.ridge_solves += ridge ? 1 : 0;
    const double updated_value = objective(y, updated, x);
    if (not_worse(updated_value, current, scale)) {
      a = std::move(updated);
      current = updated_value;
    }
    out.trace.push(Phase::Amplitude, current);

    for (Index j = 0; j < x.samples(); ++j) {
      const std::vector<Index> support = x.column_support(j);
      if (support.empty()) continue;
      const DenseMatrix sub = gather(a, support);
      Vector old_coeffs(static_cast<Index>(support.size()));
      for (std::size_t t = 0; t < support.size(); ++t) old_coeffs(static_cast<Index>(t)) = x.value(support[t], j);
      const Vector coeffs = fit_support(sub, y.col(j), &ridge);
      out.ridge_solves += ridge ? 1 : 0;
      const double old_err = (y.col(j) - sub * old_coeffs).squaredNorm();
      const double new_err = (y.col(j) - sub * coeffs).squaredNorm();
      if (!not_worse(new_err, old_err, y.col(j).squaredNorm())) continue;
      for (std::size_t t = 0; t < support.size(); ++t) x.set(support[t], j, coeffs(static_cast<Index>(t)));
    }
    current = objective(y, a, x);
    out.trace.push(Phase::Amplitude, current);
  }
  out.a = std::move(a);
  out.x = std::move(x);
  return out;
}

BatchSvdResult batch_svd(const DenseMatrix& y, DenseMatrix a, SparseCoeff x, const LearnConfig& cfg) {
  require_valid(y, "batch_svd");
  require_valid(a, "batch_svd");
  if (y.rows() != a.rows() || a.cols() != x.atoms() || y.cols() != x.samples()) {
    throw InvalidArgument("batch_svd: shape mismatch");
  }
  const Index n = a.cols();
  cfg.validate(n, y.cols());
  const std::size_t budget = x.nnz();
  if (budget > static_cast<std::size_t>(cfg.budget)) {
    throw InvalidArgument("batch_svd: ||X||_0 = " + std::to_string(budget) + " exceeds the budget " +
                          std::to_string(cfg.budget));
  }

  Rng rng(cfg.seed);
  const double fraction = cfg.effective_pair_fraction(n);
  BatchSvdResult out;
  out.trace.set_scale(y.squaredNorm());
  DenseMatrix r = residual(y, a, x);
  out.trace.push(Phase::Outer, r.squaredNorm());

  for (int outer = 0; outer < cfg.max_outer; ++outer) {
    const double start = r.squaredNorm();

    // Busiest rows first.
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index l, Index rr) { return x.row_count(l) > x.row_count(rr); });
    for (const Index i : order) {
      if (x.row_count(i) == 0) continue;
      RowWorkspace ws = extract_row(a, x, i);
      add_row(r, ws, 1.0);
      InnerSwitchResult res = inner_row_switch(r, std::move(ws), cfg.inner_sweeps);
      store_row(res.ws, a, x);
      add_row(r, res.ws, -1.0);
      out.trace.push(Phase::Inner, r.squaredNorm());
    }
    normalize_atoms(a, x);

    if (start - r.squaredNorm() < cfg.trigger) {
      ++out.inter_phases;
      out.reseeded += reseed_dead_atoms(y, r, a, x);
      for (const auto& [i, j] : sample_pairs(n, fraction, rng)) {
        RowWorkspace wi = extract_row(a, x, i);
        RowWorkspace wj = extract_row(a, x, j);
        if (wi.coeffs.size() + wj.coeffs.size() == 0) continue;
        add_row(r, wi, 1.0);
        add_row(r, wj, 1.0);
        InterSwitchResult res = inter_row_switch(r, std::move(wi), std::move(wj));
        store_row(res.first, a, x);
        store_row(res.second, a, x);
        add_row(r, res.first, -1.0);
        add_row(r, res.second, -1.0);
        out.trace.push(Phase::Inter, r.squaredNorm());
      }
    }

    AmplitudeResult amp = amplitude_adjust(y, std::move(a), std::move(x), cfg.amplitude_iterations);
    a = std::move(amp.a);
    x = std::move(amp.x);
    const auto& steps = amp.trace.entries();
    for (std::size_t t = 1; t < steps.size(); ++t) out.trace.push(steps[t].phase, steps[t].value);

    r = residual(y, a, x);
    const double end = r.squaredNorm();
    if (!std::isfinite(end)) {
      throw NumericalError("batch_svd: objective became non-finite in outer iteration " +
                               std::to_string(outer + 1),
                           std::numeric_limits<double>::infinity());
    }
    if (x.nnz() != budget) throw std::logic_error("batch_svd: structural nonzero count changed");
    out.trace.push(Phase::Outer, end);
    ++out.outer_iterations;
    if (start - end <= cfg.epsilon) {
      out.stop_rule_fired = true;
      break;
    }
  }
  out.a = std::move(a);
  out.x = std::move(x);
  return out;
}

}  // namespace batchdl
