#include "batchdl/bench.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "batchdl/batch_svd.hpp"
#include "batchdl/random.hpp"
#include "batchdl/sparse_coding.hpp"

namespace batchdl {

std::string_view algo_name(Algo algo) {
  switch (algo) {
    case Algo::Batch:
      return "batch";
    case Algo::Ksvd:
      return "ksvd";
    case Algo::RndOmp:
      return "rnd-omp";
  }
  return "unknown";
}

Algo parse_algo(std::string_view name) {
  if (name == "batch") return Algo::Batch;
  if (name == "ksvd") return Algo::Ksvd;
  if (name == "rnd-omp") return Algo::RndOmp;
  throw InvalidArgument("unknown algorithm '" + std::string(name) + "' (expected batch, ksvd or rnd-omp)");
}

ErrorStats report_stats(std::span<const double> errors) {
  if (errors.empty()) throw InvalidArgument("report_stats: empty error list");
  // Welford's running update.
  double mean = 0.0;
  double m2 = 0.0;
  std::size_t count = 0;
  for (const double e : errors) {
    ++count;
    const double delta = e - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (e - mean);
  }
  return {mean, std::sqrt(std::max(0.0, m2 / static_cast<double>(count)))};
}

ErrorReport make_report(std::string_view algo, const DenseMatrix& y, const DenseMatrix& a,
                        const SparseCoeff& x, Index budget, std::uint64_t seed) {
  ErrorReport report;
  report.algo = std::string(algo);
  report.seed = seed;
  report.m = y.rows();
  report.n = a.cols();
  report.p = y.cols();
  report.budget = budget;
  const Vector errors = column_errors(y, a, x);
  report.per_sample_errors.assign(errors.data(), errors.data() + errors.size());
  const ErrorStats stats = report_stats(report.per_sample_errors);
  report.mean = stats.mean;
  report.std = stats.std;
  report.total_nonzeros = x.nnz();
  report.avg_nonzeros_per_sample = static_cast<double>(x.nnz()) / static_cast<double>(y.cols());
  return report;
}

OrderedJson to_json(const ErrorReport& report) {
  OrderedJson j;
  j["algo"] = report.algo;
  j["seed"] = report.seed;
  j["m"] = report.m;
  j["n"] = report.n;
  j["p"] = report.p;
  j["K"] = report.budget;
  j["mean_error"] = report.mean;
  j["std_error"] = report.std;
  j["total_nnz"] = report.total_nonzeros;
  j["avg_nnz_per_sample"] = report.avg_nonzeros_per_sample;
  OrderedJson trace = OrderedJson::array();
  for (const auto& e : report.trace.entries()) trace.push_back({std::string(phase_name(e.phase)), e.value});
  j["objective_trace"] = std::move(trace);
  if (report.held_out) {
    j["heldout"] = {
        {"p", report.held_out->per_sample_errors.size()},
        {"mean_error", report.held_out->mean},
        {"std_error", report.held_out->std},
        {"total_nnz", report.held_out->total_nonzeros},
    };
  }
  return j;
}

Index per_sample_sparsity(Index budget, Index m, Index n, Index p) {
  const Index k = budget / p;
  if (k < 1) {
    throw InvalidArgument("budget K = " + std::to_string(budget) + " is below one nonzero per sample (p = " +
                          std::to_string(p) + ")");
  }
  return std::min(k, std::min(m, n));
}

void normalize_columns(DenseMatrix& y) {
  for (Index j = 0; j < y.cols(); ++j) {
    const double norm = y.col(j).norm();
    if (norm > 0.0) y.col(j) /= norm;
  }
}

namespace {

constexpr std::uint64_t kRandomDictionaryStream = 0x9e3779b97f4a7c15ULL;

DenseMatrix gaussian_dictionary(Index m, Index n, std::uint64_t seed) {
  Rng rng(seed ^ kRandomDictionaryStream);
  DenseMatrix a(m, n);
  for (Index i = 0; i < n; ++i) {
    for (Index r = 0; r < m; ++r) a(r, i) = rng.normal();
    a.col(i).normalize();
  }
  return a;
}

SparseCoeff encode_per_sample(const DenseMatrix& y, const DenseMatrix& a, Index k) {
  SparseCoeff x(a.cols(), y.cols());
  for (Index j = 0; j < y.cols(); ++j) {
    const OmpResult code = omp(y.col(j), a, k);
    for (std::size_t t = 0; t < code.support.size(); ++t) {
      x.set(code.support[t], j, code.coeffs(static_cast<Index>(t)));
    }
  }
  return x;
}

HeldOutReport evaluate_held_out(const DenseMatrix& held, const DenseMatrix& a, Algo algo, Index budget,
                                Index train_samples) {
  if (held.rows() != a.rows()) throw InvalidArgument("held-out samples have the wrong dimension");
  SparseCoeff x;
  if (algo == Algo::Batch) {
    const Index scaled = budget * held.cols() / train_samples;
    x = block_omp(held, a, std::clamp<Index>(scaled, 1, a.cols() * held.cols())).x;
  } else {
    x = encode_per_sample(held, a, per_sample_sparsity(budget, a.rows(), a.cols(), train_samples));
  }
  HeldOutReport out;
  const Vector errors = column_errors(held, a, x);
  out.per_sample_errors.assign(errors.data(), errors.data() + errors.size());
  const ErrorStats stats = report_stats(out.per_sample_errors);
  out.mean = stats.mean;
  out.std = stats.std;
  out.total_nonzeros = x.nnz();
  return out;
}

}  // namespace

LearnOutcome learn(const DenseMatrix& y, const BenchmarkSetup& setup, Algo algo) {
  require_valid(y, "learn");
  const LearnConfig& cfg = setup.learn;
  const Index m = y.rows();
  const Index n = setup.atoms;
  const Index p = y.cols();
  if (n < 1) throw InvalidArgument("learn: number of atoms must be at least 1");
  cfg.validate(n, p);

  LearnOutcome out;
  ObjectiveTrace trace(y.squaredNorm());
  switch (algo) {
    case Algo::Batch: {
      const DictApproxResult init = dict_approx_init(y, initial_dictionary(y, n, cfg.seed), cfg.budget,
                                                     cfg.init_iterations);
      BatchSvdResult res = batch_svd(y, init.a, init.x, cfg);
      normalize_atoms(res.a, res.x);
      trace.append(init.trace);
      trace.append(res.trace);
      out.a = std::move(res.a);
      out.x = std::move(res.x);
      break;
    }
    case Algo::Ksvd: {
      const Index k = per_sample_sparsity(cfg.budget, m, n, p);
      KsvdResult res = ksvd(y, initial_dictionary(y, n, cfg.seed), k, cfg.max_outer);
      trace.append(res.trace);
      out.a = std::move(res.a);
      out.x = std::move(res.x);
      break;
    }
    case Algo::RndOmp: {
      const Index k = per_sample_sparsity(cfg.budget, m, n, p);
      out.a = gaussian_dictionary(m, n, cfg.seed);
      out.x = encode_per_sample(y, out.a, k);
      trace.push(Phase::Code, objective(y, out.a, out.x));
      break;
    }
  }
  out.report = make_report(algo_name(algo), y, out.a, out.x, cfg.budget, cfg.seed);
  out.report.trace = std::move(trace);
  if (setup.held_out) {
    out.report.held_out = evaluate_held_out(*setup.held_out, out.a, algo, cfg.budget, p);
  }
  return out;
}

std::vector<ErrorReport> run_benchmark(const DenseMatrix& y, const BenchmarkSetup& setup) {
  require_valid(y, "run_benchmark");
  setup.learn.validate(setup.atoms, y.cols());
  for (const Algo algo : setup.algos) {
    if (algo != Algo::Batch) per_sample_sparsity(setup.learn.budget, y.rows(), setup.atoms, y.cols());
  }
  std::vector<ErrorReport> reports;
  for (const Algo algo : setup.algos) reports.push_back(learn(y, setup, algo).report);
  return reports;
}

}  // namespace batchdl
