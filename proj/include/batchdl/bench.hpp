#pragma once

#include <json.hpp>

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "batchdl/config.hpp"
#include "batchdl/linalg.hpp"
#include "batchdl/sparse_coeff.hpp"
#include "batchdl/trace.hpp"

namespace batchdl {

enum class Algo { Batch, Ksvd, RndOmp };

std::string_view algo_name(Algo algo);
/// Accepts "batch", "ksvd" and "rnd-omp".
Algo parse_algo(std::string_view name);

struct ErrorStats {
  double mean = 0.0;
  double std = 0.0;
};

/// Arithmetic mean and population standard deviation (denominator = count).
ErrorStats report_stats(std::span<const double> errors);

struct HeldOutReport {
  std::vector<double> per_sample_errors;
  double mean = 0.0;
  double std = 0.0;
  std::size_t total_nonzeros = 0;
};

struct ErrorReport {
  std::string algo;
  std::uint64_t seed = 0;
  Index m = 0;
  Index n = 0;
  Index p = 0;
  Index budget = 0;
  std::vector<double> per_sample_errors;
  double mean = 0.0;
  double std = 0.0;
  std::size_t total_nonzeros = 0;
  double avg_nonzeros_per_sample = 0.0;
  ObjectiveTrace trace;
  std::optional<HeldOutReport> held_out;
};

/// Builds a report from the final factorisation.
ErrorReport make_report(std::string_view algo, const DenseMatrix& y, const DenseMatrix& a,
                        const SparseCoeff& x, Index budget, std::uint64_t seed);

using OrderedJson = nlohmann::ordered_json;
OrderedJson to_json(const ErrorReport& report);

struct BenchmarkSetup {
  LearnConfig learn;
  Index atoms = 0;
  std::vector<Algo> algos{Algo::Batch, Algo::Ksvd, Algo::RndOmp};
  /// Columns encoded with each learned dictionary at the same average budget.
  std::optional<DenseMatrix> held_out;
};

struct LearnOutcome {
  DenseMatrix a;
  SparseCoeff x;
  ErrorReport report;
};

/// Per-sample sparsity used by the column-wise baselines: floor(K / p),
/// capped at min(m, n). Throws when it would be zero.
Index per_sample_sparsity(Index budget, Index m, Index n, Index p);

/// Runs one algorithm on Y. All algorithms draw the same seed-derived initial
/// dictionary where they need one.
LearnOutcome learn(const DenseMatrix& y, const BenchmarkSetup& setup, Algo algo);

/// One report per requested algorithm, in request order.
std::vector<ErrorReport> run_benchmark(const DenseMatrix& y, const BenchmarkSetup& setup);

/// Scales every nonzero column to unit Euclidean norm.
void normalize_columns(DenseMatrix& y);

}  // namespace batchdl
