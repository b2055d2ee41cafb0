#pragma once

#include <cstdint>
#include <optional>

#include "batchdl/linalg.hpp"

namespace batchdl {

/// Solver hyperparameters. Defaults follow the image-patch experiments
/// (20 outer iterations, N1 = 3, N2 = 10, inter-row trigger 0.05).
struct LearnConfig {
  Index budget = 1;          // K: total structural nonzeros in X
  int init_iterations = 80;  // T: block-OMP / least-squares alternations
  int inner_sweeps = 3;      // N1: inner-row iterations per row visit
  int amplitude_iterations = 10;  // N2
  double epsilon = 1e-6;     // stop when an outer iteration gains no more than this
  double trigger = 0.05;     // run inter-row switching when the inner phase gains less
  /// Fraction of the n(n-1)/2 row pairs visited per inter-row phase. Unset: 1
  /// for n <= 64, otherwise about 2n pairs.
  std::optional<double> pair_fraction;
  std::uint64_t seed = 0;
  int max_outer = 20;

  /// Throws InvalidArgument when a field is out of range for an n x p problem.
  void validate(Index atoms, Index samples) const;
  double effective_pair_fraction(Index atoms) const;
};

}  // namespace batchdl
