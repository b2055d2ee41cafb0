#include "batchdl/config.hpp"

#include <string>

namespace batchdl {

void LearnConfig::validate(Index atoms, Index samples) const {
  if (atoms < 1 || samples < 1) throw InvalidArgument("LearnConfig: empty problem");
  if (budget < 1) throw InvalidArgument("LearnConfig: budget K must be at least 1");
  if (budget > atoms * samples) {
    throw InvalidArgument("LearnConfig: budget K = " + std::to_string(budget) +
                          " exceeds n*p = " + std::to_string(atoms * samples));
  }
  if (init_iterations < 1 || inner_sweeps < 1 || amplitude_iterations < 1 || max_outer < 1) {
    throw InvalidArgument("LearnConfig: iteration counts must be at least 1");
  }
  if (!(epsilon >= 0.0)) throw InvalidArgument("LearnConfig: epsilon must be non-negative");
  if (!(trigger >= 0.0)) throw InvalidArgument("LearnConfig: trigger must be non-negative");
  if (pair_fraction && !(*pair_fraction > 0.0 && *pair_fraction <= 1.0)) {
    throw InvalidArgument("LearnConfig: pair fraction must lie in (0, 1]");
  }
}

double LearnConfig::effective_pair_fraction(Index atoms) const {
  if (pair_fraction) return *pair_fraction;
  if (atoms <= 64) return 1.0;
  return 2.0 / static_cast<double>(atoms - 1);
}

}  // namespace batchdl
