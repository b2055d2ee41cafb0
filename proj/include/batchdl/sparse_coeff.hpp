#pragma once

#include <map>
#include <set>
#include <vector>

#include "batchdl/linalg.hpp"

namespace batchdl {

struct Triplet {
  Index row;
  Index col;
  double value;
};

/// n x p coefficient matrix stored by structural support.
///
/// Every structural entry is visible both from its column (row -> value map)
/// and from its row (set of column indices). A structural entry may hold a
/// numerical zero; the budget counts structure, not values.
class SparseCoeff {
 public:
  using Column = std::map<Index, double>;
  using RowSupport = std::set<Index>;

  SparseCoeff() = default;
  SparseCoeff(Index atoms, Index samples);

  Index atoms() const noexcept { return static_cast<Index>(rows_.size()); }
  Index samples() const noexcept { return static_cast<Index>(cols_.size()); }
  std::size_t nnz() const noexcept { return nnz_; }

  bool contains(Index row, Index col) const;
  /// Stored value, or 0 for a non-structural position.
  double value(Index row, Index col) const;

  /// Inserts the position if absent.
  void set(Index row, Index col, double value);
  void erase(Index row, Index col);
  void clear_row(Index row);
  void scale_row(Index row, double factor);

  const RowSupport& row_support(Index row) const { return rows_.at(static_cast<std::size_t>(row)); }
  const Column& column(Index col) const { return cols_.at(static_cast<std::size_t>(col)); }
  std::vector<Index> column_support(Index col) const;
  Index row_count(Index row) const { return static_cast<Index>(row_support(row).size()); }

  /// Entries sorted by (col, row).
  std::vector<Triplet> triplets() const;
  DenseMatrix to_dense() const;

  /// True when both matrices have exactly the same structural positions.
  bool same_support(const SparseCoeff& other) const;

  /// Throws std::logic_error if the row and column views disagree.
  void audit() const;

 private:
  void check_position(Index row, Index col) const;

  std::vector<Column> cols_;
  std::vector<RowSupport> rows_;
  std::size_t nnz_ = 0;
};

}  // namespace batchdl
