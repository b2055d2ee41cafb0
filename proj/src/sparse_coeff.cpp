#include "batchdl/sparse_coeff.hpp"

#include <stdexcept>
#include <string>

namespace batchdl {

SparseCoeff::SparseCoeff(Index atoms, Index samples) {
  if (atoms < 1 || samples < 1) throw InvalidArgument("SparseCoeff: dimensions must be positive");
  cols_.resize(static_cast<std::size_t>(samples));
  rows_.resize(static_cast<std::size_t>(atoms));
}

void SparseCoeff::check_position(Index row, Index col) const {
  if (row < 0 || row >= atoms() || col < 0 || col >= samples()) {
    throw InvalidArgument("SparseCoeff: position (" + std::to_string(row) + ", " +
                          std::to_string(col) + ") out of range");
  }
}

bool SparseCoeff::contains(Index row, Index col) const {
  check_position(row, col);
  return cols_[static_cast<std::size_t>(col)].contains(row);
}

double SparseCoeff::value(Index row, Index col) const {
  check_position(row, col);
  const auto& column = cols_[static_cast<std::size_t>(col)];
  const auto it = column.find(row);
  return it == column.end() ? 0.0 : it->second;
}

void SparseCoeff::set(Index row, Index col, double value) {
  check_position(row, col);
  auto [it, inserted] = cols_[static_cast<std::size_t>(col)].insert_or_assign(row, value);
  if (inserted) {
    rows_[static_cast<std::size_t>(row)].insert(col);
    ++nnz_;
  }
}

void SparseCoeff::erase(Index row, Index col) {
  check_position(row, col);
  if (cols_[static_cast<std::size_t>(col)].erase(row) > 0) {
    rows_[static_cast<std::size_t>(row)].erase(col);
    --nnz_;
  }
}

void SparseCoeff::clear_row(Index row) {
  check_position(row, 0);
  auto& support = rows_[static_cast<std::size_t>(row)];
  for (const Index col : support) cols_[static_cast<std::size_t>(col)].erase(row);
  nnz_ -= support.size();
  support.clear();
}

void SparseCoeff::scale_row(Index row, double factor) {
  check_position(row, 0);
  for (const Index col : rows_[static_cast<std::size_t>(row)]) {
    cols_[static_cast<std::size_t>(col)][row] *= factor;
  }
}

std::vector<Index> SparseCoeff::column_support(Index col) const {
  std::vector<Index> out;
  for (const auto& entry : column(col)) out.push_back(entry.first);
  return out;
}

std::vector<Triplet> SparseCoeff::triplets() const {
  std::vector<Triplet> out;
  out.reserve(nnz_);
  for (Index j = 0; j < samples(); ++j) {
    for (const auto& [i, v] : cols_[static_cast<std::size_t>(j)]) out.push_back({i, j, v});
  }
  return out;
}

DenseMatrix SparseCoeff::to_dense() const {
  DenseMatrix d = DenseMatrix::Zero(atoms(), samples());
  for (const auto& t : triplets()) d(t.row, t.col) = t.value;
  return d;
}

bool SparseCoeff::same_support(const SparseCoeff& other) const {
  if (atoms() != other.atoms() || samples() != other.samples()) return false;
  return rows_ == other.rows_;
}

void SparseCoeff::audit() const {
  std::size_t from_cols = 0;
  for (Index j = 0; j < samples(); ++j) {
    for (const auto& entry : cols_[static_cast<std::size_t>(j)]) {
      const Index i = entry.first;
      if (i < 0 || i >= atoms()) throw std::logic_error("SparseCoeff audit: row index out of range");
      if (!rows_[static_cast<std::size_t>(i)].contains(j)) {
        throw std::logic_error("SparseCoeff audit: entry missing from row view");
      }
      ++from_cols;
    }
  }
  std::size_t from_rows = 0;
  for (const auto& support : rows_) from_rows += support.size();
  if (from_cols != from_rows || from_cols != nnz_) {
    throw std::logic_error("SparseCoeff audit: row and column views disagree on the entry count");
  }
}

}  // namespace batchdl
