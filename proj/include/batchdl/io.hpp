#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "batchdl/linalg.hpp"
#include "batchdl/sparse_coeff.hpp"

namespace batchdl {

// Dense text format: "rows cols" on the first line, then one line per matrix
// row with space-separated values. Values are written in shortest round-trip
// form, so save followed by load reproduces every bit.
DenseMatrix read_matrix(std::istream& in);
void write_matrix(std::ostream& out, const DenseMatrix& m);
DenseMatrix load_matrix(const std::filesystem::path& path);
void save_matrix(const std::filesystem::path& path, const DenseMatrix& m);

// Sparse text format: "n p nnz", then nnz lines "row col value" with 1-based
// indices sorted by (col, row).
SparseCoeff read_sparse(std::istream& in);
void write_sparse(std::ostream& out, const SparseCoeff& x);
SparseCoeff load_sparse(const std::filesystem::path& path);
void save_sparse(const std::filesystem::path& path, const SparseCoeff& x);

/// 8-bit grayscale raster, row-major.
struct GrayImage {
  Index width = 0;
  Index height = 0;
  int max_value = 255;
  std::vector<std::uint8_t> pixels;

  std::uint8_t at(Index row, Index col) const {
    return pixels[static_cast<std::size_t>(row * width + col)];
  }
};

/// PGM reader for P2 (ASCII) and P5 (binary) with maxval <= 255.
GrayImage read_pgm(std::istream& in);
GrayImage load_pgm(const std::filesystem::path& path);
/// Writes binary P5.
void save_pgm(const std::filesystem::path& path, const GrayImage& image);

struct PatchSpec {
  Index patch_size = 8;
  Index patch_count = 3000;
  std::uint64_t seed = 0;
};

/// Samples overlapping square patches with uniformly drawn top-left corners.
/// Column j is patch j vectorised column-major, pixel values divided by maxval.
DenseMatrix extract_patches(const GrayImage& image, const PatchSpec& spec);

}  // namespace batchdl
