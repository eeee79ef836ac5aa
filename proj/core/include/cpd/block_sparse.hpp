#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/SparseCore>

#include "cpd/types.hpp"

namespace cpd {

class NeighborTable;

/// Block-compressed rows of 3x3 blocks. Row a holds the columns {a} and the
/// horizon of a in ascending order, so the pattern is symmetric.
class BlockCsr {
 public:
  BlockCsr() = default;
  static BlockCsr from_table(const NeighborTable& table);

  std::size_t block_rows() const { return row_ptr_.empty() ? 0 : row_ptr_.size() - 1; }
  std::size_t block_count() const { return cols_.size(); }
  std::size_t row_begin(std::size_t a) const { return row_ptr_[a]; }
  std::size_t row_end(std::size_t a) const { return row_ptr_[a + 1]; }
  PointId col(std::size_t idx) const { return cols_[idx]; }
  std::span<const PointId> cols(std::size_t a) const {
    return {cols_.data() + row_ptr_[a], cols_.data() + row_ptr_[a + 1]};
  }

  /// Block index of (a, b); throws invalid_argument if outside the pattern.
  std::size_t find(std::size_t a, std::size_t b) const;
  std::size_t diagonal(std::size_t a) const { return diag_[a]; }

  Mat3& block(std::size_t idx) { return vals_[idx]; }
  const Mat3& block(std::size_t idx) const { return vals_[idx]; }
  Mat3& at(std::size_t a, std::size_t b) { return vals_[find(a, b)]; }
  const Mat3& at(std::size_t a, std::size_t b) const { return vals_[find(a, b)]; }

  void set_zero();

  /// Largest absolute scalar entry.
  double max_abs() const;
  /// max |K - K^T| over scalar entries.
  double max_asymmetry() const;
  /// Scalar nonzero count per scalar row (entries exactly zero are skipped).
  std::vector<std::size_t> scalar_row_nonzeros() const;

  /// Full 3n x 3n scalar matrix.
  Eigen::SparseMatrix<double> to_sparse() const;
  /// Restriction to the DOFs with free_index >= 0, renumbered by that index.
  Eigen::SparseMatrix<double> to_sparse(std::span<const long> free_index, std::size_t n_free) const;

 private:
  std::vector<std::size_t> row_ptr_;
  std::vector<PointId> cols_;
  std::vector<std::size_t> diag_;
  std::vector<Mat3> vals_;
};

/// Writes `row,col,abs_value` for every structurally present scalar entry
/// whose value is nonzero.
void write_sparsity_csv(std::ostream& out, const BlockCsr& K);

}  // namespace cpd
