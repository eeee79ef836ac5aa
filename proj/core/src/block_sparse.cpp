#include "cpd/block_sparse.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "cpd/error.hpp"
#include "cpd/geometry.hpp"

namespace cpd {

BlockCsr BlockCsr::from_table(const NeighborTable& table) {
  const std::size_t n = table.size();
  BlockCsr m;
  m.row_ptr_.assign(n + 1, 0);
  m.diag_.resize(n);
  m.cols_.reserve(table.total_bonds() + n);
  for (std::size_t a = 0; a < n; ++a) {
    const auto nb = table.neighbors(a);
    const auto pos = std::lower_bound(nb.begin(), nb.end(), static_cast<PointId>(a));
    m.cols_.insert(m.cols_.end(), nb.begin(), pos);
    m.diag_[a] = m.cols_.size();
    m.cols_.push_back(static_cast<PointId>(a));
    m.cols_.insert(m.cols_.end(), pos, nb.end());
    m.row_ptr_[a + 1] = m.cols_.size();
  }
  m.vals_.assign(m.cols_.size(), Mat3::Zero());
  return m;
}

std::size_t BlockCsr::find(std::size_t a, std::size_t b) const {
  const auto begin = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[a]);
  const auto end = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[a + 1]);
  const auto it = std::lower_bound(begin, end, static_cast<PointId>(b));
  if (it == end || *it != b) throw Error(ErrorCode::invalid_argument, "block outside sparsity pattern");
  return static_cast<std::size_t>(it - cols_.begin());
}

void BlockCsr::set_zero() { std::fill(vals_.begin(), vals_.end(), Mat3::Zero()); }

double BlockCsr::max_abs() const {
  double m = 0.0;
  for (const Mat3& b : vals_) m = std::max(m, b.cwiseAbs().maxCoeff());
  return m;
}

double BlockCsr::max_asymmetry() const {
  double m = 0.0;
  for (std::size_t a = 0; a < block_rows(); ++a) {
    for (std::size_t idx = row_ptr_[a]; idx < row_ptr_[a + 1]; ++idx) {
      const std::size_t b = cols_[idx];
      if (b < a) continue;
      const Mat3& kab = vals_[idx];
      const Mat3& kba = vals_[find(b, a)];
      m = std::max(m, (kab - kba.transpose()).cwiseAbs().maxCoeff());
    }
  }
  return m;
}

std::vector<std::size_t> BlockCsr::scalar_row_nonzeros() const {
  std::vector<std::size_t> counts(3 * block_rows(), 0);
  for (std::size_t a = 0; a < block_rows(); ++a) {
    for (std::size_t idx = row_ptr_[a]; idx < row_ptr_[a + 1]; ++idx) {
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
          if (vals_[idx](r, c) != 0.0) ++counts[3 * a + r];
        }
      }
    }
  }
  return counts;
}

Eigen::SparseMatrix<double> BlockCsr::to_sparse() const {
  std::vector<long> all(3 * block_rows());
  for (std::size_t k = 0; k < all.size(); ++k) all[k] = static_cast<long>(k);
  return to_sparse(all, all.size());
}

Eigen::SparseMatrix<double> BlockCsr::to_sparse(std::span<const long> free_index, std::size_t n_free) const {
  // Column-major assembly: column (b, c) collects rows of every block (a, b).
  // The pattern is symmetric, so column b's block rows are the columns of row b.
  Eigen::SparseMatrix<double> S(static_cast<Eigen::Index>(n_free), static_cast<Eigen::Index>(n_free));
  std::vector<Eigen::Index> nnz(n_free, 0);
  for (std::size_t b = 0; b < block_rows(); ++b) {
    for (int c = 0; c < 3; ++c) {
      const long j = free_index[3 * b + c];
      if (j < 0) continue;
      Eigen::Index count = 0;
      for (PointId a : cols(b)) {
        for (int r = 0; r < 3; ++r) count += free_index[3 * a + r] >= 0 ? 1 : 0;
      }
      nnz[static_cast<std::size_t>(j)] = count;
    }
  }
  S.reserve(nnz);
  for (std::size_t b = 0; b < block_rows(); ++b) {
    for (int c = 0; c < 3; ++c) {
      const long j = free_index[3 * b + c];
      if (j < 0) continue;
      for (PointId a : cols(b)) {
        const Mat3& blk = vals_[find(a, b)];
        for (int r = 0; r < 3; ++r) {
          const long i = free_index[3 * a + r];
          if (i >= 0) S.insert(i, j) = blk(r, c);
        }
      }
    }
  }
  S.makeCompressed();
  return S;
}

void write_sparsity_csv(std::ostream& out, const BlockCsr& K) {
  out << "row,col,abs_value\n";
  out.precision(17);
  for (std::size_t a = 0; a < K.block_rows(); ++a) {
    for (std::size_t idx = K.row_begin(a); idx < K.row_end(a); ++idx) {
      const std::size_t b = K.col(idx);
      const Mat3& blk = K.block(idx);
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
          if (blk(r, c) != 0.0) out << 3 * a + r << ',' << 3 * b + c << ',' << std::abs(blk(r, c)) << '\n';
        }
      }
    }
  }
}

}  // namespace cpd
