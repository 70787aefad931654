#include "nsb/sparse_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace nsb {

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols, std::vector<int> row_offsets,
                           std::vector<int> col_indices, std::vector<double> values)
    : rows_(rows),
      cols_(cols),
      row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)),
      values_(std::move(values)) {
  if (row_offsets_.size() != rows_ + 1 || row_offsets_.front() != 0 ||
      static_cast<std::size_t>(row_offsets_.back()) != col_indices_.size() ||
      col_indices_.size() != values_.size()) {
    throw std::invalid_argument("SparseMatrix: inconsistent CSR arrays");
  }
  for (std::size_t r = 0; r < rows_; ++r) {
    for (int k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) {
      const int c = col_indices_[k];
      if (c < 0 || static_cast<std::size_t>(c) >= cols_ ||
          (k > row_offsets_[r] && col_indices_[k - 1] >= c)) {
        throw std::invalid_argument("SparseMatrix: row " + std::to_string(r) +
                                    " has out-of-range or unsorted column indices");
      }
    }
  }
}

SparseMatrix SparseMatrix::from_triplets(std::size_t rows, std::size_t cols,
                                         std::span<const Triplet> triplets) {
  std::vector<Triplet> t(triplets.begin(), triplets.end());
  for (const auto& e : t) {
    if (e.row < 0 || static_cast<std::size_t>(e.row) >= rows || e.col < 0 ||
        static_cast<std::size_t>(e.col) >= cols) {
      throw std::invalid_argument("SparseMatrix::from_triplets: index out of range");
    }
  }
  std::sort(t.begin(), t.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  std::vector<int> offsets(rows + 1, 0);
  std::vector<int> colind;
  std::vector<double> vals;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (k > 0 && t[k].row == t[k - 1].row && t[k].col == t[k - 1].col) {
      vals.back() += t[k].value;
      continue;
    }
    colind.push_back(t[k].col);
    vals.push_back(t[k].value);
    ++offsets[t[k].row + 1];
  }
  std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
  return SparseMatrix(rows, cols, std::move(offsets), std::move(colind), std::move(vals));
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
  std::vector<int> offsets(n + 1);
  std::vector<int> colind(n);
  std::iota(offsets.begin(), offsets.end(), 0);
  std::iota(colind.begin(), colind.end(), 0);
  return SparseMatrix(n, n, std::move(offsets), std::move(colind), std::vector<double>(n, 1.0));
}

SparseMatrix SparseMatrix::from_blocks(const std::vector<std::vector<const SparseMatrix*>>& blocks,
                                       const std::vector<std::size_t>& row_sizes,
                                       const std::vector<std::size_t>& col_sizes) {
  if (blocks.size() != row_sizes.size()) {
    throw std::invalid_argument("SparseMatrix::from_blocks: block row count mismatch");
  }
  std::vector<std::size_t> col_start(col_sizes.size() + 1, 0);
  for (std::size_t j = 0; j < col_sizes.size(); ++j) col_start[j + 1] = col_start[j] + col_sizes[j];
  const std::size_t total_rows = std::accumulate(row_sizes.begin(), row_sizes.end(), std::size_t{0});

  std::vector<int> offsets{0};
  offsets.reserve(total_rows + 1);
  std::vector<int> colind;
  std::vector<double> vals;
  for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
    if (blocks[bi].size() != col_sizes.size()) {
      throw std::invalid_argument("SparseMatrix::from_blocks: ragged block row");
    }
    for (std::size_t bj = 0; bj < col_sizes.size(); ++bj) {
      const SparseMatrix* b = blocks[bi][bj];
      if (b && (b->rows() != row_sizes[bi] || b->cols() != col_sizes[bj])) {
        throw std::invalid_argument("SparseMatrix::from_blocks: block (" + std::to_string(bi) +
                                    ", " + std::to_string(bj) + ") has wrong shape");
      }
    }
    for (std::size_t r = 0; r < row_sizes[bi]; ++r) {
      for (std::size_t bj = 0; bj < col_sizes.size(); ++bj) {
        const SparseMatrix* b = blocks[bi][bj];
        if (!b) continue;
        for (int k = b->row_offsets_[r]; k < b->row_offsets_[r + 1]; ++k) {
          colind.push_back(static_cast<int>(col_start[bj]) + b->col_indices_[k]);
          vals.push_back(b->values_[k]);
        }
      }
      offsets.push_back(static_cast<int>(colind.size()));
    }
  }
  return SparseMatrix(total_rows, col_start.back(), std::move(offsets), std::move(colind),
                      std::move(vals));
}

double SparseMatrix::coeff(std::size_t r, std::size_t c) const {
  const auto first = col_indices_.begin() + row_offsets_[r];
  const auto last = col_indices_.begin() + row_offsets_[r + 1];
  const auto it = std::lower_bound(first, last, static_cast<int>(c));
  if (it == last || *it != static_cast<int>(c)) return 0.0;
  return values_[it - col_indices_.begin()];
}

double* SparseMatrix::find(std::size_t r, std::size_t c) {
  const auto first = col_indices_.begin() + row_offsets_[r];
  const auto last = col_indices_.begin() + row_offsets_[r + 1];
  const auto it = std::lower_bound(first, last, static_cast<int>(c));
  if (it == last || *it != static_cast<int>(c)) return nullptr;
  return &values_[it - col_indices_.begin()];
}

void SparseMatrix::add(std::size_t r, std::size_t c, double v) {
  double* p = find(r, c);
  if (!p) {
    throw std::out_of_range("SparseMatrix::add: (" + std::to_string(r) + ", " +
                            std::to_string(c) + ") not in pattern");
  }
  *p += v;
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  if (x.size() != cols_ || y.size() != rows_) {
    throw std::invalid_argument("SparseMatrix::multiply: dimension mismatch");
  }
  for (std::size_t r = 0; r < rows_; ++r) {
    double s = 0.0;
    for (int k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) s += values_[k] * x[col_indices_[k]];
    y[r] = s;
  }
}

std::vector<double> SparseMatrix::multiply(std::span<const double> x) const {
  std::vector<double> y(rows_);
  multiply(x, y);
  return y;
}

SparseMatrix SparseMatrix::transpose() const {
  std::vector<int> offsets(cols_ + 1, 0);
  for (int c : col_indices_) ++offsets[c + 1];
  std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
  std::vector<int> next(offsets.begin(), offsets.end() - 1);
  std::vector<int> colind(values_.size());
  std::vector<double> vals(values_.size());
  for (std::size_t r = 0; r < rows_; ++r) {
    for (int k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) {
      const int dst = next[col_indices_[k]]++;
      colind[dst] = static_cast<int>(r);
      vals[dst] = values_[k];
    }
  }
  return SparseMatrix(cols_, rows_, std::move(offsets), std::move(colind), std::move(vals));
}

void SparseMatrix::scale(double alpha) {
  for (double& v : values_) v *= alpha;
}

void SparseMatrix::set_zero() { std::fill(values_.begin(), values_.end(), 0.0); }

SparseMatrix SparseMatrix::combine(double alpha, const SparseMatrix& a, double beta,
                                   const SparseMatrix& b) {
  if (a.rows_ != b.rows_ || a.cols_ != b.cols_) {
    throw std::invalid_argument("SparseMatrix::combine: shape mismatch");
  }
  std::vector<int> offsets{0};
  std::vector<int> colind;
  std::vector<double> vals;
  for (std::size_t r = 0; r < a.rows_; ++r) {
    int i = a.row_offsets_[r];
    int j = b.row_offsets_[r];
    const int ie = a.row_offsets_[r + 1];
    const int je = b.row_offsets_[r + 1];
    while (i < ie || j < je) {
      if (j >= je || (i < ie && a.col_indices_[i] < b.col_indices_[j])) {
        colind.push_back(a.col_indices_[i]);
        vals.push_back(alpha * a.values_[i++]);
      } else if (i >= ie || b.col_indices_[j] < a.col_indices_[i]) {
        colind.push_back(b.col_indices_[j]);
        vals.push_back(beta * b.values_[j++]);
      } else {
        colind.push_back(a.col_indices_[i]);
        vals.push_back(alpha * a.values_[i++] + beta * b.values_[j++]);
      }
    }
    offsets.push_back(static_cast<int>(colind.size()));
  }
  return SparseMatrix(a.rows_, a.cols_, std::move(offsets), std::move(colind), std::move(vals));
}

std::vector<std::vector<double>> SparseMatrix::to_dense() const {
  std::vector<std::vector<double>> d(rows_, std::vector<double>(cols_, 0.0));
  for (std::size_t r = 0; r < rows_; ++r) {
    for (int k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) d[r][col_indices_[k]] = values_[k];
  }
  return d;
}

SparseMatrix build_pattern(
    std::size_t rows, std::size_t cols, std::size_t num_cells,
    const std::function<void(std::size_t, std::vector<int>&, std::vector<int>&)>& cell_couplings) {
  // Row -> cells adjacency, then one sorted column set per row.
  std::vector<int> row_cells_offsets(rows + 1, 0);
  std::vector<int> rbuf, cbuf;
  for (std::size_t t = 0; t < num_cells; ++t) {
    rbuf.clear();
    cbuf.clear();
    cell_couplings(t, rbuf, cbuf);
    for (int r : rbuf) ++row_cells_offsets[r + 1];
  }
  std::partial_sum(row_cells_offsets.begin(), row_cells_offsets.end(), row_cells_offsets.begin());
  std::vector<int> row_cells(row_cells_offsets.back());
  std::vector<int> fill(row_cells_offsets.begin(), row_cells_offsets.end() - 1);
  for (std::size_t t = 0; t < num_cells; ++t) {
    rbuf.clear();
    cbuf.clear();
    cell_couplings(t, rbuf, cbuf);
    for (int r : rbuf) row_cells[fill[r]++] = static_cast<int>(t);
  }

  std::vector<int> offsets{0};
  offsets.reserve(rows + 1);
  std::vector<int> colind;
  std::vector<int> row_cols;
  for (std::size_t r = 0; r < rows; ++r) {
    row_cols.clear();
    for (int k = row_cells_offsets[r]; k < row_cells_offsets[r + 1]; ++k) {
      rbuf.clear();
      cbuf.clear();
      cell_couplings(row_cells[k], rbuf, cbuf);
      row_cols.insert(row_cols.end(), cbuf.begin(), cbuf.end());
    }
    std::sort(row_cols.begin(), row_cols.end());
    row_cols.erase(std::unique(row_cols.begin(), row_cols.end()), row_cols.end());
    colind.insert(colind.end(), row_cols.begin(), row_cols.end());
    offsets.push_back(static_cast<int>(colind.size()));
  }
  std::vector<double> vals(colind.size(), 0.0);
  return SparseMatrix(rows, cols, std::move(offsets), std::move(colind), std::move(vals));
}

void apply_dirichlet(SparseMatrix& a, std::vector<double>& rhs, std::span<const int> dofs,
                     std::span<const double> values) {
  if (a.rows() != a.cols() || rhs.size() != a.rows() || dofs.size() != values.size()) {
    throw std::invalid_argument("apply_dirichlet: dimension mismatch");
  }
  for (int d : dofs) {
    if (d < 0 || static_cast<std::size_t>(d) >= a.rows() || !a.find(d, d)) {
      throw std::invalid_argument("apply_dirichlet: missing diagonal entry");
    }
  }
  std::vector<char> fixed(a.rows(), 0);
  std::vector<double> g(a.rows(), 0.0);
  for (std::size_t k = 0; k < dofs.size(); ++k) {
    fixed[dofs[k]] = 1;
    g[dofs[k]] = values[k];
  }
  const auto offsets = a.row_offsets();
  const auto colind = a.col_indices();
  auto vals = a.values();
  for (std::size_t r = 0; r < a.rows(); ++r) {
    if (fixed[r]) {
      for (int k = offsets[r]; k < offsets[r + 1]; ++k) {
        vals[k] = colind[k] == static_cast<int>(r) ? 1.0 : 0.0;
      }
      rhs[r] = g[r];
      continue;
    }
    for (int k = offsets[r]; k < offsets[r + 1]; ++k) {
      if (fixed[colind[k]]) {
        rhs[r] -= vals[k] * g[colind[k]];
        vals[k] = 0.0;
      }
    }
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

}  // namespace nsb
