#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace nsb {

struct Triplet {
  int row;
  int col;
  double value;
};

/// Compressed-row matrix. Column indices are strictly increasing within each
/// row; stored entries may be zero.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  /// Throws std::invalid_argument if the arrays are inconsistent or a row is
  /// not strictly increasing.
  SparseMatrix(std::size_t rows, std::size_t cols, std::vector<int> row_offsets,
               std::vector<int> col_indices, std::vector<double> values);

  /// Duplicate (row, col) entries are summed.
  static SparseMatrix from_triplets(std::size_t rows, std::size_t cols,
                                    std::span<const Triplet> triplets);
  static SparseMatrix identity(std::size_t n);
  /// Block composition; null blocks are empty. All blocks in a block row share
  /// a row count and all blocks in a block column share a column count, which
  /// `row_sizes` / `col_sizes` give explicitly.
  static SparseMatrix from_blocks(const std::vector<std::vector<const SparseMatrix*>>& blocks,
                                  const std::vector<std::size_t>& row_sizes,
                                  const std::vector<std::size_t>& col_sizes);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }

  std::span<const int> row_offsets() const { return row_offsets_; }
  std::span<const int> col_indices() const { return col_indices_; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  /// Value at (r, c); zero when not stored.
  double coeff(std::size_t r, std::size_t c) const;
  /// Pointer to the stored entry or nullptr.
  double* find(std::size_t r, std::size_t c);
  /// Adds to a stored entry; throws std::out_of_range if absent from the pattern.
  void add(std::size_t r, std::size_t c, double v);

  void multiply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> multiply(std::span<const double> x) const;

  SparseMatrix transpose() const;
  void scale(double alpha);
  void set_zero();
  /// alpha*A + beta*B over the union pattern.
  static SparseMatrix combine(double alpha, const SparseMatrix& a, double beta,
                              const SparseMatrix& b);

  std::vector<std::vector<double>> to_dense() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<int> row_offsets_{0};
  std::vector<int> col_indices_;
  std::vector<double> values_;
};

/// Builds a zero-valued pattern from per-cell couplings: every row listed for
/// a cell couples with every column listed for that cell.
SparseMatrix build_pattern(
    std::size_t rows, std::size_t cols, std::size_t num_cells,
    const std::function<void(std::size_t cell, std::vector<int>& rows, std::vector<int>& cols)>&
        cell_couplings);

/// Symmetric elimination of Dirichlet dofs. Known values are moved to the
/// right-hand side; the constrained rows and columns become identity.
void apply_dirichlet(SparseMatrix& a, std::vector<double>& rhs, std::span<const int> dofs,
                     std::span<const double> values);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

}  // namespace nsb
