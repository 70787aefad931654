#pragma once

#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nsb/sparse_matrix.hpp"

namespace nsb {

enum class SolverMethod { direct_lu, gmres };

struct SolverOptions {
  SolverMethod method = SolverMethod::direct_lu;
  double tolerance = 1e-10;  // relative residual ||Ax - b|| / ||b||
  int max_iterations = 2000;
  int restart = 100;
  // Incomplete LU preconditioner for gmres.
  double ilu_drop_tolerance = 1e-5;
  int ilu_fill_factor = 20;

  /// Throws std::invalid_argument for non-positive tolerance or iteration counts.
  void validate() const;
};

struct SolveReport {
  bool converged = false;
  int iterations = 0;
  double relative_residual = 0.0;
};

struct SolveResult {
  std::vector<double> x;
  SolveReport report;
};

class SingularMatrixError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sparse LU factorization (UMFPACK) reusable across right-hand sides.
/// Throws SingularMatrixError when the matrix is singular.
class LuFactorization {
 public:
  explicit LuFactorization(const SparseMatrix& a);
  ~LuFactorization();
  LuFactorization(LuFactorization&&) noexcept;
  LuFactorization& operator=(LuFactorization&&) noexcept;
  LuFactorization(const LuFactorization&) = delete;
  LuFactorization& operator=(const LuFactorization&) = delete;

  /// New numeric factorization of a matrix with the same sparsity pattern,
  /// reusing the symbolic analysis.
  void refactor(const SparseMatrix& a);

  std::vector<double> solve(std::span<const double> b) const;
  std::size_t size() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Solves A x = b. Non-convergence of the iterative path is reported, not
/// thrown; dimension mismatches throw std::invalid_argument and a singular
/// matrix under direct_lu throws SingularMatrixError.
SolveResult linear_solve(const SparseMatrix& a, std::span<const double> b,
                         const SolverOptions& opts = {});

double relative_residual(const SparseMatrix& a, std::span<const double> x,
                         std::span<const double> b);

}  // namespace nsb
