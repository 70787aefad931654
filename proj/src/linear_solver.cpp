#include "nsb/linear_solver.hpp"

#include <umfpack.h>

#include <algorithm>

#include <Eigen/Sparse>
#include <unsupported/Eigen/IterativeSolvers>

namespace nsb {

void SolverOptions::validate() const {
  if (!(tolerance > 0.0)) throw std::invalid_argument("SolverOptions: tolerance must be > 0");
  if (max_iterations < 1) throw std::invalid_argument("SolverOptions: max_iterations must be >= 1");
  if (restart < 1) throw std::invalid_argument("SolverOptions: restart must be >= 1");
}

// UMFPACK is column-oriented; the CSR arrays of A are the CSC arrays of A^T,
// so every solve uses the transposed system flag.
struct LuFactorization::Impl {
  std::vector<SuiteSparse_long> ap;
  std::vector<SuiteSparse_long> ai;
  std::vector<double> ax;
  SuiteSparse_long n = 0;
  void* symbolic = nullptr;
  void* numeric = nullptr;

  ~Impl() {
    if (numeric) umfpack_dl_free_numeric(&numeric);
    if (symbolic) umfpack_dl_free_symbolic(&symbolic);
  }

  void factor() {
    double control[UMFPACK_CONTROL];
    double info[UMFPACK_INFO];
    umfpack_dl_defaults(control);
    if (numeric) umfpack_dl_free_numeric(&numeric);
    const SuiteSparse_long status =
        umfpack_dl_numeric(ap.data(), ai.data(), ax.data(), symbolic, &numeric, control, info);
    if (status == UMFPACK_WARNING_singular_matrix) {
      throw SingularMatrixError("LuFactorization: matrix is singular");
    }
    if (status != UMFPACK_OK) {
      throw std::runtime_error("LuFactorization: numeric factorization failed (status " +
                               std::to_string(status) + ")");
    }
  }
};

LuFactorization::LuFactorization(const SparseMatrix& a) : impl_(std::make_unique<Impl>()) {
  if (a.rows() != a.cols()) throw std::invalid_argument("LuFactorization: matrix is not square");
  Impl& m = *impl_;
  m.n = static_cast<SuiteSparse_long>(a.rows());
  m.ap.assign(a.row_offsets().begin(), a.row_offsets().end());
  m.ai.assign(a.col_indices().begin(), a.col_indices().end());
  m.ax.assign(a.values().begin(), a.values().end());

  double control[UMFPACK_CONTROL];
  double info[UMFPACK_INFO];
  umfpack_dl_defaults(control);
  const SuiteSparse_long status = umfpack_dl_symbolic(m.n, m.n, m.ap.data(), m.ai.data(),
                                                      m.ax.data(), &m.symbolic, control, info);
  if (status != UMFPACK_OK) {
    throw SingularMatrixError("LuFactorization: symbolic analysis failed (status " +
                              std::to_string(status) + ")");
  }
  m.factor();
}

void LuFactorization::refactor(const SparseMatrix& a) {
  Impl& m = *impl_;
  if (static_cast<SuiteSparse_long>(a.rows()) != m.n || a.nnz() != m.ax.size() ||
      !std::equal(a.col_indices().begin(), a.col_indices().end(), m.ai.begin())) {
    throw std::invalid_argument("LuFactorization::refactor: sparsity pattern changed");
  }
  m.ax.assign(a.values().begin(), a.values().end());
  m.factor();
}

LuFactorization::~LuFactorization() = default;
LuFactorization::LuFactorization(LuFactorization&&) noexcept = default;
LuFactorization& LuFactorization::operator=(LuFactorization&&) noexcept = default;

std::size_t LuFactorization::size() const { return static_cast<std::size_t>(impl_->n); }

std::vector<double> LuFactorization::solve(std::span<const double> b) const {
  const Impl& m = *impl_;
  if (b.size() != static_cast<std::size_t>(m.n)) {
    throw std::invalid_argument("LuFactorization::solve: dimension mismatch");
  }
  std::vector<double> x(b.size(), 0.0);
  double control[UMFPACK_CONTROL];
  double info[UMFPACK_INFO];
  umfpack_dl_defaults(control);
  const SuiteSparse_long status =
      umfpack_dl_solve(UMFPACK_At, m.ap.data(), m.ai.data(), m.ax.data(), x.data(), b.data(),
                       m.numeric, control, info);
  if (status != UMFPACK_OK) {
    throw SingularMatrixError("LuFactorization::solve: failed (status " + std::to_string(status) + ")");
  }
  return x;
}

double relative_residual(const SparseMatrix& a, std::span<const double> x,
                         std::span<const double> b) {
  std::vector<double> r = a.multiply(x);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
  const double nb = norm2(b);
  return nb > 0.0 ? norm2(r) / nb : norm2(r);
}

namespace {

SolveResult gmres_solve(const SparseMatrix& a, std::span<const double> b, const SolverOptions& opts) {
  using RowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;
  const Eigen::Map<const RowMatrix> view(static_cast<Eigen::Index>(a.rows()),
                                         static_cast<Eigen::Index>(a.cols()),
                                         static_cast<Eigen::Index>(a.nnz()), a.row_offsets().data(),
                                         a.col_indices().data(), a.values().data());
  const Eigen::SparseMatrix<double> colmajor = view;
  Eigen::GMRES<Eigen::SparseMatrix<double>, Eigen::IncompleteLUT<double>> solver;
  solver.preconditioner().setDroptol(opts.ilu_drop_tolerance);
  solver.preconditioner().setFillfactor(opts.ilu_fill_factor);
  solver.setTolerance(opts.tolerance);
  solver.setMaxIterations(opts.max_iterations);
  solver.set_restart(opts.restart);

  SolveResult result;
  result.x.assign(b.size(), 0.0);
  solver.compute(colmajor);
  if (solver.info() != Eigen::Success) {
    result.report.converged = false;
    result.report.relative_residual = 1.0;
    return result;
  }
  const Eigen::Map<const Eigen::VectorXd> rhs(b.data(), static_cast<Eigen::Index>(b.size()));
  Eigen::VectorXd x = solver.solve(rhs);
  if (x.allFinite()) result.x.assign(x.data(), x.data() + x.size());
  result.report.iterations = static_cast<int>(solver.iterations());
  result.report.relative_residual = relative_residual(a, result.x, b);
  result.report.converged = solver.info() == Eigen::Success && x.allFinite() &&
                            result.report.relative_residual <= opts.tolerance;
  return result;
}

}  // namespace

SolveResult linear_solve(const SparseMatrix& a, std::span<const double> b, const SolverOptions& opts) {
  opts.validate();
  if (a.rows() != a.cols()) throw std::invalid_argument("linear_solve: matrix is not square");
  if (b.size() != a.rows()) throw std::invalid_argument("linear_solve: right-hand side size mismatch");

  if (opts.method == SolverMethod::gmres) return gmres_solve(a, b, opts);

  SolveResult result;
  const LuFactorization lu(a);
  result.x = lu.solve(b);
  result.report.iterations = 1;
  result.report.relative_residual = relative_residual(a, result.x, b);
  // Iterative refinement for the nearly singular small-penalty systems.
  for (int step = 0; step < 3 && result.report.relative_residual > opts.tolerance; ++step) {
    std::vector<double> r = a.multiply(result.x);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
    const std::vector<double> dx = lu.solve(r);
    std::vector<double> x = result.x;
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += dx[i];
    const double res = relative_residual(a, x, b);
    if (!(res < result.report.relative_residual)) break;
    result.x = std::move(x);
    result.report.relative_residual = res;
    ++result.report.iterations;
  }
  result.report.converged = result.report.relative_residual <= opts.tolerance;
  return result;
}

}  // namespace nsb
