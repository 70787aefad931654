#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nsb/convection_solver.hpp"
#include "nsb/function_space.hpp"

namespace nsb {

enum class NormKind { L2, H1_seminorm, H1 };

/// ||f_h - exact|| by degree-8 quadrature. Gradients are required for the
/// H1 variants and ignored otherwise.
double error_norm(const FEFunction& f, const ScalarFn& exact, const GradientFn& exact_gradient,
                  NormKind kind, int component = 0);
double error_norm(const FEFunction& f, const VectorFn& exact, const TensorFn& exact_gradient,
                  NormKind kind);

struct PressureError {
  double mean_subtracted = 0.0;
  double raw = 0.0;
};

/// L2 pressure error with and without removing the discrete and exact means.
PressureError pressure_error(const FEFunction& p, const ScalarFn& exact, double exact_mean);

/// Integral of one component of an FE function (error-norm rule).
double mean_value(const FEFunction& f, int component = 0);

/// Quantities reported by a study.
enum class Quantity { L2_u, H1_u, L2_p, L2_p_raw, L2_theta };
const char* to_string(Quantity q);
Quantity parse_quantity(std::string_view text);

enum class CellStatus { ok, solver_failed };

struct ErrorRecord {
  double h = 0.0;
  double gamma = 0.0;
  Quantity quantity = Quantity::L2_u;
  std::optional<double> error;  // empty unless status == ok
  CellStatus status = CellStatus::ok;

  bool ok() const { return status == CellStatus::ok && error.has_value(); }
};

/// Consecutive-pair rates log(e_{i-1}/e_i)/log(h_{i-1}/h_i); entry 0 and
/// pairs touching a failed record are empty.
std::vector<std::optional<double>> convergence_rates(const std::vector<ErrorRecord>& records);

/// One norm of one study: a column of records per penalty policy.
struct ConvergenceTable {
  std::string case_id;
  std::string elements;
  Quantity quantity = Quantity::L2_u;
  std::vector<int> subdivisions;          // rows, coarse to fine
  std::vector<std::string> policies;      // column labels
  std::vector<std::vector<ErrorRecord>> columns;  // columns[policy][row]
};

enum class TableFormat { csv, markdown };
TableFormat parse_table_format(std::string_view text);

/// CSV: n,h then err/rate per policy, failures as empty fields.
/// Markdown: the same layout with 3 significant digits.
std::string emit_table(const ConvergenceTable& table, TableFormat format);

/// Reads back the CSV produced by emit_table (errors only; rates recomputed).
ConvergenceTable parse_table_csv(std::string_view csv);

/// u_2 at `samples` equispaced x on the line y = y_line.
std::vector<std::pair<double, double>> centerline_profile(const SystemState& state, int samples,
                                                          double y_line = 0.5);

/// Discrete L2 difference of two profiles sampled at the same abscissae
/// (trapezoidal rule).
double profile_difference(const std::vector<std::pair<double, double>>& a,
                          const std::vector<std::pair<double, double>>& b);

/// Scientific notation with 3 significant digits, e.g. 2.32E-02.
std::string format_sci(double v);

}  // namespace nsb
