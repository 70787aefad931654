#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "nsb/analysis.hpp"
#include "nsb/cases.hpp"
#include "nsb/convection_solver.hpp"

namespace nsb {

struct StudyConfig {
  std::string case_id = "mp-bur";
  ElementTriple elements;
  std::vector<int> mesh_seq;
  std::vector<GammaPolicy> gammas;
  TimeScheme scheme = TimeScheme::bdf2;
  /// "h", "h2" (dt = h^2), or a constant such as "0.025".
  std::string dt_rule = "h";
  /// Overrides the case's final time for transient cases when set.
  std::optional<double> t_final;
  NewtonOptions newton;
  SolverOptions solver;
  /// NC-Sq reference cache and its resolution.
  std::string reference_dir = "reference";
  int reference_n = 128;

  /// Throws std::invalid_argument: unknown case, empty or non-refining mesh
  /// sequence, no policies, malformed dt rule.
  void validate() const;
  /// Reads a JSON document; keys absent from it keep the defaults.
  static StudyConfig from_json(std::string_view text);
  std::string to_json() const;
};

/// Step size from a dt rule at mesh size h.
double dt_from_rule(std::string_view rule, double h);

/// Quantities tabulated for a case, in output order.
std::vector<Quantity> study_quantities(std::string_view case_id);

struct CellInfo {
  int n = 0;
  std::string policy;
  double gamma = 0.0;
  std::size_t ndof = 0;
  double seconds = 0.0;
  int newton_iterations = 0;
  int steps = 0;
  bool ok = false;
  std::string message;
};

struct StudyResult {
  std::vector<ConvergenceTable> tables;
  std::vector<CellInfo> cells;

  const ConvergenceTable& table(Quantity q) const;
  bool all_failed() const;
};

/// Runs every (n, policy) cell. Cell failures are recorded, never thrown.
StudyResult run_study(const StudyConfig& config, std::ostream* log = nullptr);

// ---------------------------------------------------------------------------
// Fine-grid cavity reference.

struct ReferenceSolution {
  SystemState state;
  int n = 0;
  ElementTriple elements{2, 1, 2};
  double rayleigh = 1e4;
  double prandtl = 0.71;
  double seconds = 0.0;
  int newton_iterations = 0;
};

/// Steady P2-P1-P2 (gamma = 0, mean-pressure multiplier) cavity solution.
/// Throws std::runtime_error when the nonlinear solve fails.
ReferenceSolution compute_reference(int n, std::ostream* log = nullptr, double rayleigh = 1e4,
                                    double prandtl = 0.71);

/// Writes <dir>/nc-sq-ref-n<n>.json (metadata) and .bin (coefficients).
void save_reference(const ReferenceSolution& ref, const std::string& dir);
std::optional<ReferenceSolution> load_reference(const std::string& dir, int n);
ReferenceSolution load_or_compute_reference(const std::string& dir, int n,
                                            std::ostream* log = nullptr);

}  // namespace nsb
