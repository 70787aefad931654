#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nsb/cases.hpp"
#include "nsb/function_space.hpp"
#include "nsb/linear_solver.hpp"
#include "nsb/sparse_matrix.hpp"

namespace nsb {

/// Polynomial degrees of velocity, pressure and temperature.
struct ElementTriple {
  int velocity = 1;
  int pressure = 1;
  int temperature = 1;

  /// Accepts "P1-P1-P1", "p1p1p1", "P2-P1-P2", "P1-P0" (temperature then
  /// defaults to the velocity degree). Throws std::invalid_argument.
  static ElementTriple parse(std::string_view text);
  std::string name() const;
};

struct FieldSpaces {
  SpacePtr velocity;
  SpacePtr pressure;
  SpacePtr temperature;

  std::size_t ndof() const {
    return velocity->ndof() + pressure->ndof() + temperature->ndof();
  }
};

FieldSpaces make_spaces(std::shared_ptr<const Mesh> mesh, const ElementTriple& elements);

enum class TimeScheme { bdf1, bdf2 };
TimeScheme parse_time_scheme(std::string_view text);
const char* to_string(TimeScheme scheme);

struct NewtonOptions {
  double absolute_tolerance = 1e-10;
  double relative_tolerance = 1e-8;
  int max_iterations = 20;
  SolverOptions linear;

  void validate() const;
};

struct NewtonReport {
  bool converged = false;
  /// Number of linear solves performed.
  int iterations = 0;
  /// Residual norm before each solve and after the last one.
  std::vector<double> residual_norms;
  std::string message;
};

struct SystemState {
  FEFunction u;
  FEFunction p;
  FEFunction theta;
  double t = 0.0;
};

/// Data of one implicit step: time level, BDF leading coefficient and the
/// history combination sum_k alpha_k x^{n+1-k} (empty when steady).
struct StepContext {
  double t = 0.0;
  double inv_dt = 0.0;
  double alpha0 = 1.0;
  std::vector<double> history;
};

/// Fully coupled penalized system for (u, p, theta) on fixed spaces.
///
/// Unknown layout: u_1, u_2, p, theta, and one mean-pressure multiplier when
/// gamma = 0. Not thread-safe: the Newton solver caches its factorization.
class CoupledSystem {
 public:
  CoupledSystem(const AnalyticCase& problem, FieldSpaces spaces, double gamma);
  ~CoupledSystem();

  std::size_t size() const { return size_; }
  const FieldSpaces& spaces() const { return spaces_; }
  const AnalyticCase& problem() const { return problem_; }
  double gamma() const { return gamma_; }
  bool has_mean_multiplier() const { return multiplier_; }
  std::size_t pressure_offset() const { return 2 * nu_; }
  std::size_t temperature_offset() const { return 2 * nu_ + np_; }

  std::vector<double> pack(const SystemState& state) const;
  SystemState unpack(std::span<const double> x, double t) const;

  /// Sorted Dirichlet unknowns (velocity everywhere, temperature on tagged sides).
  const std::vector<int>& dirichlet_dofs() const { return dirichlet_; }
  /// Writes boundary values at time t into x.
  void impose_dirichlet(std::vector<double>& x, double t) const;

  /// BDF context from past solutions, newest first. BDF2 with one history
  /// state falls back to BDF1.
  StepContext step_context(std::span<const std::vector<double>* const> history, double dt,
                           TimeScheme scheme, double t) const;
  StepContext steady_context() const { return {}; }

  /// Nonlinear residual, Dirichlet rows included as assembled.
  std::vector<double> assemble_residual(std::span<const double> x, const StepContext& ctx) const;
  /// Exact derivative of assemble_residual.
  SparseMatrix assemble_jacobian(std::span<const double> x, const StepContext& ctx) const;
  /// Both at once; either pointer may be null.
  void assemble(std::span<const double> x, const StepContext& ctx, std::vector<double>* residual,
                SparseMatrix* jacobian) const;

  /// Newton iteration from x, which must carry the boundary values.
  NewtonReport newton(std::vector<double>& x, const StepContext& ctx,
                      const NewtonOptions& opts) const;

  /// L2 norms of the velocity and temperature parts of a difference vector.
  double velocity_l2(std::span<const double> d) const;
  double temperature_l2(std::span<const double> d) const;

 private:
  std::vector<double> load(double t) const;

  AnalyticCase problem_;
  FieldSpaces spaces_;
  double gamma_;
  bool multiplier_;
  std::size_t nu_, np_, nt_, size_;
  std::vector<int> dirichlet_;
  std::vector<double> pressure_ones_;
  SparseMatrix pattern_;
  SparseMatrix velocity_mass_;
  SparseMatrix temperature_mass_;
  mutable std::unique_ptr<LuFactorization> lu_;
};

/// Manufactured cases: (u, p) from the modified projection of the exact t=0
/// fields, theta interpolated. Otherwise the case's initial data, p = 0.
SystemState initial_state(const AnalyticCase& problem, const FieldSpaces& spaces, double gamma);

struct StepRecord {
  double t = 0.0;
  NewtonReport newton;
  double velocity_change = 0.0;     // ||u^{n+1} - u^n||_L2 / dt
  double temperature_change = 0.0;  // ||theta^{n+1} - theta^n||_L2 / dt
};

struct TransientOptions {
  TimeScheme scheme = TimeScheme::bdf2;
  double dt = 0.05;
  /// Used when positive; dt is then shrunk so that an integer number of steps lands on it.
  double t_final = 0.0;
  /// Stop once both change rates drop to steady_tolerance.
  bool steady_stop = false;
  double steady_tolerance = 1e-8;
  int max_steps = 100000;
  NewtonOptions newton;
  std::function<void(const SystemState&)> observer;
};

struct TransientResult {
  SystemState state;
  std::vector<StepRecord> steps;
  bool ok = false;
  bool steady_reached = false;
  double dt = 0.0;
  std::string message;
};

TransientResult run_transient(const AnalyticCase& problem, const FieldSpaces& spaces, double gamma,
                              const TransientOptions& opts);

/// One implicit step from history (newest first). Returns the new state.
std::pair<SystemState, NewtonReport> solve_timestep(const CoupledSystem& system,
                                                    std::span<const SystemState> history,
                                                    double dt, TimeScheme scheme,
                                                    const NewtonOptions& opts);

struct SteadyResult {
  SystemState state;
  NewtonReport newton;
  bool ok = false;
  int pseudo_steps = 0;
  std::string message;
};

/// Steady solution by Newton on the time-independent system, starting from
/// the initial state. When Newton fails from there, pseudo-time BDF1 steps
/// with growing dt bring the iterate closer first.
SteadyResult solve_steady(const AnalyticCase& problem, const FieldSpaces& spaces, double gamma,
                          const NewtonOptions& opts = {});

/// CSV snapshot (x, y, u1, u2, p, theta) at the velocity nodes.
void write_snapshot_csv(const SystemState& state, std::ostream& os);

}  // namespace nsb
