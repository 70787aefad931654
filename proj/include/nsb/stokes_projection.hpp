#pragma once

#include "nsb/function_space.hpp"
#include "nsb/linear_solver.hpp"
#include "nsb/sparse_matrix.hpp"

namespace nsb {

/// a_gamma((u,p),(v,q)) = (1/Re) a(u,v) + b(v,p) - b(u,q) + gamma (p,q).
struct PenaltyForm {
  double reynolds = 1.0;
  double gamma = 0.0;

  /// Throws std::invalid_argument for Re <= 0 or gamma < 0. Re <= 1 or
  /// gamma >= 1 leave the range covered by the error analysis and are
  /// reported once on stderr.
  void validate() const;
};

struct ProjectedPair {
  FEFunction velocity;
  FEFunction pressure;
  SolveReport report;
};

/// Block matrix [[A/Re, B^T], [-B, gamma Mp]] with B the divergence matrix
/// (rows pressure tests, columns velocity trials, b(v,q) = -(div v, q)).
/// Unknown ordering: velocity dofs then pressure dofs.
SparseMatrix assemble_a_gamma(const FunctionSpace& velocity, const FunctionSpace& pressure,
                              const PenaltyForm& form);

/// Discrete pair with a_gamma((u_h,p_h),(v,q)) = a_0((u,p),(v,q)) for all
/// test pairs vanishing on the boundary, u_h = u at boundary nodes. The right
/// side is integrated from the exact gradient and pressure. With gamma = 0 the
/// pressure mean is fixed to that of `pressure` by a Lagrange multiplier.
ProjectedPair modified_projection(const VectorFn& velocity, const TensorFn& velocity_gradient,
                                  const ScalarFn& pressure, SpacePtr velocity_space,
                                  SpacePtr pressure_space, const PenaltyForm& form,
                                  const SolverOptions& solver = {});

/// a_gamma((u - u_h, p - p_h), (v, q)) - gamma (p, q), integrated with the
/// error-norm rule directly from the exact fields and the discrete pair.
/// Vanishes for probes v that are zero on the boundary.
double galerkin_residual(const TensorFn& velocity_gradient, const ScalarFn& pressure,
                         const ProjectedPair& pair, const PenaltyForm& form,
                         const FEFunction& probe_velocity, const FEFunction& probe_pressure);

}  // namespace nsb
