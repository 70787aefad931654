#pragma once

#include <vector>

#include "nsb/function_space.hpp"
#include "nsb/quadrature.hpp"
#include "nsb/sparse_matrix.hpp"

namespace nsb {

enum class BilinearForm {
  velocity_stiffness,     // a(u, v) = (grad u, grad v), componentwise
  temperature_stiffness,  // a_bar(theta, psi), scalar only
  mass,                   // (u, v), componentwise
  divergence,             // b(v, q) = -(div v, q); trial vector, test scalar
  pressure_mass,          // (p, q), scalar only
};

enum class ConvectionVariant {
  momentum,     // c(u, v, w), vector trial/test
  temperature,  // c_bar(u, theta, psi), scalar trial/test
};

/// Matrix with rows indexed by test dofs and columns by trial dofs, entries
/// form(trial_j, test_i). Throws std::invalid_argument when the spaces live
/// on different meshes or have incompatible component counts.
SparseMatrix assemble_bilinear(BilinearForm form, const FunctionSpace& trial,
                               const FunctionSpace& test);

/// Matrix M with w^T M v equal to the antisymmetrized trilinear form
/// 1/2 (u.grad v, w) - 1/2 (u.grad w, v) for the given advecting state u.
SparseMatrix assemble_convection(const FEFunction& u_state, ConvectionVariant variant,
                                 const FunctionSpace& trial, const FunctionSpace& test);

/// Load vector (f, v) over the test space, degree-6 quadrature.
std::vector<double> assemble_load(const FunctionSpace& test, const ScalarFn& f);
std::vector<double> assemble_load(const FunctionSpace& test, const VectorFn& f);

/// Reference shape tables of a degree at every point of a rule.
std::vector<ShapeTable> tabulate(int degree, const QuadRule& rule);

/// Integral of an FE function (component 0).
double integrate(const FEFunction& f);

}  // namespace nsb
