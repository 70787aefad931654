#include "nsb/assembly.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace nsb {

namespace {

void require_same_mesh(const FunctionSpace& a, const FunctionSpace& b, const char* what) {
  if (!a.same_mesh(b)) throw std::invalid_argument(std::string(what) + ": spaces live on different meshes");
}

// Pattern coupling component c of test with component c of trial (or all
// trial components when `all_trial_components`).
SparseMatrix component_pattern(const FunctionSpace& trial, const FunctionSpace& test,
                               bool all_trial_components) {
  const std::size_t nt = test.mesh().num_triangles();
  const int ncomp = test.components();
  return build_pattern(
      test.ndof(), trial.ndof(), nt * ncomp,
      [&](std::size_t cell, std::vector<int>& rows, std::vector<int>& cols) {
        const std::size_t t = cell / ncomp;
        const int c = static_cast<int>(cell % ncomp);
        const int roff = static_cast<int>(c * test.scalar_ndof());
        for (int d : test.cell_dofs(t)) rows.push_back(roff + d);
        for (int tc = 0; tc < trial.components(); ++tc) {
          if (!all_trial_components && tc != c) continue;
          const int coff = static_cast<int>(tc * trial.scalar_ndof());
          for (int d : trial.cell_dofs(t)) cols.push_back(coff + d);
        }
      });
}

}  // namespace

std::vector<ShapeTable> tabulate(int degree, const QuadRule& rule) {
  std::vector<ShapeTable> tables;
  tables.reserve(rule.size());
  for (const auto& p : rule.points) tables.push_back(reference_shapes(degree, p));
  return tables;
}

SparseMatrix assemble_bilinear(BilinearForm form, const FunctionSpace& trial,
                               const FunctionSpace& test) {
  require_same_mesh(trial, test, "assemble_bilinear");
  const bool divergence = form == BilinearForm::divergence;
  if (divergence) {
    if (trial.components() != 2 || test.components() != 1) {
      throw std::invalid_argument("assemble_bilinear: divergence needs vector trial and scalar test");
    }
  } else if (trial.components() != test.components()) {
    throw std::invalid_argument("assemble_bilinear: trial/test component counts differ");
  }
  if ((form == BilinearForm::temperature_stiffness || form == BilinearForm::pressure_mass) &&
      trial.components() != 1) {
    throw std::invalid_argument("assemble_bilinear: scalar form on a vector space");
  }

  SparseMatrix m = component_pattern(trial, test, divergence);
  const Mesh& mesh = test.mesh();
  const QuadRule& rule = quadrature(kBilinearQuadDegree);
  const auto trial_shapes = tabulate(trial.degree(), rule);
  const auto test_shapes = tabulate(test.degree(), rule);
  const int nu = trial.local_size();
  const int nv = test.local_size();
  const std::size_t trial_n = trial.scalar_ndof();
  const std::size_t test_n = test.scalar_ndof();

  double local[kMaxLocalDofs][2][kMaxLocalDofs]{};
  std::array<double, 2> gu[kMaxLocalDofs];
  std::array<double, 2> gv[kMaxLocalDofs];
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const CellGeometry geo(mesh, t);
    const double jw = std::abs(geo.det);
    for (auto& row : local)
      for (auto& comp : row)
        for (double& x : comp) x = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double w = rule.weights[q] * jw;
      const ShapeTable& su = trial_shapes[q];
      const ShapeTable& sv = test_shapes[q];
      for (int j = 0; j < nu; ++j) gu[j] = geo.physical(su.grad[j]);
      for (int i = 0; i < nv; ++i) gv[i] = geo.physical(sv.grad[i]);
      for (int i = 0; i < nv; ++i) {
        for (int j = 0; j < nu; ++j) {
          switch (form) {
            case BilinearForm::velocity_stiffness:
            case BilinearForm::temperature_stiffness:
              local[i][0][j] += w * (gu[j][0] * gv[i][0] + gu[j][1] * gv[i][1]);
              break;
            case BilinearForm::mass:
            case BilinearForm::pressure_mass:
              local[i][0][j] += w * su.value[j] * sv.value[i];
              break;
            case BilinearForm::divergence:
              local[i][0][j] -= w * gu[j][0] * sv.value[i];
              local[i][1][j] -= w * gu[j][1] * sv.value[i];
              break;
          }
        }
      }
    }
    const auto tdofs = trial.cell_dofs(t);
    const auto vdofs = test.cell_dofs(t);
    if (divergence) {
      for (int i = 0; i < nv; ++i)
        for (int d = 0; d < 2; ++d)
          for (int j = 0; j < nu; ++j) m.add(vdofs[i], d * trial_n + tdofs[j], local[i][d][j]);
    } else {
      for (int c = 0; c < test.components(); ++c)
        for (int i = 0; i < nv; ++i)
          for (int j = 0; j < nu; ++j)
            m.add(c * test_n + vdofs[i], c * trial_n + tdofs[j], local[i][0][j]);
    }
  }
  return m;
}

SparseMatrix assemble_convection(const FEFunction& u_state, ConvectionVariant variant,
                                 const FunctionSpace& trial, const FunctionSpace& test) {
  const FunctionSpace& us = u_state.space();
  if (us.components() != 2) {
    throw std::invalid_argument("assemble_convection: advecting state must be vector-valued");
  }
  require_same_mesh(trial, test, "assemble_convection");
  require_same_mesh(us, test, "assemble_convection");
  const int expected = variant == ConvectionVariant::momentum ? 2 : 1;
  if (trial.components() != expected || test.components() != expected) {
    throw std::invalid_argument("assemble_convection: wrong component count for variant");
  }

  SparseMatrix m = component_pattern(trial, test, false);
  const Mesh& mesh = test.mesh();
  const QuadRule& rule = quadrature(kNonlinearQuadDegree);
  const auto trial_shapes = tabulate(trial.degree(), rule);
  const auto test_shapes = tabulate(test.degree(), rule);
  const auto state_shapes = tabulate(us.degree(), rule);
  const int nu = trial.local_size();
  const int nv = test.local_size();

  double local[kMaxLocalDofs][kMaxLocalDofs];
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const CellGeometry geo(mesh, t);
    const double jw = std::abs(geo.det);
    for (auto& row : local)
      for (double& x : row) x = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double w = rule.weights[q] * jw;
      const Vec2 u{u_state.value_in_cell(t, state_shapes[q], 0),
                   u_state.value_in_cell(t, state_shapes[q], 1)};
      const ShapeTable& su = trial_shapes[q];
      const ShapeTable& sv = test_shapes[q];
      double adv_u[kMaxLocalDofs];
      double adv_v[kMaxLocalDofs];
      for (int j = 0; j < nu; ++j) {
        const auto g = geo.physical(su.grad[j]);
        adv_u[j] = u.x * g[0] + u.y * g[1];
      }
      for (int i = 0; i < nv; ++i) {
        const auto g = geo.physical(sv.grad[i]);
        adv_v[i] = u.x * g[0] + u.y * g[1];
      }
      for (int i = 0; i < nv; ++i)
        for (int j = 0; j < nu; ++j)
          local[i][j] += 0.5 * w * (adv_u[j] * sv.value[i] - adv_v[i] * su.value[j]);
    }
    const auto tdofs = trial.cell_dofs(t);
    const auto vdofs = test.cell_dofs(t);
    for (int c = 0; c < expected; ++c)
      for (int i = 0; i < nv; ++i)
        for (int j = 0; j < nu; ++j)
          m.add(c * test.scalar_ndof() + vdofs[i], c * trial.scalar_ndof() + tdofs[j], local[i][j]);
  }
  return m;
}

std::vector<double> assemble_load(const FunctionSpace& test, const ScalarFn& f) {
  if (test.components() != 1) throw std::invalid_argument("assemble_load: scalar load on vector space");
  const Mesh& mesh = test.mesh();
  const QuadRule& rule = quadrature(kNonlinearQuadDegree);
  const auto shapes = tabulate(test.degree(), rule);
  std::vector<double> b(test.ndof(), 0.0);
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const CellGeometry geo(mesh, t);
    const auto dofs = test.cell_dofs(t);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double w = rule.weights[q] * std::abs(geo.det) * f(geo.map(rule.points[q]));
      for (int i = 0; i < test.local_size(); ++i) b[dofs[i]] += w * shapes[q].value[i];
    }
  }
  return b;
}

std::vector<double> assemble_load(const FunctionSpace& test, const VectorFn& f) {
  if (test.components() != 2) throw std::invalid_argument("assemble_load: vector load on scalar space");
  const Mesh& mesh = test.mesh();
  const QuadRule& rule = quadrature(kNonlinearQuadDegree);
  const auto shapes = tabulate(test.degree(), rule);
  const std::size_t n = test.scalar_ndof();
  std::vector<double> b(test.ndof(), 0.0);
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const CellGeometry geo(mesh, t);
    const auto dofs = test.cell_dofs(t);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double w = rule.weights[q] * std::abs(geo.det);
      const Vec2 v = f(geo.map(rule.points[q]));
      for (int i = 0; i < test.local_size(); ++i) {
        b[dofs[i]] += w * v.x * shapes[q].value[i];
        b[n + dofs[i]] += w * v.y * shapes[q].value[i];
      }
    }
  }
  return b;
}

double integrate(const FEFunction& f) {
  const FunctionSpace& s = f.space();
  const Mesh& mesh = s.mesh();
  const QuadRule& rule = quadrature(kBilinearQuadDegree);
  const auto shapes = tabulate(s.degree(), rule);
  double total = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const double jw = std::abs(mesh.signed_area(t)) * 2.0;
    for (std::size_t q = 0; q < rule.size(); ++q)
      total += rule.weights[q] * jw * f.value_in_cell(t, shapes[q]);
  }
  return total;
}

}  // namespace nsb
