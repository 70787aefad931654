#include "nsb/stokes_projection.hpp"

#include <atomic>
#include <cmath>
#include <iostream>
#include <stdexcept>

#include "nsb/assembly.hpp"

namespace nsb {

void PenaltyForm::validate() const {
  if (!(reynolds > 0.0)) throw std::invalid_argument("PenaltyForm: Re must be positive");
  if (!(gamma >= 0.0)) throw std::invalid_argument("PenaltyForm: gamma must be non-negative");
  static std::atomic<bool> warned{false};
  if ((reynolds <= 1.0 || gamma >= 1.0) && !warned.exchange(true)) {
    std::cerr << "warning: Re = " << reynolds << ", gamma = " << gamma
              << " outside the analysed range Re > 1, 0 <= gamma < 1\n";
  }
}

namespace {

void check_spaces(const FunctionSpace& velocity, const FunctionSpace& pressure) {
  if (!velocity.same_mesh(pressure)) {
    throw std::invalid_argument("stokes projection: spaces live on different meshes");
  }
  if (velocity.components() != 2 || pressure.components() != 1) {
    throw std::invalid_argument("stokes projection: need vector velocity and scalar pressure");
  }
}

}  // namespace

SparseMatrix assemble_a_gamma(const FunctionSpace& velocity, const FunctionSpace& pressure,
                              const PenaltyForm& form) {
  check_spaces(velocity, pressure);
  form.validate();
  SparseMatrix a = assemble_bilinear(BilinearForm::velocity_stiffness, velocity, velocity);
  a.scale(1.0 / form.reynolds);
  SparseMatrix b = assemble_bilinear(BilinearForm::divergence, velocity, pressure);
  const SparseMatrix bt = b.transpose();
  b.scale(-1.0);
  SparseMatrix mp = assemble_bilinear(BilinearForm::pressure_mass, pressure, pressure);
  mp.scale(form.gamma);
  return SparseMatrix::from_blocks({{&a, &bt}, {&b, &mp}}, {velocity.ndof(), pressure.ndof()},
                                   {velocity.ndof(), pressure.ndof()});
}

ProjectedPair modified_projection(const VectorFn& velocity, const TensorFn& velocity_gradient,
                                  const ScalarFn& pressure, SpacePtr velocity_space,
                                  SpacePtr pressure_space, const PenaltyForm& form,
                                  const SolverOptions& solver) {
  const FunctionSpace& vs = *velocity_space;
  const FunctionSpace& ps = *pressure_space;
  check_spaces(vs, ps);
  SparseMatrix k = assemble_a_gamma(vs, ps, form);
  const std::size_t nv = vs.ndof();
  const std::size_t np = ps.ndof();
  const std::size_t nvs = vs.scalar_ndof();

  // a_0((u,p),(v,q)) = (1/Re)(grad u, grad v) - (p, div v) + (div u, q).
  std::vector<double> rhs(nv + np, 0.0);
  double pressure_integral = 0.0;
  std::vector<double> pressure_ones(np, 0.0);
  const Mesh& mesh = vs.mesh();
  // Quadratic velocities raise the integrand degree past the nonlinear rule.
  const QuadRule& rule = quadrature(vs.degree() > 1 ? kErrorQuadDegree : kNonlinearQuadDegree);
  const auto vshapes = tabulate(vs.degree(), rule);
  const auto pshapes = tabulate(ps.degree(), rule);
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const CellGeometry geo(mesh, t);
    const auto vd = vs.cell_dofs(t);
    const auto pd = ps.cell_dofs(t);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double w = rule.weights[q] * std::abs(geo.det);
      const Point x = geo.map(rule.points[q]);
      const Mat2 g = velocity_gradient(x);
      const double p = pressure(x);
      const double div = g(0, 0) + g(1, 1);
      pressure_integral += w * p;
      for (int i = 0; i < vs.local_size(); ++i) {
        const auto gv = geo.physical(vshapes[q].grad[i]);
        for (int c = 0; c < 2; ++c) {
          rhs[c * nvs + vd[i]] +=
              w * ((g(c, 0) * gv[0] + g(c, 1) * gv[1]) / form.reynolds - p * gv[c]);
        }
      }
      for (int i = 0; i < ps.local_size(); ++i) {
        rhs[nv + pd[i]] += w * div * pshapes[q].value[i];
        pressure_ones[pd[i]] += w * pshapes[q].value[i];
      }
    }
  }

  // Velocity trace at boundary nodes.
  const auto bdofs = vs.boundary_dofs();
  std::vector<int> dofs;
  std::vector<double> vals;
  for (int d : bdofs) {
    const Vec2 u = velocity(vs.node(d));
    dofs.push_back(d);
    vals.push_back(u.x);
    dofs.push_back(static_cast<int>(nvs) + d);
    vals.push_back(u.y);
  }

  const bool multiplier = form.gamma == 0.0;
  if (multiplier) {
    // Border the system with the mean-value row and column.
    const std::size_t n = nv + np;
    std::vector<Triplet> entries;
    entries.reserve(k.nnz() + 2 * np + 1);
    for (std::size_t r = 0; r < n; ++r)
      for (int e = k.row_offsets()[r]; e < k.row_offsets()[r + 1]; ++e)
        entries.push_back({static_cast<int>(r), k.col_indices()[e], k.values()[e]});
    for (std::size_t j = 0; j < np; ++j) {
      entries.push_back({static_cast<int>(n), static_cast<int>(nv + j), pressure_ones[j]});
      entries.push_back({static_cast<int>(nv + j), static_cast<int>(n), pressure_ones[j]});
    }
    entries.push_back({static_cast<int>(n), static_cast<int>(n), 0.0});
    k = SparseMatrix::from_triplets(n + 1, n + 1, entries);
    rhs.push_back(pressure_integral);
  }
  apply_dirichlet(k, rhs, dofs, vals);
  SolveResult sol = linear_solve(k, rhs, solver);

  ProjectedPair pair{FEFunction(velocity_space), FEFunction(pressure_space), sol.report};
  std::copy(sol.x.begin(), sol.x.begin() + nv, pair.velocity.data().begin());
  std::copy(sol.x.begin() + nv, sol.x.begin() + nv + np, pair.pressure.data().begin());
  return pair;
}

double galerkin_residual(const TensorFn& velocity_gradient, const ScalarFn& pressure,
                         const ProjectedPair& pair, const PenaltyForm& form,
                         const FEFunction& probe_velocity, const FEFunction& probe_pressure) {
  const FunctionSpace& vs = pair.velocity.space();
  const FunctionSpace& ps = pair.pressure.space();
  if (!probe_velocity.space().same_mesh(vs) || !probe_pressure.space().same_mesh(ps)) {
    throw std::invalid_argument("galerkin_residual: probe lives on another mesh");
  }
  const Mesh& mesh = vs.mesh();
  const QuadRule& rule = quadrature(kErrorQuadDegree);
  double total = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const CellGeometry geo(mesh, t);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double w = rule.weights[q] * std::abs(geo.det);
      const Point x = geo.map(rule.points[q]);
      const Mat2 ge = velocity_gradient(x);
      const Mat2 gh = pair.velocity.vector_gradient(x);
      const Mat2 gv = probe_velocity.vector_gradient(x);
      const double pe = pressure(x);
      const double ph = pair.pressure.value(x);
      const double qv = probe_pressure.value(x);
      double grad_term = 0.0;
      for (int k = 0; k < 4; ++k) grad_term += (ge.a[k] - gh.a[k]) * gv.a[k];
      const double div_err = (ge(0, 0) - gh(0, 0)) + (ge(1, 1) - gh(1, 1));
      const double div_v = gv(0, 0) + gv(1, 1);
      // b(v, p - p_h) - b(u - u_h, q) + gamma (p - p_h, q) - gamma (p, q)
      total += w * (grad_term / form.reynolds - (pe - ph) * div_v + div_err * qv -
                    form.gamma * ph * qv);
    }
  }
  return total;
}

}  // namespace nsb
