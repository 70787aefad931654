#include "nsb/convection_solver.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "nsb/assembly.hpp"
#include "nsb/stokes_projection.hpp"

namespace nsb {

ElementTriple ElementTriple::parse(std::string_view text) {
  std::vector<int> degrees;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(text[i])));
    if (c == 'p' && i + 1 < text.size() && std::isdigit(static_cast<unsigned char>(text[i + 1]))) {
      degrees.push_back(text[i + 1] - '0');
      ++i;
    } else if (c != '-' && c != '_') {
      degrees.clear();
      break;
    }
  }
  if (degrees.size() < 2 || degrees.size() > 3) {
    throw std::invalid_argument("element triple '" + std::string(text) +
                                "' not understood (expected e.g. P1-P1-P1)");
  }
  ElementTriple e{degrees[0], degrees[1], degrees.size() == 3 ? degrees[2] : degrees[0]};
  if (e.velocity < 1 || e.velocity > 2 || e.pressure < 0 || e.pressure > 2 || e.temperature < 1 ||
      e.temperature > 2) {
    throw std::invalid_argument("element triple '" + std::string(text) + "' has unsupported degrees");
  }
  return e;
}

std::string ElementTriple::name() const {
  return "P" + std::to_string(velocity) + "-P" + std::to_string(pressure) + "-P" +
         std::to_string(temperature);
}

FieldSpaces make_spaces(std::shared_ptr<const Mesh> mesh, const ElementTriple& elements) {
  return {make_space(mesh, elements.velocity, 2), make_space(mesh, elements.pressure, 1),
          make_space(mesh, elements.temperature, 1)};
}

TimeScheme parse_time_scheme(std::string_view text) {
  if (text == "bdf1" || text == "BDF1" || text == "euler") return TimeScheme::bdf1;
  if (text == "bdf2" || text == "BDF2") return TimeScheme::bdf2;
  throw std::invalid_argument("unknown time scheme '" + std::string(text) + "' (bdf1 or bdf2)");
}

const char* to_string(TimeScheme scheme) { return scheme == TimeScheme::bdf1 ? "bdf1" : "bdf2"; }

void NewtonOptions::validate() const {
  if (!(absolute_tolerance > 0.0 && relative_tolerance > 0.0)) {
    throw std::invalid_argument("NewtonOptions: tolerances must be positive");
  }
  if (max_iterations < 1) throw std::invalid_argument("NewtonOptions: max_iterations must be >= 1");
  linear.validate();
}

// ---------------------------------------------------------------------------

CoupledSystem::CoupledSystem(const AnalyticCase& problem, FieldSpaces spaces, double gamma)
    : problem_(problem), spaces_(std::move(spaces)), gamma_(gamma), multiplier_(gamma == 0.0) {
  const FunctionSpace& vs = *spaces_.velocity;
  const FunctionSpace& ps = *spaces_.pressure;
  const FunctionSpace& ts = *spaces_.temperature;
  if (!vs.same_mesh(ps) || !vs.same_mesh(ts)) {
    throw std::invalid_argument("CoupledSystem: spaces live on different meshes");
  }
  if (vs.components() != 2 || ps.components() != 1 || ts.components() != 1) {
    throw std::invalid_argument("CoupledSystem: wrong component counts");
  }
  if (!(gamma >= 0.0)) throw std::invalid_argument("CoupledSystem: gamma must be non-negative");
  problem_.params.validate();
  nu_ = vs.scalar_ndof();
  np_ = ps.ndof();
  nt_ = ts.ndof();
  size_ = 2 * nu_ + np_ + nt_ + (multiplier_ ? 1 : 0);

  for (int d : vs.boundary_dofs()) {
    dirichlet_.push_back(d);
    dirichlet_.push_back(static_cast<int>(nu_) + d);
  }
  const int toff = static_cast<int>(temperature_offset());
  if (problem_.has_temperature()) {
    for (const auto& [side, fn] : problem_.temperature_boundary) {
      for (int d : ts.boundary_dofs(side)) dirichlet_.push_back(toff + d);
    }
  } else {
    for (int d : ts.boundary_dofs()) dirichlet_.push_back(toff + d);
  }
  std::sort(dirichlet_.begin(), dirichlet_.end());
  dirichlet_.erase(std::unique(dirichlet_.begin(), dirichlet_.end()), dirichlet_.end());

  // Momentum/continuity couple (u, p); momentum/energy couple (u, theta).
  const Mesh& mesh = vs.mesh();
  const int poff = static_cast<int>(pressure_offset());
  pattern_ = build_pattern(
      size_, size_, 2 * mesh.num_triangles(),
      [&](std::size_t cell, std::vector<int>& rows, std::vector<int>& cols) {
        const std::size_t t = cell / 2;
        for (int d : vs.cell_dofs(t)) {
          rows.push_back(d);
          rows.push_back(static_cast<int>(nu_) + d);
        }
        if (cell % 2 == 0) {
          for (int d : ps.cell_dofs(t)) rows.push_back(poff + d);
        } else {
          for (int d : ts.cell_dofs(t)) rows.push_back(toff + d);
        }
        cols = rows;
      });

  velocity_mass_ = assemble_bilinear(BilinearForm::mass, *make_space(vs.mesh_ptr(), vs.degree(), 1),
                                     *make_space(vs.mesh_ptr(), vs.degree(), 1));
  temperature_mass_ = assemble_bilinear(BilinearForm::mass, ts, ts);

  pressure_ones_.assign(np_, 0.0);
  {
    const QuadRule& rule = quadrature(kBilinearQuadDegree);
    const auto shapes = tabulate(ps.degree(), rule);
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
      const double jw = 2.0 * std::abs(mesh.signed_area(t));
      const auto dofs = ps.cell_dofs(t);
      for (std::size_t q = 0; q < rule.size(); ++q)
        for (int i = 0; i < ps.local_size(); ++i)
          pressure_ones_[dofs[i]] += rule.weights[q] * jw * shapes[q].value[i];
    }
  }
  if (multiplier_) {
    const int last = static_cast<int>(size_ - 1);
    std::vector<Triplet> border;
    for (std::size_t j = 0; j < np_; ++j) {
      border.push_back({last, poff + static_cast<int>(j), 0.0});
      border.push_back({poff + static_cast<int>(j), last, 0.0});
    }
    border.push_back({last, last, 0.0});
    pattern_ = SparseMatrix::combine(1.0, pattern_, 1.0,
                                     SparseMatrix::from_triplets(size_, size_, border));
  }
}

CoupledSystem::~CoupledSystem() = default;

std::vector<double> CoupledSystem::pack(const SystemState& s) const {
  if (s.u.space().ndof() != 2 * nu_ || s.p.space().ndof() != np_ || s.theta.space().ndof() != nt_) {
    throw std::invalid_argument("CoupledSystem::pack: state does not match the spaces");
  }
  std::vector<double> x;
  x.reserve(size_);
  x.insert(x.end(), s.u.data().begin(), s.u.data().end());
  x.insert(x.end(), s.p.data().begin(), s.p.data().end());
  x.insert(x.end(), s.theta.data().begin(), s.theta.data().end());
  if (multiplier_) x.push_back(0.0);
  return x;
}

SystemState CoupledSystem::unpack(std::span<const double> x, double t) const {
  if (x.size() != size_) throw std::invalid_argument("CoupledSystem::unpack: size mismatch");
  const auto it = x.begin();
  return {FEFunction(spaces_.velocity, std::vector<double>(it, it + 2 * nu_)),
          FEFunction(spaces_.pressure, std::vector<double>(it + 2 * nu_, it + 2 * nu_ + np_)),
          FEFunction(spaces_.temperature,
                     std::vector<double>(it + 2 * nu_ + np_, it + 2 * nu_ + np_ + nt_)),
          t};
}

void CoupledSystem::impose_dirichlet(std::vector<double>& x, double t) const {
  if (x.size() != size_) throw std::invalid_argument("impose_dirichlet: size mismatch");
  const FunctionSpace& vs = *spaces_.velocity;
  const FunctionSpace& ts = *spaces_.temperature;
  for (int d : vs.boundary_dofs()) {
    const Vec2 u = problem_.velocity_boundary ? problem_.velocity_boundary(vs.node(d), t) : Vec2{};
    x[d] = u.x;
    x[nu_ + d] = u.y;
  }
  const std::size_t toff = temperature_offset();
  if (problem_.has_temperature()) {
    for (const auto& [side, fn] : problem_.temperature_boundary) {
      for (int d : ts.boundary_dofs(side)) x[toff + d] = fn(ts.node(d), t);
    }
  } else {
    for (int d : ts.boundary_dofs()) x[toff + d] = 0.0;
  }
}

StepContext CoupledSystem::step_context(std::span<const std::vector<double>* const> history,
                                        double dt, TimeScheme scheme, double t) const {
  if (history.empty()) throw std::invalid_argument("step_context: empty history");
  if (!(dt > 0.0)) throw std::invalid_argument("step_context: dt must be positive");
  for (const auto* h : history) {
    if (!h || h->size() != size_) throw std::invalid_argument("step_context: history size mismatch");
  }
  StepContext ctx;
  ctx.t = t;
  ctx.inv_dt = 1.0 / dt;
  ctx.history.assign(size_, 0.0);
  const std::vector<double>& xn = *history[0];
  if (scheme == TimeScheme::bdf2 && history.size() >= 2) {
    const std::vector<double>& xm = *history[1];
    ctx.alpha0 = 1.5;
    for (std::size_t i = 0; i < size_; ++i) ctx.history[i] = -2.0 * xn[i] + 0.5 * xm[i];
  } else {
    ctx.alpha0 = 1.0;
    for (std::size_t i = 0; i < size_; ++i) ctx.history[i] = -xn[i];
  }
  return ctx;
}

std::vector<double> CoupledSystem::load(double t) const {
  std::vector<double> b(size_, 0.0);
  if (problem_.momentum_source) {
    const auto f = assemble_load(*spaces_.velocity,
                                 VectorFn([&](Point p) { return problem_.momentum_source(p, t); }));
    std::copy(f.begin(), f.end(), b.begin());
  }
  if (problem_.heat_source) {
    const auto g = assemble_load(*spaces_.temperature,
                                 ScalarFn([&](Point p) { return problem_.heat_source(p, t); }));
    std::copy(g.begin(), g.end(), b.begin() + temperature_offset());
  }
  return b;
}

namespace {

constexpr int kMaxCoupled = 4 * kMaxLocalDofs;

}  // namespace

void CoupledSystem::assemble(std::span<const double> x, const StepContext& ctx,
                             std::vector<double>* residual, SparseMatrix* jacobian) const {
  if (x.size() != size_) throw std::invalid_argument("CoupledSystem::assemble: size mismatch");
  const bool transient = ctx.inv_dt > 0.0;
  if (transient && ctx.history.size() != size_) {
    throw std::invalid_argument("CoupledSystem::assemble: history size mismatch");
  }
  const FunctionSpace& vs = *spaces_.velocity;
  const FunctionSpace& ps = *spaces_.pressure;
  const FunctionSpace& ts = *spaces_.temperature;
  const Mesh& mesh = vs.mesh();
  const QuadRule& rule = quadrature(kNonlinearQuadDegree);
  const auto vshape = tabulate(vs.degree(), rule);
  const auto pshape = tabulate(ps.degree(), rule);
  const auto tshape = tabulate(ts.degree(), rule);
  const int nv = vs.local_size();
  const int npl = ps.local_size();
  const int ntl = ts.local_size();
  const int ou[2] = {0, nv};
  const int op = 2 * nv;
  const int ot = 2 * nv + npl;
  const int nl = ot + ntl;

  const double nu = 1.0 / problem_.params.reynolds;
  const double kappa = problem_.params.thermal_diffusivity();
  const double fb = problem_.params.buoyancy_coefficient();
  const double mt = transient ? ctx.inv_dt * ctx.alpha0 : 0.0;
  const double dt_inv = transient ? ctx.inv_dt : 0.0;

  if (residual) {
    *residual = load(ctx.t);
    for (double& v : *residual) v = -v;
  }
  if (jacobian) {
    *jacobian = pattern_;
    jacobian->set_zero();
  }

  int gidx[kMaxCoupled];
  double xl[kMaxCoupled];
  double hl[kMaxCoupled];
  double r[kMaxCoupled];
  double jl[kMaxCoupled][kMaxCoupled];
  std::array<double, 2> gphi[kMaxLocalDofs];
  std::array<double, 2> gchi[kMaxLocalDofs];

  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const CellGeometry geo(mesh, t);
    const double jw = std::abs(geo.det);
    const auto vd = vs.cell_dofs(t);
    const auto pd = ps.cell_dofs(t);
    const auto td = ts.cell_dofs(t);
    for (int i = 0; i < nv; ++i) {
      gidx[i] = vd[i];
      gidx[nv + i] = static_cast<int>(nu_) + vd[i];
    }
    for (int i = 0; i < npl; ++i) gidx[op + i] = static_cast<int>(pressure_offset()) + pd[i];
    for (int i = 0; i < ntl; ++i) gidx[ot + i] = static_cast<int>(temperature_offset()) + td[i];
    for (int i = 0; i < nl; ++i) {
      xl[i] = x[gidx[i]];
      hl[i] = transient ? ctx.history[gidx[i]] : 0.0;
      r[i] = 0.0;
    }
    if (jacobian)
      for (int i = 0; i < nl; ++i)
        for (int j = 0; j < nl; ++j) jl[i][j] = 0.0;

    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double w = rule.weights[q] * jw;
      const ShapeTable& sv = vshape[q];
      const ShapeTable& sp = pshape[q];
      const ShapeTable& st = tshape[q];
      for (int i = 0; i < nv; ++i) gphi[i] = geo.physical(sv.grad[i]);
      for (int i = 0; i < ntl; ++i) gchi[i] = geo.physical(st.grad[i]);

      double u[2] = {0, 0}, wu[2] = {0, 0}, gu[2][2] = {{0, 0}, {0, 0}};
      for (int c = 0; c < 2; ++c) {
        for (int i = 0; i < nv; ++i) {
          const double xv = xl[ou[c] + i];
          u[c] += xv * sv.value[i];
          wu[c] += (ctx.alpha0 * xv + hl[ou[c] + i]) * sv.value[i];
          gu[c][0] += xv * gphi[i][0];
          gu[c][1] += xv * gphi[i][1];
        }
      }
      double p = 0.0;
      for (int i = 0; i < npl; ++i) p += xl[op + i] * sp.value[i];
      double th = 0.0, wth = 0.0, gth[2] = {0, 0};
      for (int i = 0; i < ntl; ++i) {
        const double xv = xl[ot + i];
        th += xv * st.value[i];
        wth += (ctx.alpha0 * xv + hl[ot + i]) * st.value[i];
        gth[0] += xv * gchi[i][0];
        gth[1] += xv * gchi[i][1];
      }
      const double div = gu[0][0] + gu[1][1];
      double adv_phi[kMaxLocalDofs];
      double adv_chi[kMaxLocalDofs];
      for (int i = 0; i < nv; ++i) adv_phi[i] = u[0] * gphi[i][0] + u[1] * gphi[i][1];
      for (int i = 0; i < ntl; ++i) adv_chi[i] = u[0] * gchi[i][0] + u[1] * gchi[i][1];
      const double adv_th = u[0] * gth[0] + u[1] * gth[1];

      if (residual) {
        for (int c = 0; c < 2; ++c) {
          const double adv_uc = u[0] * gu[c][0] + u[1] * gu[c][1];
          const double body = c == 1 ? fb * th : 0.0;
          for (int i = 0; i < nv; ++i) {
            const double phi = sv.value[i];
            r[ou[c] + i] += w * (dt_inv * wu[c] * phi +
                                 nu * (gu[c][0] * gphi[i][0] + gu[c][1] * gphi[i][1]) +
                                 0.5 * adv_uc * phi - 0.5 * adv_phi[i] * u[c] - p * gphi[i][c] -
                                 body * phi);
          }
        }
        for (int i = 0; i < npl; ++i) r[op + i] += w * (div + gamma_ * p) * sp.value[i];
        for (int i = 0; i < ntl; ++i) {
          const double chi = st.value[i];
          r[ot + i] += w * (dt_inv * wth * chi + kappa * (gth[0] * gchi[i][0] + gth[1] * gchi[i][1]) +
                            0.5 * adv_th * chi - 0.5 * adv_chi[i] * th);
        }
      }

      if (jacobian) {
        for (int i = 0; i < nv; ++i) {
          const double phi_i = sv.value[i];
          for (int j = 0; j < nv; ++j) {
            const double phi_j = sv.value[j];
            const double diag = mt * phi_j * phi_i +
                                nu * (gphi[j][0] * gphi[i][0] + gphi[j][1] * gphi[i][1]) +
                                0.5 * adv_phi[j] * phi_i - 0.5 * adv_phi[i] * phi_j;
            for (int c = 0; c < 2; ++c) {
              for (int d = 0; d < 2; ++d) {
                double v = 0.5 * phi_j * gu[c][d] * phi_i - 0.5 * phi_j * gphi[i][d] * u[c];
                if (c == d) v += diag;
                jl[ou[c] + i][ou[d] + j] += w * v;
              }
            }
          }
          for (int j = 0; j < npl; ++j) {
            jl[ou[0] + i][op + j] -= w * sp.value[j] * gphi[i][0];
            jl[ou[1] + i][op + j] -= w * sp.value[j] * gphi[i][1];
          }
          for (int j = 0; j < ntl; ++j) jl[ou[1] + i][ot + j] -= w * fb * st.value[j] * phi_i;
        }
        for (int i = 0; i < npl; ++i) {
          const double psi = sp.value[i];
          for (int j = 0; j < nv; ++j) {
            jl[op + i][ou[0] + j] += w * gphi[j][0] * psi;
            jl[op + i][ou[1] + j] += w * gphi[j][1] * psi;
          }
          for (int j = 0; j < npl; ++j) jl[op + i][op + j] += w * gamma_ * sp.value[j] * psi;
        }
        for (int k = 0; k < ntl; ++k) {
          const double chi_k = st.value[k];
          for (int j = 0; j < nv; ++j) {
            const double phi_j = sv.value[j];
            for (int d = 0; d < 2; ++d) {
              jl[ot + k][ou[d] + j] +=
                  w * (0.5 * phi_j * gth[d] * chi_k - 0.5 * phi_j * gchi[k][d] * th);
            }
          }
          for (int j = 0; j < ntl; ++j) {
            const double chi_j = st.value[j];
            jl[ot + k][ot + j] +=
                w * (mt * chi_j * chi_k +
                     kappa * (gchi[j][0] * gchi[k][0] + gchi[j][1] * gchi[k][1]) +
                     0.5 * adv_chi[j] * chi_k - 0.5 * adv_chi[k] * chi_j);
          }
        }
      }
    }

    if (residual)
      for (int i = 0; i < nl; ++i) (*residual)[gidx[i]] += r[i];
    if (jacobian) {
      for (int i = 0; i < nl; ++i) {
        const bool prow = i >= op && i < ot;
        const bool trow = i >= ot;
        for (int j = 0; j < nl; ++j) {
          const bool pcol = j >= op && j < ot;
          const bool tcol = j >= ot;
          if ((prow && tcol) || (trow && pcol)) continue;
          jacobian->add(gidx[i], gidx[j], jl[i][j]);
        }
      }
    }
  }

  if (multiplier_) {
    const std::size_t last = size_ - 1;
    const std::size_t poff = pressure_offset();
    const double lambda = x[last];
    const double target = problem_.pressure_mean ? problem_.pressure_mean(ctx.t) : 0.0;
    if (residual) {
      double mean = 0.0;
      for (std::size_t j = 0; j < np_; ++j) {
        (*residual)[poff + j] += lambda * pressure_ones_[j];
        mean += pressure_ones_[j] * x[poff + j];
      }
      (*residual)[last] = mean - target;
    }
    if (jacobian) {
      for (std::size_t j = 0; j < np_; ++j) {
        jacobian->add(poff + j, last, pressure_ones_[j]);
        jacobian->add(last, poff + j, pressure_ones_[j]);
      }
    }
  }
}

std::vector<double> CoupledSystem::assemble_residual(std::span<const double> x,
                                                     const StepContext& ctx) const {
  std::vector<double> r;
  assemble(x, ctx, &r, nullptr);
  return r;
}

SparseMatrix CoupledSystem::assemble_jacobian(std::span<const double> x,
                                              const StepContext& ctx) const {
  SparseMatrix j;
  assemble(x, ctx, nullptr, &j);
  return j;
}

NewtonReport CoupledSystem::newton(std::vector<double>& x, const StepContext& ctx,
                                   const NewtonOptions& opts) const {
  opts.validate();
  if (x.size() != size_) throw std::invalid_argument("CoupledSystem::newton: size mismatch");
  NewtonReport report;
  std::vector<double> res;
  SparseMatrix jac;
  double r0 = 0.0;
  for (int it = 0;; ++it) {
    assemble(x, ctx, &res, &jac);
    for (int d : dirichlet_) res[d] = 0.0;
    const double norm = norm2(res);
    report.residual_norms.push_back(norm);
    if (!std::isfinite(norm)) {
      report.message = "residual is not finite";
      return report;
    }
    if (it == 0) r0 = norm;
    if (it > 0 && (norm <= opts.absolute_tolerance || norm <= opts.relative_tolerance * r0)) {
      report.converged = true;
      return report;
    }
    if (it == opts.max_iterations) {
      report.message = "no convergence in " + std::to_string(opts.max_iterations) + " iterations";
      return report;
    }
    if (it > 0 && norm > 1e8 * std::max(r0, opts.absolute_tolerance)) {
      report.message = "Newton iteration diverged";
      return report;
    }

    const auto offsets = jac.row_offsets();
    const auto cols = jac.col_indices();
    auto vals = jac.values();
    for (int d : dirichlet_) {
      for (int k = offsets[d]; k < offsets[d + 1]; ++k) vals[k] = cols[k] == d ? 1.0 : 0.0;
    }
    for (double& v : res) v = -v;

    std::vector<double> delta;
    try {
      if (opts.linear.method == SolverMethod::direct_lu) {
        if (lu_) {
          lu_->refactor(jac);
        } else {
          lu_ = std::make_unique<LuFactorization>(jac);
        }
        delta = lu_->solve(res);
      } else {
        SolveResult sol = linear_solve(jac, res, opts.linear);
        if (!sol.report.converged) {
          report.message = "linear solver did not converge";
          return report;
        }
        delta = std::move(sol.x);
      }
    } catch (const SingularMatrixError& e) {
      lu_.reset();
      report.message = e.what();
      return report;
    }
    for (std::size_t i = 0; i < size_; ++i) x[i] += delta[i];
    ++report.iterations;
  }
}

double CoupledSystem::velocity_l2(std::span<const double> d) const {
  if (d.size() < 2 * nu_) throw std::invalid_argument("velocity_l2: size mismatch");
  double s = 0.0;
  for (int c = 0; c < 2; ++c) {
    const auto part = d.subspan(c * nu_, nu_);
    s += dot(part, velocity_mass_.multiply(part));
  }
  return std::sqrt(std::max(s, 0.0));
}

double CoupledSystem::temperature_l2(std::span<const double> d) const {
  if (d.size() < temperature_offset() + nt_) throw std::invalid_argument("temperature_l2: size mismatch");
  const auto part = d.subspan(temperature_offset(), nt_);
  return std::sqrt(std::max(dot(part, temperature_mass_.multiply(part)), 0.0));
}

// ---------------------------------------------------------------------------

SystemState initial_state(const AnalyticCase& problem, const FieldSpaces& spaces, double gamma) {
  SystemState s{FEFunction(spaces.velocity), FEFunction(spaces.pressure),
                FEFunction(spaces.temperature), 0.0};
  if (problem.has_exact_solution() && problem.velocity_gradient && problem.pressure) {
    const double mean = problem.pressure_mean ? problem.pressure_mean(0.0) : 0.0;
    const ProjectedPair pair = modified_projection(
        [&](Point p) { return problem.velocity(p, 0.0); },
        [&](Point p) { return problem.velocity_gradient(p, 0.0); },
        [&](Point p) { return problem.pressure(p, 0.0) - mean; }, spaces.velocity, spaces.pressure,
        PenaltyForm{problem.params.reynolds, gamma});
    s.u = pair.velocity;
    s.p = pair.pressure;
  } else if (problem.initial_velocity) {
    s.u = interpolate(spaces.velocity, VectorFn([&](Point p) { return problem.initial_velocity(p, 0.0); }));
  }
  if (problem.temperature) {
    s.theta = interpolate(spaces.temperature, ScalarFn([&](Point p) { return problem.temperature(p, 0.0); }));
  } else if (problem.initial_temperature) {
    s.theta = interpolate(spaces.temperature,
                          ScalarFn([&](Point p) { return problem.initial_temperature(p, 0.0); }));
  }
  return s;
}

std::pair<SystemState, NewtonReport> solve_timestep(const CoupledSystem& system,
                                                    std::span<const SystemState> history,
                                                    double dt, TimeScheme scheme,
                                                    const NewtonOptions& opts) {
  if (history.empty()) throw std::invalid_argument("solve_timestep: empty history");
  std::vector<std::vector<double>> packed;
  for (const auto& s : history) packed.push_back(system.pack(s));
  std::vector<const std::vector<double>*> ptrs;
  for (const auto& v : packed) ptrs.push_back(&v);
  const double t = history.front().t + dt;
  const StepContext ctx = system.step_context(ptrs, dt, scheme, t);
  std::vector<double> x = packed.front();
  system.impose_dirichlet(x, t);
  NewtonReport report = system.newton(x, ctx, opts);
  return {system.unpack(x, t), std::move(report)};
}

TransientResult run_transient(const AnalyticCase& problem, const FieldSpaces& spaces, double gamma,
                              const TransientOptions& opts) {
  if (!(opts.dt > 0.0)) throw std::invalid_argument("run_transient: dt must be positive");
  if (!(opts.t_final > 0.0) && !opts.steady_stop) {
    throw std::invalid_argument("run_transient: need a final time or the steady stop");
  }
  const CoupledSystem system(problem, spaces, gamma);
  TransientResult result;
  result.state = initial_state(problem, spaces, gamma);
  int steps = opts.max_steps;
  double dt = opts.dt;
  if (opts.t_final > 0.0) {
    steps = std::max(1, static_cast<int>(std::ceil(opts.t_final / opts.dt - 1e-9)));
    dt = opts.t_final / steps;
  }
  result.dt = dt;

  std::vector<double> xn = system.pack(result.state);
  std::vector<double> xm;
  if (opts.observer) opts.observer(result.state);
  for (int n = 1; n <= steps; ++n) {
    const double t = opts.t_final > 0.0 ? n * dt : result.state.t + dt;
    std::vector<const std::vector<double>*> hist{&xn};
    if (!xm.empty()) hist.push_back(&xm);
    const StepContext ctx = system.step_context(hist, dt, opts.scheme, t);
    std::vector<double> x = xn;
    system.impose_dirichlet(x, t);
    StepRecord rec;
    rec.t = t;
    rec.newton = system.newton(x, ctx, opts.newton);
    if (!rec.newton.converged) {
      result.message = "step " + std::to_string(n) + " (t=" + std::to_string(t) +
                       "): " + rec.newton.message;
      result.steps.push_back(std::move(rec));
      return result;
    }
    std::vector<double> diff(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) diff[i] = x[i] - xn[i];
    rec.velocity_change = system.velocity_l2(diff) / dt;
    rec.temperature_change = system.temperature_l2(diff) / dt;
    result.steps.push_back(rec);
    xm = std::move(xn);
    xn = std::move(x);
    result.state = system.unpack(xn, t);
    if (opts.observer) opts.observer(result.state);
    if (opts.steady_stop && rec.velocity_change <= opts.steady_tolerance &&
        rec.temperature_change <= opts.steady_tolerance) {
      result.steady_reached = true;
      break;
    }
  }
  result.ok = opts.t_final > 0.0 || result.steady_reached;
  if (!result.ok) result.message = "steady state not reached within the step limit";
  return result;
}

SteadyResult solve_steady(const AnalyticCase& problem, const FieldSpaces& spaces, double gamma,
                          const NewtonOptions& opts) {
  const CoupledSystem system(problem, spaces, gamma);
  SteadyResult result;
  const SystemState s0 = initial_state(problem, spaces, gamma);
  std::vector<double> x0 = system.pack(s0);
  system.impose_dirichlet(x0, 0.0);

  std::vector<double> x = x0;
  result.newton = system.newton(x, system.steady_context(), opts);
  if (result.newton.converged) {
    result.ok = true;
    result.state = system.unpack(x, 0.0);
    return result;
  }

  // Pseudo-time continuation.
  NewtonOptions probe = opts;
  probe.max_iterations = std::min(opts.max_iterations, 8);
  std::vector<double> xn = x0;
  double dt = 0.05;
  double t = 0.0;
  for (int step = 0; step < 200 && dt >= 1e-6; ++step) {
    const std::vector<const std::vector<double>*> hist{&xn};
    const StepContext ctx = system.step_context(hist, dt, TimeScheme::bdf1, t + dt);
    std::vector<double> xs = xn;
    const NewtonReport r = system.newton(xs, ctx, opts);
    if (!r.converged) {
      dt *= 0.25;
      continue;
    }
    ++result.pseudo_steps;
    t += dt;
    xn = xs;
    std::vector<double> trial = xn;
    result.newton = system.newton(trial, system.steady_context(), probe);
    if (result.newton.converged) {
      result.ok = true;
      result.state = system.unpack(trial, 0.0);
      return result;
    }
    dt *= 2.0;
  }
  result.state = system.unpack(xn, 0.0);
  result.message = "steady Newton failed: " + result.newton.message;
  return result;
}

void write_snapshot_csv(const SystemState& state, std::ostream& os) {
  const FunctionSpace& vs = state.u.space();
  const std::size_t n = vs.scalar_ndof();
  os << "x,y,u1,u2,p,theta\n";
  os.precision(10);
  for (std::size_t d = 0; d < n; ++d) {
    const Point p = vs.node(d);
    os << p.x << ',' << p.y << ',' << state.u.data()[d] << ',' << state.u.data()[n + d] << ','
       << state.p.value(p) << ',' << state.theta.value(p) << '\n';
  }
}

}  // namespace nsb
