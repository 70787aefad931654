#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "nsb/analysis.hpp"
#include "nsb/assembly.hpp"
#include "nsb/convection_solver.hpp"

using namespace nsb;

namespace {

std::vector<double> random_vector(std::size_t n, unsigned seed, double scale = 1.0) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> d(-scale, scale);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

AnalyticCase case_for(const std::string& name) {
  if (name == "mp-bur") return burggraf_case(50.0);
  if (name == "cavity") return cavity_case(1e4, 0.71);
  return nourgaliev_case();
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST(ElementTriple, ParseAndName) {
  EXPECT_EQ(ElementTriple::parse("P1-P1-P1").name(), "P1-P1-P1");
  EXPECT_EQ(ElementTriple::parse("p2p1p2").name(), "P2-P1-P2");
  const auto e = ElementTriple::parse("P1-P0");
  EXPECT_EQ(e.velocity, 1);
  EXPECT_EQ(e.pressure, 0);
  EXPECT_EQ(e.temperature, 1);
  for (const char* bad : {"", "P3-P1-P1", "P1", "Q1-Q1", "P1-P1-P0"})
    EXPECT_THROW(ElementTriple::parse(bad), std::invalid_argument) << bad;
}

TEST(TimeSchemes, Parse) {
  EXPECT_EQ(parse_time_scheme("bdf1"), TimeScheme::bdf1);
  EXPECT_EQ(parse_time_scheme("BDF2"), TimeScheme::bdf2);
  EXPECT_STREQ(to_string(TimeScheme::bdf2), "bdf2");
  EXPECT_THROW(parse_time_scheme("cn"), std::invalid_argument);
}

TEST(NewtonOptions, Validate) {
  NewtonOptions o;
  EXPECT_NO_THROW(o.validate());
  o.max_iterations = 0;
  EXPECT_THROW(o.validate(), std::invalid_argument);
  o = {};
  o.relative_tolerance = -1.0;
  EXPECT_THROW(o.validate(), std::invalid_argument);
}

TEST(CoupledSystem, LayoutAndPackRoundTrip) {
  const auto spaces = make_spaces(make_square_mesh(4), ElementTriple::parse("P1-P1-P1"));
  const CoupledSystem sys(cavity_case(), spaces, 0.01);
  EXPECT_EQ(sys.size(), spaces.ndof());
  EXPECT_FALSE(sys.has_mean_multiplier());
  EXPECT_EQ(sys.pressure_offset(), 50u);
  EXPECT_EQ(sys.temperature_offset(), 75u);
  const auto x = random_vector(sys.size(), 1);
  EXPECT_EQ(sys.pack(sys.unpack(x, 0.0)), x);
  const CoupledSystem mult(cavity_case(), spaces, 0.0);
  EXPECT_TRUE(mult.has_mean_multiplier());
  EXPECT_EQ(mult.size(), spaces.ndof() + 1);
}

TEST(CoupledSystem, DirichletSets) {
  const auto spaces = make_spaces(make_square_mesh(4), ElementTriple::parse("P1-P1-P1"));
  // Cavity: velocity on the whole boundary (2 x 16), temperature on two walls (2 x 5).
  EXPECT_EQ(CoupledSystem(cavity_case(), spaces, 0.1).dirichlet_dofs().size(), 42u);
  EXPECT_EQ(CoupledSystem(nourgaliev_case(), spaces, 0.1).dirichlet_dofs().size(), 48u);
}

TEST(CoupledSystem, ZeroStateHasZeroResidual) {
  const auto spaces = make_spaces(make_square_mesh(5), ElementTriple::parse("P1-P1-P1"));
  const CoupledSystem sys(cavity_case(), spaces, 0.05);
  const std::vector<double> x(sys.size(), 0.0);
  EXPECT_EQ(max_abs(sys.assemble_residual(x, sys.steady_context())), 0.0);
}

TEST(CoupledSystem, BuoyancyColumn) {
  // u = p = 0, theta = 1: only the vertical momentum rows see -fb (1, phi_i).
  const auto spaces = make_spaces(make_square_mesh(4), ElementTriple::parse("P1-P1-P1"));
  const AnalyticCase c = cavity_case();
  const CoupledSystem sys(c, spaces, 0.05);
  std::vector<double> x(sys.size(), 0.0);
  for (std::size_t i = sys.temperature_offset(); i < sys.size(); ++i) x[i] = 1.0;
  const auto r = sys.assemble_residual(x, sys.steady_context());
  const auto load = assemble_load(*make_space(spaces.velocity->mesh_ptr(), 1, 1),
                                  ScalarFn([](Point) { return 1.0; }));
  const std::size_t nu = spaces.velocity->scalar_ndof();
  for (std::size_t i = 0; i < nu; ++i) {
    EXPECT_NEAR(r[i], 0.0, 1e-15);
    EXPECT_NEAR(r[nu + i], -c.params.buoyancy_coefficient() * load[i], 1e-14);
  }
  for (std::size_t i = sys.pressure_offset(); i < sys.size(); ++i) EXPECT_NEAR(r[i], 0.0, 1e-14);
}

struct JacobianCase {
  std::string problem;
  std::string elements;
  int n;
  double gamma;
};

class JacobianCheck : public ::testing::TestWithParam<JacobianCase> {};

TEST_P(JacobianCheck, MatchesCentralDifferences) {
  const auto& prm = GetParam();
  const auto spaces = make_spaces(make_square_mesh(prm.n), ElementTriple::parse(prm.elements));
  const CoupledSystem sys(case_for(prm.problem), spaces, prm.gamma);
  const auto x = random_vector(sys.size(), 3);
  const auto hist = random_vector(sys.size(), 4);
  const auto dx = random_vector(sys.size(), 5);
  const std::vector<const std::vector<double>*> history{&hist};
  for (const StepContext& ctx :
       {sys.steady_context(), sys.step_context(history, 0.01, TimeScheme::bdf1, 0.3)}) {
    const SparseMatrix j = sys.assemble_jacobian(x, ctx);
    const auto jdx = j.multiply(dx);
    const double scale = std::max(1.0, max_abs(jdx));
    // The residual is quadratic in x, so the central difference is exact up to rounding;
    // the sweep picks the step with the smallest rounding error.
    double best = INFINITY;
    for (double eps : {1e-2, 1e-3, 1e-4, 1e-5, 1e-6}) {
      std::vector<double> xp(x), xm(x);
      for (std::size_t i = 0; i < x.size(); ++i) {
        xp[i] += eps * dx[i];
        xm[i] -= eps * dx[i];
      }
      const auto rp = sys.assemble_residual(xp, ctx);
      const auto rm = sys.assemble_residual(xm, ctx);
      double err = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i)
        err = std::max(err, std::abs((rp[i] - rm[i]) / (2 * eps) - jdx[i]));
      best = std::min(best, err / scale);
    }
    EXPECT_LE(best, 1e-9);
  }
}

INSTANTIATE_TEST_SUITE_P(
    Cases, JacobianCheck,
    ::testing::Values(JacobianCase{"nc-nour", "P1-P1-P1", 3, 0.05},
                      JacobianCase{"nc-nour", "P1-P1-P1", 6, 1e-7},
                      JacobianCase{"cavity", "P1-P1-P1", 3, 0.0},
                      JacobianCase{"cavity", "P2-P1-P2", 4, 0.0},
                      JacobianCase{"mp-bur", "P1-P1-P1", 3, 0.1},
                      JacobianCase{"mp-bur", "P1-P0", 5, 0.01}));

TEST(CoupledSystem, JacobianAtZeroIsLinearPart) {
  const auto mesh = make_square_mesh(4);
  const auto spaces = make_spaces(mesh, ElementTriple::parse("P1-P1-P1"));
  const AnalyticCase c = cavity_case();
  const double gamma = 0.02, dt = 0.1;
  const CoupledSystem sys(c, spaces, gamma);
  const std::vector<double> zero(sys.size(), 0.0);
  const std::vector<const std::vector<double>*> history{&zero};
  const SparseMatrix j =
      sys.assemble_jacobian(zero, sys.step_context(history, dt, TimeScheme::bdf1, dt));

  const auto& vs = *spaces.velocity;
  const auto& ps = *spaces.pressure;
  const auto& ts = *spaces.temperature;
  const auto mu = assemble_bilinear(BilinearForm::mass, vs, vs);
  const auto ku = assemble_bilinear(BilinearForm::velocity_stiffness, vs, vs);
  const auto b = assemble_bilinear(BilinearForm::divergence, vs, ps);
  const auto mp = assemble_bilinear(BilinearForm::pressure_mass, ps, ps);
  const auto mt = assemble_bilinear(BilinearForm::pressure_mass, ts, ts);
  const auto kt = assemble_bilinear(BilinearForm::temperature_stiffness, ts, ts);
  const std::size_t nu = vs.scalar_ndof(), po = sys.pressure_offset(), to = sys.temperature_offset();
  const double re = c.params.reynolds, kappa = c.params.thermal_diffusivity();
  const double fb = c.params.buoyancy_coefficient();
  for (std::size_t r = 0; r < 2 * nu; ++r) {
    for (std::size_t s = 0; s < 2 * nu; ++s)
      EXPECT_NEAR(j.coeff(r, s), mu.coeff(r, s) / dt + ku.coeff(r, s) / re, 1e-12);
    for (std::size_t s = 0; s < ps.ndof(); ++s) EXPECT_NEAR(j.coeff(r, po + s), b.coeff(s, r), 1e-14);
  }
  for (std::size_t r = 0; r < ps.ndof(); ++r) {
    for (std::size_t s = 0; s < 2 * nu; ++s) EXPECT_NEAR(j.coeff(po + r, s), -b.coeff(r, s), 1e-14);
    for (std::size_t s = 0; s < ps.ndof(); ++s)
      EXPECT_NEAR(j.coeff(po + r, po + s), gamma * mp.coeff(r, s), 1e-15);
  }
  for (std::size_t r = 0; r < ts.ndof(); ++r) {
    for (std::size_t s = 0; s < ts.ndof(); ++s)
      EXPECT_NEAR(j.coeff(to + r, to + s), mt.coeff(r, s) / dt + kappa * kt.coeff(r, s), 1e-12);
    EXPECT_NEAR(j.coeff(nu + r, to + r), -fb * mt.coeff(r, r), 1e-14);
    for (std::size_t s = 0; s < 2 * nu; ++s) EXPECT_EQ(j.coeff(to + r, s), 0.0);
  }
}

TEST(CoupledSystem, PatternIsStructurallySymmetric) {
  for (const char* el : {"P1-P1-P1", "P2-P1-P2", "P1-P0"}) {
    const auto spaces = make_spaces(make_square_mesh(3), ElementTriple::parse(el));
    const CoupledSystem sys(cavity_case(), spaces, 0.0);
    const SparseMatrix j = sys.assemble_jacobian(random_vector(sys.size(), 8), sys.steady_context());
    SparseMatrix jt = j.transpose();
    for (std::size_t r = 0; r < j.rows(); ++r)
      for (int k = j.row_offsets()[r]; k < j.row_offsets()[r + 1]; ++k)
        EXPECT_NE(jt.find(j.col_indices()[k], r), nullptr) << el;
  }
}

TEST(CoupledSystem, TransientResidualOfFrozenStateEqualsSteady) {
  // With x^n = x^{n-1} = x the BDF terms cancel.
  const auto spaces = make_spaces(make_square_mesh(4), ElementTriple::parse("P1-P1-P1"));
  const CoupledSystem sys(nourgaliev_case(), spaces, 0.01);
  const auto x = random_vector(sys.size(), 9);
  const std::vector<const std::vector<double>*> history{&x, &x};
  StepContext steady = sys.steady_context();
  steady.t = 0.4;
  for (TimeScheme s : {TimeScheme::bdf1, TimeScheme::bdf2}) {
    const StepContext ctx = sys.step_context(history, 0.05, s, 0.4);
    const auto rt = sys.assemble_residual(x, ctx);
    const auto rs = sys.assemble_residual(x, steady);
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(rt[i], rs[i], 1e-12);
  }
}

TEST(CoupledSystem, StepContextCoefficients) {
  const auto spaces = make_spaces(make_square_mesh(2), ElementTriple::parse("P1-P1-P1"));
  const CoupledSystem sys(nourgaliev_case(), spaces, 0.01);
  const auto a = random_vector(sys.size(), 10);
  const auto b = random_vector(sys.size(), 11);
  const std::vector<const std::vector<double>*> two{&a, &b};
  const StepContext c2 = sys.step_context(two, 0.1, TimeScheme::bdf2, 0.5);
  EXPECT_DOUBLE_EQ(c2.alpha0, 1.5);
  EXPECT_DOUBLE_EQ(c2.inv_dt, 10.0);
  EXPECT_DOUBLE_EQ(c2.t, 0.5);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(c2.history[i], -2.0 * a[i] + 0.5 * b[i], 1e-15);
  const StepContext c1 = sys.step_context(std::span(two).first(1), 0.1, TimeScheme::bdf2, 0.5);
  EXPECT_DOUBLE_EQ(c1.alpha0, 1.0);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_DOUBLE_EQ(c1.history[i], -a[i]);
}

TEST(Newton, ZeroDataConvergesInOneSolve) {
  AnalyticCase c = cavity_case();
  for (auto& [side, g] : c.temperature_boundary) g = [](Point, double) { return 0.0; };
  const auto spaces = make_spaces(make_square_mesh(5), ElementTriple::parse("P1-P1-P1"));
  const CoupledSystem sys(c, spaces, 0.01);
  std::vector<double> x(sys.size(), 0.0);
  const NewtonReport r = sys.newton(x, sys.steady_context(), {});
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.iterations, 1);
  EXPECT_EQ(max_abs(x), 0.0);
}

TEST(Newton, QuadraticConvergenceOnTransientStep) {
  const AnalyticCase c = nourgaliev_case();
  const auto spaces = make_spaces(make_square_mesh(20), ElementTriple::parse("P1-P1-P1"));
  const double gamma = gamma_value(GammaPolicy::parse("re12h"), 0.05, c.params.reynolds);
  const CoupledSystem sys(c, spaces, gamma);
  const SystemState s0 = initial_state(c, spaces, gamma);
  const auto [s1, report] = solve_timestep(sys, std::span(&s0, 1), 0.05, TimeScheme::bdf2, {});
  ASSERT_TRUE(report.converged) << report.message;
  EXPECT_LE(report.iterations, 5);
  const auto& r = report.residual_norms;
  ASSERT_GE(r.size(), 3u);
  // Contraction factor collapses from one iteration to the next.
  for (std::size_t k = 1; k + 1 < r.size() && r[k + 1] > 1e-11; ++k)
    EXPECT_LE(r[k + 1] / r[k], 0.1 * std::max(r[k] / r[k - 1], 1e-3)) << "iteration " << k;
  EXPECT_NEAR(s1.t, 0.05, 1e-15);
}

TEST(Transient, CavityPressureMeanStaysZero) {
  const auto spaces = make_spaces(make_square_mesh(8), ElementTriple::parse("P1-P1-P1"));
  TransientOptions opts;
  opts.scheme = TimeScheme::bdf2;
  opts.dt = 0.05;
  opts.t_final = 0.25;
  int calls = 0;
  opts.observer = [&](const SystemState& s) {
    ++calls;
    EXPECT_LE(std::abs(mean_value(s.p)), 1e-8) << "t=" << s.t;
  };
  const TransientResult r = run_transient(cavity_case(), spaces, 0.01, opts);
  ASSERT_TRUE(r.ok) << r.message;
  EXPECT_EQ(r.steps.size(), 5u);
  EXPECT_GE(calls, 5);
  EXPECT_NEAR(r.state.t, 0.25, 1e-14);
}

TEST(Transient, StepShrinksToLandOnFinalTime) {
  AnalyticCase c = cavity_case();
  const auto spaces = make_spaces(make_square_mesh(3), ElementTriple::parse("P1-P1-P1"));
  TransientOptions opts;
  opts.dt = 0.3;
  opts.t_final = 1.0;
  const TransientResult r = run_transient(c, spaces, 0.1, opts);
  ASSERT_TRUE(r.ok);
  EXPECT_DOUBLE_EQ(r.dt, 0.25);
  EXPECT_EQ(r.steps.size(), 4u);
}

TEST(InitialState, ManufacturedAndCavity) {
  const auto spaces = make_spaces(make_square_mesh(6), ElementTriple::parse("P1-P1-P1"));
  const AnalyticCase nour = nourgaliev_case();
  const SystemState s = initial_state(nour, spaces, 0.01);
  const auto& ts = *spaces.temperature;
  for (std::size_t i = 0; i < ts.ndof(); ++i)
    EXPECT_NEAR(s.theta.data()[i], nour.temperature(ts.node(i), 0.0), 1e-14);
  const auto& vs = *spaces.velocity;
  for (int d : vs.boundary_dofs())
    EXPECT_NEAR(s.u.data()[d], nour.velocity(vs.node(d), 0.0).x, 1e-14);
  EXPECT_EQ(s.t, 0.0);

  const SystemState cav = initial_state(cavity_case(), spaces, 0.01);
  EXPECT_EQ(max_abs(cav.u.data()), 0.0);
  EXPECT_EQ(max_abs(cav.p.data()), 0.0);
  for (std::size_t i = 0; i < ts.ndof(); ++i)
    EXPECT_NEAR(cav.theta.data()[i], 0.5 - ts.node(i).x, 1e-15);
}

TEST(Steady, CavityConvergesAndIsAntisymmetric) {
  const auto spaces = make_spaces(make_square_mesh(10), ElementTriple::parse("P1-P1-P1"));
  const SteadyResult r = solve_steady(cavity_case(), spaces, 1e-3);
  ASSERT_TRUE(r.ok) << r.message;
  EXPECT_TRUE(r.newton.converged);
  // Centro-symmetry: u(1-x, 1-y) = -u(x, y), theta(1-x, 1-y) = -theta(x, y).
  for (Point p : {Point{0.2, 0.3}, Point{0.5, 0.5}, Point{0.7, 0.1}}) {
    const Point q{1.0 - p.x, 1.0 - p.y};
    EXPECT_NEAR(r.state.u.value(p, 0), -r.state.u.value(q, 0), 1e-8);
    EXPECT_NEAR(r.state.u.value(p, 1), -r.state.u.value(q, 1), 1e-8);
    EXPECT_NEAR(r.state.theta.value(p), -r.state.theta.value(q), 1e-8);
  }
}
