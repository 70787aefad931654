// End-to-end acceptance checks. Each criterion prints its measured tables,
// then one "criterion N: PASS|FAIL" line; the exit code is nonzero on failure.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <random>
#include <sstream>

#include "nsb/analysis.hpp"
#include "nsb/assembly.hpp"
#include "nsb/stokes_projection.hpp"
#include "nsb/study.hpp"
#include "oracles.hpp"

using namespace nsb;

namespace {

std::string reference_dir = "reference";

/// Collects named checks; a criterion passes when all of them do.
class Checklist {
 public:
  void check(bool ok, const std::string& what) {
    std::cout << "  [" << (ok ? "ok" : "FAILED") << "] " << what << '\n';
    all_ &= ok;
    if (!ok) failed_.push_back(what);
  }
  bool passed() const { return all_; }
  std::string summary() const {
    if (all_) return "all checks met";
    std::string s;
    for (const auto& f : failed_) s += (s.empty() ? "" : "; ") + f;
    return s;
  }

 private:
  bool all_ = true;
  std::vector<std::string> failed_;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string show(std::optional<double> v, const char* f = "%.3f") {
  return v ? fmt(f, *v) : std::string("n/a");
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::optional<double> error_at(const ConvergenceTable& t, std::size_t col, std::size_t row) {
  const auto& r = t.columns.at(col).at(row);
  return r.ok() ? r.error : std::nullopt;
}

std::optional<double> rate_at(const ConvergenceTable& t, std::size_t col, std::size_t row) {
  return convergence_rates(t.columns.at(col)).at(row);
}

std::optional<double> finest_rate(const ConvergenceTable& t, std::size_t col) {
  return rate_at(t, col, t.subdivisions.size() - 1);
}

bool within(std::optional<double> v, double lo, double hi) { return v && *v >= lo && *v <= hi; }

StudyResult study(const std::string& case_id, const std::string& elements, std::vector<int> mesh,
                  const std::vector<std::string>& policies) {
  StudyConfig c;
  c.case_id = case_id;
  c.elements = ElementTriple::parse(elements);
  c.mesh_seq = std::move(mesh);
  for (const auto& p : policies) c.gammas.push_back(GammaPolicy::parse(p));
  c.reference_dir = reference_dir;
  const auto t0 = std::chrono::steady_clock::now();
  StudyResult r = run_study(c, &std::cout);
  std::cout << "  study time " << fmt("%.1f", seconds_since(t0)) << " s\n";
  for (const auto& t : r.tables) std::cout << emit_table(t, TableFormat::markdown) << '\n';
  return r;
}

// ---------------------------------------------------------------------------

bool criterion1(Checklist& cl) {
  const auto r = study("mp-bur", "P1-P1", {20, 40, 80, 160}, {"re12h"});
  const auto& t = r.table(Quantity::L2_u);
  const double published[] = {2.32e-2, 1.21e-2, 6.25e-3, 3.17e-3};
  cl.check(within(finest_rate(t, 0), 0.85, 1.15),
           "L2(u) finest rate " + show(finest_rate(t, 0)) + " in 1.0 +- 0.15");
  for (std::size_t i = 0; i < 4; ++i) {
    const auto e = error_at(t, 0, i);
    cl.check(e && *e <= 2.0 * published[i] && *e >= 0.5 * published[i],
             "n=" + std::to_string(t.subdivisions[i]) + " L2(u) " + show(e, "%.2E") +
                 " within factor 2 of " + fmt("%.2E", published[i]));
  }
  return cl.passed();
}

bool criterion2(Checklist& cl) {
  const auto r = study("mp-bur", "P1-P0", {20, 40, 80, 160}, {"1e-7", "reh2", "re12h"});
  const auto& u = r.table(Quantity::L2_u);
  const auto& p = r.table(Quantity::L2_p);
  cl.check(within(finest_rate(u, 0), -0.1, 0.1),
           "gamma=1e-7 L2(u) finest rate " + show(finest_rate(u, 0)) + " in 0.0 +- 0.1");
  cl.check(within(finest_rate(p, 1), -1.15, -0.85),
           "gamma=Re h^2 L2(p) finest rate " + show(finest_rate(p, 1)) + " in -1.0 +- 0.15");
  cl.check(within(finest_rate(u, 2), 0.9, 1.1),
           "gamma=Re^1/2 h L2(u) finest rate " + show(finest_rate(u, 2)) + " in 1.0 +- 0.1");
  return cl.passed();
}

bool criterion3(Checklist& cl) {
  const auto r = study("mp-bur", "P1-P1", {20, 40, 80, 160}, {"re13h23"});
  for (Quantity q : {Quantity::L2_u, Quantity::H1_u}) {
    const auto rate = finest_rate(r.table(q), 0);
    cl.check(within(rate, 0.55, 0.75),
             std::string(to_string(q)) + " finest rate " + show(rate) + " in [0.55, 0.75]");
  }
  return cl.passed();
}

bool criterion4(Checklist& cl) {
  const auto r = study("nc-nour", "P1-P1-P1", {20, 40, 80}, {"re12h", "reh2"});
  const auto ru = finest_rate(r.table(Quantity::L2_u), 0);
  const auto rt = finest_rate(r.table(Quantity::L2_theta), 0);
  const auto rh = finest_rate(r.table(Quantity::L2_u), 1);
  cl.check(within(ru, 0.78, 1.08), "gamma=Re^1/2 h L2(u) finest rate " + show(ru) + " in 0.93 +- 0.15");
  cl.check(within(rt, 0.85, 1.15), "gamma=Re^1/2 h L2(theta) finest rate " + show(rt) + " in 1.0 +- 0.15");
  cl.check(rh && *rh >= 1.7, "gamma=Re h^2 L2(u) finest rate " + show(rh) + " >= 1.7");
  for (const auto& c : r.cells)
    if (c.n == 80)
      cl.check(c.seconds < 900.0, "n=80 " + c.policy + " run " + fmt("%.0f", c.seconds) + " s < 15 min");
  return cl.passed();
}

bool criterion5(Checklist& cl) {
  const auto r = study("nc-sq", "P1-P1-P1", {20, 40, 80}, {"re12h", "1e-7"});
  for (Quantity q : {Quantity::L2_u, Quantity::L2_theta}) {
    const auto& t = r.table(q);
    for (std::size_t row = 1; row < t.subdivisions.size(); ++row) {
      const auto rate = rate_at(t, 0, row);
      cl.check(rate && *rate >= 1.0, std::string("gamma=Re^1/2 h ") + to_string(q) + " rate " +
                                         show(rate) + " >= 1.0 (n=" +
                                         std::to_string(t.subdivisions[row]) + ")");
    }
  }
  const auto rp = finest_rate(r.table(Quantity::L2_p), 1);
  cl.check(rp && *rp <= 0.15, "gamma=1e-7 L2(p) finest rate " + show(rp) + " <= 0.15");
  return cl.passed();
}

bool criterion6(Checklist& cl) {
  const auto mesh = make_square_mesh(160);
  const auto p1 = make_spaces(mesh, ElementTriple::parse("P1-P1-P1")).ndof();
  const auto p2 = make_spaces(mesh, ElementTriple::parse("P2-P1-P2")).ndof();
  cl.check(p1 == 103684, "n=160 P1-P1-P1 ndof " + std::to_string(p1) + " == 103684");
  cl.check(p2 == 335044, "n=160 P2-P1-P2 ndof " + std::to_string(p2) + " == 335044");
  return cl.passed();
}

// ---------------------------------------------------------------------------
// Property suite.

std::vector<double> random_vector(std::size_t n, std::mt19937& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

void skew_symmetry(Checklist& cl, std::mt19937& rng) {
  double worst = 0.0;
  for (int deg : {1, 2}) {
    const auto mesh = make_square_mesh(6);
    const auto vs = make_space(mesh, deg, 2);
    const auto ts = make_space(mesh, deg, 1);
    for (int s = 0; s < 10; ++s) {
      const FEFunction u(vs, random_vector(vs->ndof(), rng));
      const auto c = assemble_convection(u, ConvectionVariant::momentum, *vs, *vs);
      const auto cbar = assemble_convection(u, ConvectionVariant::temperature, *ts, *ts);
      const auto v = random_vector(vs->ndof(), rng);
      const auto th = random_vector(ts->ndof(), rng);
      worst = std::max(worst, std::abs(dot(v, c.multiply(v))) / (max_abs(c.values()) * dot(v, v)));
      worst = std::max(worst,
                       std::abs(dot(th, cbar.multiply(th))) / (max_abs(cbar.values()) * dot(th, th)));
    }
  }
  cl.check(worst <= 1e-12, "skew-symmetry of c and c_bar: scaled |v^T C v| " + fmt("%.1e", worst));
}

void energy_identity(Checklist& cl, std::mt19937& rng) {
  const auto mesh = make_square_mesh(5);
  double worst = 0.0;
  for (auto [vd, pd] : {std::pair{1, 1}, std::pair{2, 1}, std::pair{1, 0}}) {
    const auto vs = make_space(mesh, vd, 2);
    const auto ps = make_space(mesh, pd, 1);
    const PenaltyForm form{118.7, 0.013};
    const auto a = assemble_a_gamma(*vs, *ps, form);
    const auto k = assemble_bilinear(BilinearForm::velocity_stiffness, *vs, *vs);
    const auto m = assemble_bilinear(BilinearForm::pressure_mass, *ps, *ps);
    for (int s = 0; s < 20; ++s) {
      const auto v = random_vector(vs->ndof(), rng);
      const auto q = random_vector(ps->ndof(), rng);
      std::vector<double> x(v);
      x.insert(x.end(), q.begin(), q.end());
      const double lhs = dot(x, a.multiply(x));
      const double rhs = dot(v, k.multiply(v)) / form.reynolds + form.gamma * dot(q, m.multiply(q));
      worst = std::max(worst, std::abs(lhs - rhs) / std::abs(rhs));
    }
  }
  cl.check(worst <= 1e-12, "energy identity of a_gamma: relative defect " + fmt("%.1e", worst));
}

void zero_mean_pressure(Checklist& cl) {
  double worst = 0.0;
  int solves = 0;
  const AnalyticCase bur = burggraf_case(100.0);
  for (const char* el : {"P1-P1", "P1-P0"}) {
    for (const char* g : {"1e-7", "re12h", "reh2"}) {
      const auto mesh = make_square_mesh(16);
      const auto e = ElementTriple::parse(el);
      const double gamma = gamma_value(GammaPolicy::parse(g), 1.0 / 16, 100.0);
      const auto r = modified_projection([&](Point x) { return bur.velocity(x, 0); },
                                         [&](Point x) { return bur.velocity_gradient(x, 0); },
                                         [&](Point x) { return bur.pressure(x, 0); },
                                         make_space(mesh, e.velocity, 2),
                                         make_space(mesh, e.pressure, 1), {100.0, gamma});
      worst = std::max(worst, std::abs(mean_value(r.pressure)));
      ++solves;
    }
  }
  // Every converged step of a no-slip cavity run.
  const AnalyticCase cav = cavity_case();
  const auto spaces = make_spaces(make_square_mesh(12), ElementTriple::parse("P1-P1-P1"));
  TransientOptions opts;
  opts.dt = 0.02;
  opts.t_final = 0.2;
  opts.observer = [&](const SystemState& s) {
    worst = std::max(worst, std::abs(mean_value(s.p)));
    ++solves;
  };
  const double gamma = gamma_value(GammaPolicy::parse("re12h"), 1.0 / 12, cav.params.reynolds);
  const bool ran = run_transient(cav, spaces, gamma, opts).ok;
  const SteadyResult steady = solve_steady(cav, spaces, gamma);
  worst = std::max(worst, std::abs(mean_value(steady.state.p)));
  ++solves;
  cl.check(ran && steady.ok && worst <= 1e-8,
           "zero-mean pressure over " + std::to_string(solves) + " solves with gamma > 0: max |int p_h| " +
               fmt("%.1e", worst));
}

void galerkin_identity(Checklist& cl, std::mt19937& rng) {
  const AnalyticCase bur = burggraf_case(100.0);
  const TensorFn grad = [&](Point x) { return bur.velocity_gradient(x, 0); };
  const ScalarFn p = [&](Point x) { return bur.pressure(x, 0); };
  double worst = 0.0;
  // Re^1/2 h = 0.5 at n = 20; unpenalized only for the stable pair.
  for (auto [el, gamma] : {std::pair{"P1-P1", 0.5}, std::pair{"P1-P1", 1e-7}, std::pair{"P2-P1", 0.0},
                           std::pair{"P1-P0", 1e-7}}) {
    const auto e = ElementTriple::parse(el);
    const auto mesh = make_square_mesh(20);
    const auto vs = make_space(mesh, e.velocity, 2);
    const auto ps = make_space(mesh, e.pressure, 1);
    const PenaltyForm form{100.0, gamma};
    const auto pair = modified_projection([&](Point x) { return bur.velocity(x, 0); }, grad, p, vs,
                                          ps, form);
    const ProjectedPair none{FEFunction(vs), FEFunction(ps), {}};
    for (int s = 0; s < 20; ++s) {
      FEFunction v(vs, random_vector(vs->ndof(), rng));
      for (int d : vs->boundary_dofs()) {
        v.data()[d] = 0.0;
        v.data()[vs->scalar_ndof() + d] = 0.0;
      }
      const FEFunction q(ps, random_vector(ps->ndof(), rng));
      // Scaled by the size of the data term a_0((u,p),(v,q)).
      const double scale = std::max(1.0, std::abs(galerkin_residual(grad, p, none, form, v, q)));
      worst = std::max(worst, std::abs(galerkin_residual(grad, p, pair, form, v, q)) / scale);
    }
  }
  cl.check(worst <= 1e-8, "Galerkin identity of the modified projection: scaled residual " +
                              fmt("%.1e", worst));
}

void jacobian_vs_differences(Checklist& cl, std::mt19937& rng) {
  struct Setup {
    AnalyticCase problem;
    const char* elements;
    int n;
    double gamma;
  };
  const Setup setups[] = {{nourgaliev_case(), "P1-P1-P1", 6, 0.05},
                          {cavity_case(), "P2-P1-P2", 4, 0.0},
                          {burggraf_case(50.0), "P1-P0", 5, 0.01}};
  bool ok = true;
  std::ostringstream detail;
  for (const auto& s : setups) {
    const CoupledSystem sys(s.problem, make_spaces(make_square_mesh(s.n), ElementTriple::parse(s.elements)),
                            s.gamma);
    const auto x = random_vector(sys.size(), rng);
    const auto hist = random_vector(sys.size(), rng);
    const auto dx = random_vector(sys.size(), rng);
    const std::vector<const std::vector<double>*> history{&hist};
    const StepContext ctx = sys.step_context(history, 0.01, TimeScheme::bdf1, 0.1);
    const auto r0 = sys.assemble_residual(x, ctx);
    const auto jdx = sys.assemble_jacobian(x, ctx).multiply(dx);
    std::vector<double> errs;
    for (double eps : {1e-4, 1e-5, 1e-6}) {
      std::vector<double> xp(x);
      for (std::size_t i = 0; i < x.size(); ++i) xp[i] += eps * dx[i];
      const auto rp = sys.assemble_residual(xp, ctx);
      double e = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) e = std::max(e, std::abs((rp[i] - r0[i]) / eps - jdx[i]));
      errs.push_back(e);
    }
    detail << ' ' << s.problem.name << '/' << s.elements << ':';
    for (double e : errs) detail << ' ' << fmt("%.1e", e);
    // First-order decay: each decade of eps divides the error by about 10.
    for (std::size_t k = 0; k + 1 < errs.size(); ++k) {
      const double ratio = errs[k] / errs[k + 1];
      ok &= ratio > 5.0 && ratio < 20.0;
    }
  }
  cl.check(ok, "Jacobian vs forward differences, eps 1e-4..1e-6, first-order decay:" + detail.str());
}

void manufactured_sources(Checklist& cl) {
  const double bur = std::max(oracle::burggraf_source_deviation(1.0, 100, 1),
                              oracle::burggraf_source_deviation(100.0, 100, 2));
  const double nour = oracle::nourgaliev_source_deviation(NourgalievParams{}, 100, 3);
  cl.check(bur <= 1e-8, "Burggraf strong-form residual at 100 samples: " + fmt("%.1e", bur));
  cl.check(nour <= 1e-8, "time-dependent convection strong-form residual at 100 samples: " +
                             fmt("%.1e", nour));
}

void divergence_free(Checklist& cl, std::mt19937& rng) {
  const AnalyticCase c = nourgaliev_case();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  for (int s = 0; s < 100; ++s) {
    const Mat2 g = c.velocity_gradient({unit(rng), unit(rng)}, 2.0 * unit(rng));
    worst = std::max(worst, std::abs(g(0, 0) + g(1, 1)));
  }
  cl.check(worst <= 1e-12, "divergence of the manufactured velocity at 100 samples: " + fmt("%.1e", worst));
}

void element_oracle(Checklist& cl) {
  const auto mesh = make_square_mesh(1);
  const PenaltyForm form{3.0, 0.4};
  const auto a = assemble_a_gamma(*make_space(mesh, 1, 2), *make_space(mesh, 1, 1), form).to_dense();
  const auto o = oracle::p1p1_block_matrix(*mesh, form);
  double worst = 0.0;
  for (std::size_t i = 0; i < o.size(); ++i)
    for (std::size_t j = 0; j < o.size(); ++j) worst = std::max(worst, std::abs(a[i][j] - o[i][j]));
  cl.check(worst <= 1e-14, "n=1 block matrix vs hand-assembled oracle: max difference " + fmt("%.1e", worst));
}

bool criterion7(Checklist& cl) {
  std::mt19937 rng(20240607);
  skew_symmetry(cl, rng);
  energy_identity(cl, rng);
  zero_mean_pressure(cl);
  galerkin_identity(cl, rng);
  jacobian_vs_differences(cl, rng);
  manufactured_sources(cl);
  divergence_free(cl, rng);
  element_oracle(cl);
  return cl.passed();
}

// ---------------------------------------------------------------------------
// Temporal order on a fixed fine mesh. Against the exact solution the
// spatial error dominates at every step size, so the order is measured by
// self-convergence: successive differences of the final temperature under
// step halving decay like dt^q.

bool criterion8(Checklist& cl) {
  const int n = 160;
  const AnalyticCase problem = nourgaliev_case();
  const auto spaces = make_spaces(make_square_mesh(n), ElementTriple::parse("P1-P1-P1"));
  const double gamma = gamma_value(GammaPolicy::parse("re12h"), 1.0 / n, problem.params.reynolds);
  const ScalarFn exact = [&](Point x) { return problem.temperature(x, problem.t_final); };
  const ScalarFn zero = [](Point) { return 0.0; };

  for (auto [scheme, expected] : {std::pair{TimeScheme::bdf2, 2.0}, std::pair{TimeScheme::bdf1, 1.0}}) {
    std::vector<FEFunction> finals;
    for (double dt : {0.1, 0.05, 0.025}) {
      TransientOptions opts;
      opts.scheme = scheme;
      // Step counts 16, 32, 64: dt = t_f / N halves exactly.
      opts.dt = problem.t_final / (16.0 * 0.1 / dt);
      opts.t_final = problem.t_final;
      const auto t0 = std::chrono::steady_clock::now();
      const TransientResult r = run_transient(problem, spaces, gamma, opts);
      if (!r.ok) {
        cl.check(false, std::string(to_string(scheme)) + " run failed: " + r.message);
        return false;
      }
      const double e = error_norm(r.state.theta, exact, {}, NormKind::L2);
      std::cout << "  " << to_string(scheme) << " dt=" << fmt("%.5f", r.dt) << " steps "
                << r.steps.size() << " L2(theta) vs exact " << fmt("%.3E", e) << " ("
                << fmt("%.0f", seconds_since(t0)) << " s)\n";
      finals.push_back(r.state.theta);
    }
    auto diff = [&](const FEFunction& a, const FEFunction& b) {
      std::vector<double> d(a.data());
      for (std::size_t i = 0; i < d.size(); ++i) d[i] -= b.data()[i];
      return error_norm(FEFunction(a.space_ptr(), d), zero, {}, NormKind::L2);
    };
    const double d1 = diff(finals[0], finals[1]);
    const double d2 = diff(finals[1], finals[2]);
    const double rate = std::log2(d1 / d2);
    cl.check(std::abs(rate - expected) <= 0.3,
             std::string(to_string(scheme)) + " temporal rate " + fmt("%.2f", rate) + " (differences " +
                 fmt("%.3E", d1) + ", " + fmt("%.3E", d2) + ") in " + fmt("%.1f", expected) + " +- 0.3");
  }
  return cl.passed();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<int> criteria;
  app.add_option("--criterion", criteria, "criteria to run (default: all)")->check(CLI::Range(1, 8));
  app.add_option("--reference-dir", reference_dir, "cavity reference cache directory");
  CLI11_PARSE(app, argc, argv);
  if (criteria.empty()) criteria = {1, 2, 3, 4, 5, 6, 7, 8};

  using Fn = bool (*)(Checklist&);
  const Fn table[] = {criterion1, criterion2, criterion3, criterion4,
                      criterion5, criterion6, criterion7, criterion8};
  bool all = true;
  for (int c : criteria) {
    std::cout << "== criterion " << c << '\n';
    Checklist cl;
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = false;
    try {
      ok = table[c - 1](cl);
    } catch (const std::exception& e) {
      cl.check(false, std::string("exception: ") + e.what());
    }
    ok = ok && cl.passed();
    std::cout << "criterion " << c << ": " << (ok ? "PASS" : "FAIL") << " (" << fmt("%.0f", seconds_since(t0))
              << " s) " << cl.summary() << std::endl;
    all &= ok;
  }
  return all ? 0 : 1;
}
