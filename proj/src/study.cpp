#include "nsb/study.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

#include "nsb/stokes_projection.hpp"

namespace nsb {

using json = nlohmann::json;

namespace {

bool known_case(std::string_view id) {
  return id == "mp-bur" || id == "mp-nc" || id == "nc-nour" || id == "nc-sq";
}

bool needs_reference(std::string_view id) { return id == "mp-nc" || id == "nc-sq"; }

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

double dt_from_rule(std::string_view rule, double h) {
  if (rule == "h") return h;
  if (rule == "h2") return h * h;
  std::string s(rule);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || !(v > 0.0)) {
    throw std::invalid_argument("dt rule '" + s + "' not understood (h, h2 or a positive number)");
  }
  return v;
}

void StudyConfig::validate() const {
  if (!known_case(case_id)) {
    throw std::invalid_argument("unknown case '" + case_id + "' (mp-bur, mp-nc, nc-nour, nc-sq)");
  }
  if (mesh_seq.empty()) throw std::invalid_argument("study: empty mesh sequence");
  for (std::size_t i = 0; i < mesh_seq.size(); ++i) {
    if (mesh_seq[i] < 1) throw std::invalid_argument("study: mesh subdivisions must be positive");
    if (i > 0 && mesh_seq[i] <= mesh_seq[i - 1]) {
      throw std::invalid_argument("study: mesh sequence must be strictly refining");
    }
  }
  if (gammas.empty()) throw std::invalid_argument("study: no gamma policies");
  dt_from_rule(dt_rule, 0.1);
  if (t_final && !(*t_final > 0.0)) throw std::invalid_argument("study: t_final must be positive");
  if (needs_reference(case_id) && reference_n < 2) {
    throw std::invalid_argument("study: reference resolution must be at least 2");
  }
  newton.validate();
  solver.validate();
}

namespace {

StudyConfig from_json_document(const json& j) {
  StudyConfig c;
  if (j.contains("case")) c.case_id = j.at("case").get<std::string>();
  if (j.contains("elements")) c.elements = ElementTriple::parse(j.at("elements").get<std::string>());
  if (j.contains("mesh_seq")) c.mesh_seq = j.at("mesh_seq").get<std::vector<int>>();
  if (j.contains("gamma")) {
    for (const auto& g : j.at("gamma")) {
      c.gammas.push_back(g.is_number() ? GammaPolicy::constant(g.get<double>())
                                       : GammaPolicy::parse(g.get<std::string>()));
    }
  }
  if (j.contains("scheme")) c.scheme = parse_time_scheme(j.at("scheme").get<std::string>());
  if (j.contains("dt_rule")) c.dt_rule = j.at("dt_rule").get<std::string>();
  if (j.contains("t_final")) c.t_final = j.at("t_final").get<double>();
  if (j.contains("reference_dir")) c.reference_dir = j.at("reference_dir").get<std::string>();
  if (j.contains("reference_n")) c.reference_n = j.at("reference_n").get<int>();
  if (j.contains("newton")) {
    const json& n = j.at("newton");
    c.newton.absolute_tolerance = n.value("absolute_tolerance", c.newton.absolute_tolerance);
    c.newton.relative_tolerance = n.value("relative_tolerance", c.newton.relative_tolerance);
    c.newton.max_iterations = n.value("max_iterations", c.newton.max_iterations);
  }
  if (j.contains("solver")) {
    const json& s = j.at("solver");
    const std::string method = s.value("method", std::string("direct_lu"));
    if (method == "direct_lu") {
      c.solver.method = SolverMethod::direct_lu;
    } else if (method == "gmres") {
      c.solver.method = SolverMethod::gmres;
    } else {
      throw std::invalid_argument("unknown solver method '" + method + "'");
    }
    c.solver.tolerance = s.value("tolerance", c.solver.tolerance);
    c.solver.max_iterations = s.value("max_iterations", c.solver.max_iterations);
    c.solver.restart = s.value("restart", c.solver.restart);
    c.newton.linear = c.solver;
  }
  return c;
}

}  // namespace

StudyConfig StudyConfig::from_json(std::string_view text) {
  try {
    return from_json_document(json::parse(text));
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("study config: ") + e.what());
  }
}

std::string StudyConfig::to_json() const {
  json j;
  j["case"] = case_id;
  j["elements"] = elements.name();
  j["mesh_seq"] = mesh_seq;
  std::vector<std::string> g;
  for (const auto& p : gammas) g.push_back(p.name());
  j["gamma"] = g;
  j["scheme"] = to_string(scheme);
  j["dt_rule"] = dt_rule;
  if (t_final) j["t_final"] = *t_final;
  j["reference_dir"] = reference_dir;
  j["reference_n"] = reference_n;
  j["newton"] = {{"absolute_tolerance", newton.absolute_tolerance},
                 {"relative_tolerance", newton.relative_tolerance},
                 {"max_iterations", newton.max_iterations}};
  j["solver"] = {{"method", solver.method == SolverMethod::gmres ? "gmres" : "direct_lu"},
                 {"tolerance", solver.tolerance}};
  return j.dump(2);
}

std::vector<Quantity> study_quantities(std::string_view case_id) {
  if (case_id == "mp-bur" || case_id == "mp-nc") {
    return {Quantity::L2_u, Quantity::H1_u, Quantity::L2_p, Quantity::L2_p_raw};
  }
  return {Quantity::L2_u, Quantity::H1_u, Quantity::L2_p, Quantity::L2_p_raw, Quantity::L2_theta};
}

const ConvergenceTable& StudyResult::table(Quantity q) const {
  for (const auto& t : tables)
    if (t.quantity == q) return t;
  throw std::out_of_range(std::string("study result has no table for ") + to_string(q));
}

bool StudyResult::all_failed() const {
  return std::none_of(cells.begin(), cells.end(), [](const CellInfo& c) { return c.ok; });
}

// ---------------------------------------------------------------------------

namespace {

using Errors = std::map<Quantity, double>;

/// Exact (or reference) fields at a fixed time.
struct Target {
  VectorFn u;
  TensorFn grad_u;
  ScalarFn p;
  double p_mean = 0.0;
  ScalarFn theta;
};

Target reference_target(const ReferenceSolution& ref) {
  auto st = std::make_shared<SystemState>(ref.state);
  Target t;
  t.u = [st](Point x) { return st->u.vector_value(x); };
  t.grad_u = [st](Point x) { return st->u.vector_gradient(x); };
  t.p = [st](Point x) { return st->p.value(x); };
  t.theta = [st](Point x) { return st->theta.value(x); };
  t.p_mean = mean_value(st->p);
  return t;
}

Target case_target(const AnalyticCase& c, double time) {
  Target t;
  t.u = [&c, time](Point x) { return c.velocity(x, time); };
  t.grad_u = [&c, time](Point x) { return c.velocity_gradient(x, time); };
  t.p = [&c, time](Point x) { return c.pressure(x, time); };
  t.p_mean = c.pressure_mean ? c.pressure_mean(time) : 0.0;
  if (c.temperature) t.theta = [&c, time](Point x) { return c.temperature(x, time); };
  return t;
}

Errors measure(const SystemState* full, const FEFunction& u, const FEFunction& p,
               const Target& target) {
  Errors e;
  e[Quantity::L2_u] = error_norm(u, target.u, target.grad_u, NormKind::L2);
  e[Quantity::H1_u] = error_norm(u, target.u, target.grad_u, NormKind::H1);
  const PressureError pe = pressure_error(p, target.p, target.p_mean);
  e[Quantity::L2_p] = pe.mean_subtracted;
  e[Quantity::L2_p_raw] = pe.raw;
  if (full && target.theta) {
    e[Quantity::L2_theta] = error_norm(full->theta, target.theta, {}, NormKind::L2);
  }
  return e;
}

}  // namespace

StudyResult run_study(const StudyConfig& config, std::ostream* log) {
  config.validate();
  const std::string& id = config.case_id;

  std::optional<ReferenceSolution> reference;
  std::optional<Target> ref_target;
  if (needs_reference(id)) {
    reference = load_or_compute_reference(config.reference_dir, config.reference_n, log);
    ref_target = reference_target(*reference);
  }
  const AnalyticCase problem = id == "mp-bur"    ? burggraf_case()
                               : id == "nc-nour" ? nourgaliev_case()
                                                 : cavity_case();
  const double re = problem.params.reynolds;

  StudyResult result;
  const auto quantities = study_quantities(id);
  const bool projection = id == "mp-bur" || id == "mp-nc";
  // A projection has no temperature space.
  const std::string elements =
      projection ? "P" + std::to_string(config.elements.velocity) + "-P" +
                       std::to_string(config.elements.pressure)
                 : config.elements.name();
  for (Quantity q : quantities) {
    ConvergenceTable t;
    t.case_id = id;
    t.elements = elements;
    t.quantity = q;
    t.subdivisions = config.mesh_seq;
    for (const auto& g : config.gammas) t.policies.push_back(g.label());
    t.columns.resize(config.gammas.size());
    result.tables.push_back(std::move(t));
  }

  for (std::size_t gi = 0; gi < config.gammas.size(); ++gi) {
    const GammaPolicy& policy = config.gammas[gi];
    for (int n : config.mesh_seq) {
      const double h = 1.0 / n;
      const double gamma = gamma_value(policy, h, re);
      const auto mesh = make_square_mesh(n);
      const FieldSpaces spaces = make_spaces(mesh, config.elements);
      CellInfo info;
      info.n = n;
      info.policy = policy.label();
      info.gamma = gamma;
      const auto start = std::chrono::steady_clock::now();
      Errors errors;
      try {
        if (id == "mp-bur" || id == "mp-nc") {
          info.ndof = spaces.velocity->ndof() + spaces.pressure->ndof();
          const Target target = id == "mp-bur" ? case_target(problem, 0.0) : *ref_target;
          const double mean = target.p_mean;
          const ProjectedPair pair = modified_projection(
              target.u, target.grad_u, [&](Point x) { return target.p(x) - mean; },
              spaces.velocity, spaces.pressure, PenaltyForm{re, gamma}, config.solver);
          info.ok = pair.report.converged;
          if (!info.ok) info.message = "linear solver did not converge";
          if (info.ok) errors = measure(nullptr, pair.velocity, pair.pressure, target);
        } else if (id == "nc-nour") {
          info.ndof = spaces.ndof();
          TransientOptions opts;
          opts.scheme = config.scheme;
          opts.dt = dt_from_rule(config.dt_rule, h);
          opts.t_final = config.t_final.value_or(problem.t_final);
          opts.newton = config.newton;
          const TransientResult run = run_transient(problem, spaces, gamma, opts);
          info.steps = static_cast<int>(run.steps.size());
          for (const auto& s : run.steps) info.newton_iterations += s.newton.iterations;
          info.ok = run.ok;
          info.message = run.message;
          if (info.ok) {
            errors = measure(&run.state, run.state.u, run.state.p,
                             case_target(problem, run.state.t));
          }
        } else {
          info.ndof = spaces.ndof();
          const SteadyResult run = solve_steady(problem, spaces, gamma, config.newton);
          info.newton_iterations = run.newton.iterations;
          info.steps = run.pseudo_steps;
          info.ok = run.ok;
          info.message = run.message;
          if (info.ok) errors = measure(&run.state, run.state.u, run.state.p, *ref_target);
        }
      } catch (const std::exception& e) {
        info.ok = false;
        info.message = e.what();
      }
      info.seconds = seconds_since(start);
      if (log) {
        *log << id << " " << elements << " n=" << n << " gamma[" << policy.label()
             << "]=" << gamma << " ndof=" << info.ndof << " time=" << info.seconds << "s"
             << (info.ok ? "" : " FAILED: " + info.message);
        if (info.ok) *log << " L2_u=" << format_sci(errors[Quantity::L2_u]);
        *log << '\n';
      }
      for (auto& table : result.tables) {
        ErrorRecord rec;
        rec.h = h;
        rec.gamma = gamma;
        rec.quantity = table.quantity;
        const auto it = errors.find(table.quantity);
        if (info.ok && it != errors.end()) {
          rec.error = it->second;
        } else {
          rec.status = CellStatus::solver_failed;
        }
        table.columns[gi].push_back(rec);
      }
      result.cells.push_back(std::move(info));
    }
  }
  return result;
}

// ---------------------------------------------------------------------------

namespace {

std::string reference_stem(const std::string& dir, int n) {
  return (std::filesystem::path(dir) / ("nc-sq-ref-n" + std::to_string(n))).string();
}

}  // namespace

ReferenceSolution compute_reference(int n, std::ostream* log, double rayleigh, double prandtl) {
  const auto start = std::chrono::steady_clock::now();
  const AnalyticCase problem = cavity_case(rayleigh, prandtl);
  ReferenceSolution ref;
  ref.n = n;
  ref.rayleigh = rayleigh;
  ref.prandtl = prandtl;
  const FieldSpaces spaces = make_spaces(make_square_mesh(n), ref.elements);
  if (log) *log << "computing " << ref.elements.name() << " reference, n=" << n
                << ", ndof=" << spaces.ndof() + 1 << '\n';
  NewtonOptions opts;
  opts.max_iterations = 30;
  const SteadyResult run = solve_steady(problem, spaces, 0.0, opts);
  if (!run.ok) throw std::runtime_error("reference solve failed: " + run.message);
  ref.state = run.state;
  ref.newton_iterations = run.newton.iterations;
  ref.seconds = seconds_since(start);
  if (log) *log << "reference done in " << ref.seconds << "s, " << ref.newton_iterations
                << " Newton iterations\n";
  return ref;
}

void save_reference(const ReferenceSolution& ref, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::string stem = reference_stem(dir, ref.n);
  std::vector<double> all;
  for (const FEFunction* f : {&ref.state.u, &ref.state.p, &ref.state.theta})
    all.insert(all.end(), f->data().begin(), f->data().end());
  {
    std::ofstream bin(stem + ".bin", std::ios::binary);
    bin.write(reinterpret_cast<const char*>(all.data()),
              static_cast<std::streamsize>(all.size() * sizeof(double)));
    if (!bin) throw std::runtime_error("cannot write " + stem + ".bin");
  }
  json meta = {{"case", "nc-sq"},
               {"n", ref.n},
               {"elements", ref.elements.name()},
               {"gamma", 0.0},
               {"rayleigh", ref.rayleigh},
               {"prandtl", ref.prandtl},
               {"ndof", all.size()},
               {"seconds", ref.seconds},
               {"newton_iterations", ref.newton_iterations}};
  std::ofstream(stem + ".json") << meta.dump(2) << '\n';
}

std::optional<ReferenceSolution> load_reference(const std::string& dir, int n) {
  const std::string stem = reference_stem(dir, n);
  std::ifstream meta_in(stem + ".json");
  std::ifstream bin(stem + ".bin", std::ios::binary);
  if (!meta_in || !bin) return std::nullopt;
  const json meta = json::parse(meta_in);
  ReferenceSolution ref;
  ref.n = meta.at("n").get<int>();
  ref.elements = ElementTriple::parse(meta.at("elements").get<std::string>());
  ref.rayleigh = meta.at("rayleigh").get<double>();
  ref.prandtl = meta.at("prandtl").get<double>();
  ref.seconds = meta.value("seconds", 0.0);
  ref.newton_iterations = meta.value("newton_iterations", 0);
  const FieldSpaces spaces = make_spaces(make_square_mesh(ref.n), ref.elements);
  std::vector<double> all(spaces.ndof());
  bin.read(reinterpret_cast<char*>(all.data()), static_cast<std::streamsize>(all.size() * sizeof(double)));
  if (!bin || meta.at("ndof").get<std::size_t>() != all.size()) return std::nullopt;
  const auto nu = spaces.velocity->ndof();
  const auto np = spaces.pressure->ndof();
  ref.state = {FEFunction(spaces.velocity, std::vector<double>(all.begin(), all.begin() + nu)),
               FEFunction(spaces.pressure, std::vector<double>(all.begin() + nu, all.begin() + nu + np)),
               FEFunction(spaces.temperature, std::vector<double>(all.begin() + nu + np, all.end())),
               0.0};
  return ref;
}

ReferenceSolution load_or_compute_reference(const std::string& dir, int n, std::ostream* log) {
  if (auto ref = load_reference(dir, n)) {
    if (log) *log << "using cached reference " << reference_stem(dir, n) << '\n';
    return *ref;
  }
  ReferenceSolution ref = compute_reference(n, log);
  save_reference(ref, dir);
  return ref;
}

}  // namespace nsb
