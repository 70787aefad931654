// Command-line driver: single projection or transient runs, convergence
// studies, and the cavity reference.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "nsb/analysis.hpp"
#include "nsb/study.hpp"

namespace {

struct Flags {
  std::string config;
  std::string case_id;
  std::string elements;
  std::vector<int> mesh_seq;
  std::vector<std::string> gammas;
  std::string scheme;
  std::string dt_rule;
  std::string out;
  std::string format = "markdown";
  std::string reference_dir;
  int reference_n = 0;
  double t_final = 0.0;
  bool deep = false;
  bool gmres = false;
  bool quiet = false;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON study configuration; flags override it")
      ->check(CLI::ExistingFile);
  cmd->add_option("--case", f.case_id, "mp-bur, mp-nc, nc-nour or nc-sq");
  cmd->add_option("--elements", f.elements, "element triple, e.g. P1-P1-P1 or P1-P0");
  cmd->add_option("--mesh-seq", f.mesh_seq, "subdivisions per side, coarse to fine")->delimiter(',');
  cmd->add_option("--gamma", f.gammas, "penalty policies: 1e-7, re13h23, re12h, reh2, pow:c,a,b")
      ->delimiter(';');
  cmd->add_option("--scheme", f.scheme, "bdf1 or bdf2");
  cmd->add_option("--dt-rule", f.dt_rule, "h, h2 or a constant step");
  cmd->add_option("--t-final", f.t_final, "final time override for transient cases");
  cmd->add_option("--out", f.out, "output file (default stdout)");
  cmd->add_option("--format", f.format, "csv or markdown")->check(CLI::IsMember({"csv", "markdown", "md"}));
  cmd->add_option("--reference-dir", f.reference_dir, "cavity reference cache directory");
  cmd->add_option("--reference-n", f.reference_n, "cavity reference resolution");
  cmd->add_flag("--deep", f.deep, "append the n=320 level to the mesh sequence");
  cmd->add_flag("--gmres", f.gmres, "use restarted GMRES instead of sparse LU");
  cmd->add_flag("--quiet", f.quiet, "no progress log on stderr");
}

nsb::StudyConfig build_config(const Flags& f, const std::string& default_case) {
  nsb::StudyConfig c;
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    std::stringstream ss;
    ss << in.rdbuf();
    c = nsb::StudyConfig::from_json(ss.str());
  } else {
    c.case_id = default_case;
  }
  if (!f.case_id.empty()) c.case_id = f.case_id;
  if (!f.elements.empty()) c.elements = nsb::ElementTriple::parse(f.elements);
  if (!f.mesh_seq.empty()) c.mesh_seq = f.mesh_seq;
  if (!f.gammas.empty()) {
    c.gammas.clear();
    for (const auto& g : f.gammas) c.gammas.push_back(nsb::GammaPolicy::parse(g));
  }
  if (c.gammas.empty()) c.gammas = nsb::standard_gamma_policies();
  if (!f.scheme.empty()) c.scheme = nsb::parse_time_scheme(f.scheme);
  if (!f.dt_rule.empty()) c.dt_rule = f.dt_rule;
  if (f.t_final > 0.0) c.t_final = f.t_final;
  if (!f.reference_dir.empty()) c.reference_dir = f.reference_dir;
  if (f.reference_n > 0) c.reference_n = f.reference_n;
  if (f.gmres) {
    c.solver.method = nsb::SolverMethod::gmres;
    c.newton.linear.method = nsb::SolverMethod::gmres;
  }
  if (f.deep && (c.mesh_seq.empty() || c.mesh_seq.back() < 320)) c.mesh_seq.push_back(320);
  c.validate();
  return c;
}

std::string render(const nsb::StudyResult& r, const nsb::StudyConfig& c, nsb::TableFormat fmt) {
  std::ostringstream os;
  for (const auto& t : r.tables) {
    os << nsb::emit_table(t, fmt) << '\n';
  }
  if (fmt == nsb::TableFormat::markdown) {
    os << "| n | gamma | ndof | seconds | Newton its | status |\n|---|---|---|---|---|---|\n";
    for (const auto& cell : r.cells) {
      os << "| " << cell.n << " | " << cell.policy << " | " << cell.ndof << " | " << cell.seconds
         << " | " << cell.newton_iterations << " | " << (cell.ok ? "ok" : cell.message) << " |\n";
    }
  }
  (void)c;
  return os.str();
}

int emit(const std::string& text, const std::string& out) {
  if (out.empty()) {
    std::cout << text;
    return 0;
  }
  std::ofstream f(out);
  f << text;
  if (!f) {
    std::cerr << "error: cannot write " << out << '\n';
    return 2;
  }
  return 0;
}

int run_study_command(const Flags& f, const std::string& default_case,
                      const std::vector<std::string>& allowed) {
  const nsb::StudyConfig c = build_config(f, default_case);
  if (std::find(allowed.begin(), allowed.end(), c.case_id) == allowed.end()) {
    std::cerr << "error: case " << c.case_id << " is not valid for this subcommand\n";
    return 2;
  }
  const nsb::StudyResult r = nsb::run_study(c, f.quiet ? nullptr : &std::cerr);
  const int rc = emit(render(r, c, nsb::parse_table_format(f.format)), f.out);
  if (rc != 0) return rc;
  return r.all_failed() ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Penalized equal-order Navier-Stokes-Boussinesq solver"};
  app.require_subcommand(1);

  Flags project_flags, convect_flags, study_flags;
  auto* project = app.add_subcommand("project", "modified Stokes projection of mp-bur / mp-nc data");
  add_common(project, project_flags);
  auto* convect = app.add_subcommand("convect", "transient or steady coupled run (nc-nour, nc-sq)");
  add_common(convect, convect_flags);
  std::string snapshot, profile;
  convect->add_option("--snapshot", snapshot, "write the final fields of the finest run as CSV");
  convect->add_option("--profile", profile, "write the y=0.5 vertical velocity profile as CSV");
  auto* study = app.add_subcommand("study", "convergence table reproduction");
  add_common(study, study_flags);

  auto* reference = app.add_subcommand("reference", "generate the cached cavity reference");
  int ref_n = 128;
  std::string ref_dir = "reference";
  bool force = false;
  std::string ref_config;
  double rayleigh = 1e4;
  double prandtl = 0.71;
  reference->add_option("--config", ref_config, "JSON reference configuration; flags override it")
      ->check(CLI::ExistingFile);
  auto* ref_n_opt = reference->add_option("--n", ref_n, "subdivisions per side")->check(CLI::PositiveNumber);
  auto* ref_dir_opt = reference->add_option("--reference-dir", ref_dir, "cache directory");
  reference->add_flag("--force", force, "recompute even when cached");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*project) return run_study_command(project_flags, "mp-bur", {"mp-bur", "mp-nc"});
    if (*study) return run_study_command(study_flags, "mp-bur", {"mp-bur", "mp-nc", "nc-nour", "nc-sq"});
    if (*convect) {
      Flags f = convect_flags;
      if (f.elements.empty() && f.config.empty()) f.elements = "P1-P1-P1";
      if (snapshot.empty() && profile.empty()) {
        return run_study_command(f, "nc-nour", {"nc-nour", "nc-sq"});
      }
      const nsb::StudyConfig c = build_config(f, "nc-nour");
      const int n = c.mesh_seq.back();
      const double h = 1.0 / n;
      const nsb::AnalyticCase problem = nsb::case_by_name(c.case_id);
      const double gamma = nsb::gamma_value(c.gammas.front(), h, problem.params.reynolds);
      const auto spaces = nsb::make_spaces(nsb::make_square_mesh(n), c.elements);
      nsb::SystemState state;
      if (problem.steady) {
        const auto run = nsb::solve_steady(problem, spaces, gamma, c.newton);
        if (!run.ok) {
          std::cerr << "error: " << run.message << '\n';
          return 1;
        }
        state = run.state;
      } else {
        nsb::TransientOptions opts;
        opts.scheme = c.scheme;
        opts.dt = nsb::dt_from_rule(c.dt_rule, h);
        opts.t_final = c.t_final.value_or(problem.t_final);
        opts.newton = c.newton;
        const auto run = nsb::run_transient(problem, spaces, gamma, opts);
        if (!run.ok) {
          std::cerr << "error: " << run.message << '\n';
          return 1;
        }
        state = run.state;
      }
      if (!snapshot.empty()) {
        std::ofstream os(snapshot);
        nsb::write_snapshot_csv(state, os);
      }
      if (!profile.empty()) {
        std::ofstream os(profile);
        os << "x,u2\n";
        for (const auto& [x, v] : nsb::centerline_profile(state, 101)) os << x << ',' << v << '\n';
      }
      return 0;
    }
    if (*reference) {
      if (!ref_config.empty()) {
        std::ifstream is(ref_config);
        nlohmann::json j;
        try {
          j = nlohmann::json::parse(is);
          if (j.value("elements", "P2-P1-P2") != "P2-P1-P2" || j.value("gamma", 0.0) != 0.0) {
            throw std::invalid_argument("reference must be P2-P1-P2 with gamma = 0");
          }
          if (ref_n_opt->count() == 0) ref_n = j.value("n", ref_n);
          if (ref_dir_opt->count() == 0) ref_dir = j.value("reference_dir", ref_dir);
          rayleigh = j.value("rayleigh", rayleigh);
          prandtl = j.value("prandtl", prandtl);
        } catch (const nlohmann::json::exception& e) {
          throw std::invalid_argument(std::string("reference config: ") + e.what());
        }
        if (ref_n < 1) throw std::invalid_argument("reference config: n must be positive");
      }
      if (!force) {
        if (nsb::load_reference(ref_dir, ref_n)) {
          std::cerr << "reference n=" << ref_n << " already cached in " << ref_dir << '\n';
          return 0;
        }
      }
      const auto ref = nsb::compute_reference(ref_n, &std::cerr, rayleigh, prandtl);
      nsb::save_reference(ref, ref_dir);
      return 0;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
