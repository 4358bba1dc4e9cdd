#include "ide/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "ide/io.hpp"

namespace ide {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

struct RunConfig {
  std::string command;
  std::string input;
  std::string config;
  std::string output_dir;
  std::string scenario;
  Overrides overrides;
  double nu0 = 1.0;
  double r1 = 0.125;
  bool force = false;
};

void write_json(const std::string& dir, const json& report) {
  if (dir.empty()) return;
  fs::create_directories(dir);
  std::ofstream os(fs::path(dir) / "report.json");
  os << std::setw(2) << report << "\n";
}

void write_text(const std::string& dir, const std::string& text) {
  if (dir.empty()) return;
  fs::create_directories(dir);
  std::ofstream os(fs::path(dir) / "report.txt");
  os << text;
}

void write_solution(const std::string& dir, const std::string& name, const WeightedSignal& u) {
  if (dir.empty()) return;
  fs::create_directories(dir);
  write_csv((fs::path(dir) / name).string(), u);
}

json margin_json(const SolvabilityReport& r) {
  json j;
  j["c_est"] = r.c_est;
  j["nu_min"] = r.nu_min;
  j["worst_xi"] = r.worst_xi;
  j["worst_nu"] = r.worst_nu;
  j["analytic_bound"] = r.analytic_bound ? json(*r.analytic_bound) : json(nullptr);
  j["certified"] = r.certified();
  j["nu_levels"] = r.grid.nu;
  j["row_minima"] = r.row_minima;
  return j;
}

std::string margin_text(const SolvabilityReport& r) {
  std::ostringstream os;
  os << std::setprecision(10);
  os << "margin c_est         " << r.c_est << "\n"
     << "  worst point        xi = " << r.worst_xi << ", nu = " << r.worst_nu << "\n"
     << "  analytic bound     " << (r.analytic_bound ? std::to_string(*r.analytic_bound) : "n/a") << "\n";
  for (size_t i = 0; i < r.grid.nu.size(); ++i)
    os << "  nu = " << std::setw(10) << r.grid.nu[i] << "  min = " << r.row_minima[i] << "\n";
  return os.str();
}

Tolerances tolerances_for(const RunConfig& rc, Tolerances base) {
  if (rc.config.empty()) return base;
  return load_tolerances(rc.config);
}

// Causality at mid-window and a Lipschitz pair (F, F/2).
struct Diagnostics {
  CausalityReport causality;
  std::optional<LipschitzReport> lipschitz;
};

Diagnostics diagnose(const SolveFn& solve, const WeightedSignal& f, double c_est, const Tolerances& tol) {
  Diagnostics d;
  const TimeGrid& g = f.grid();
  d.causality = causality_check(solve, f, g.t(g.n / 2), tol.algebraic);
  if (weighted_norm(f) > 0.0 && c_est > 0.0) d.lipschitz = lipschitz_check(solve, f, 0.5 * f, c_est, tol.lipschitz);
  return d;
}

void put_diagnostics(json& j, const Diagnostics& d) {
  j["causality"] = {{"pass", d.causality.pass}, {"leakage", d.causality.leakage}, {"tolerance", d.causality.tolerance}};
  if (d.lipschitz)
    j["lipschitz"] = {{"pass", d.lipschitz->pass}, {"ratio", d.lipschitz->ratio}, {"bound", d.lipschitz->bound}};
}

std::string diagnostics_text(const Diagnostics& d) {
  std::ostringstream os;
  os << std::setprecision(10);
  os << "causality leakage    " << d.causality.leakage << (d.causality.pass ? "  (pass)" : "  (FAIL)") << "\n";
  if (d.lipschitz)
    os << "lipschitz ratio      " << d.lipschitz->ratio << "  bound 1/c = " << d.lipschitz->bound
       << (d.lipschitz->pass ? "  (pass)" : "  (exceeds bound)") << "\n";
  return os.str();
}

int run_check_kernel(const RunConfig& rc, std::ostream& out) {
  OperatorKernel b = load_kernel(rc.input);
  KernelHypothesisReport h = check_hypotheses(b, rc.nu0);
  std::vector<double> ladder{rc.nu0, 2 * rc.nu0 + 1, 5 * rc.nu0 + 2};
  PropagationReport p = verify_4d_propagation(b, rc.nu0, h.d, ladder, default_frequency_grid());
  bool pass = h.pass() && p.pass;

  out << std::setprecision(10);
  out << "hypothesis            value              status\n";
  out << "(i)  selfadjoint      " << std::setw(18) << std::left << h.selfadjoint.value << " " << (h.selfadjoint.pass ? "pass" : "FAIL") << "\n";
  out << "(ii) commuting        " << std::setw(18) << h.commuting.value << " " << (h.commuting.pass ? "pass" : "FAIL") << "\n";
  out << "(iii) d estimate      " << std::setw(18) << h.im_bound.d_est << " d = " << h.d << "\n";
  out << "4d propagation        " << std::setw(18) << p.worst_value << " " << (p.pass ? "pass" : "FAIL") << "\n";
  out << "|B|_L1 at nu0         " << h.l1_at_nu0 << std::right << "\n";
  out << (pass ? "PASS" : "FAIL") << "\n";

  json j;
  j["command"] = "check-kernel";
  j["nu0"] = rc.nu0;
  j["selfadjoint"] = {{"pass", h.selfadjoint.pass}, {"value", h.selfadjoint.value}};
  j["commuting"] = {{"pass", h.commuting.pass}, {"value", h.commuting.value}};
  j["d_est"] = h.im_bound.d_est;
  j["d"] = h.d;
  j["propagation"] = {{"pass", p.pass}, {"bound", p.bound}, {"worst_value", p.worst_value}, {"nu", ladder}};
  j["l1_at_nu0"] = h.l1_at_nu0;
  j["pass"] = pass;
  write_json(rc.output_dir, j);
  return pass ? kExitPass : kExitFail;
}

int run_check_material(const RunConfig& rc, std::ostream& out) {
  MaterialLaw law = load_material(rc.input);
  if (rc.r1 > law.radius()) throw ConfigError("--r1 exceeds the radius of the material law");
  SolvabilityReport r = solvability_margin(law, rc.r1);
  out << margin_text(r) << (r.positive() ? "PASS" : "FAIL") << "\n";
  json j;
  j["command"] = "check-material";
  j["r1"] = rc.r1;
  j["margin"] = margin_json(r);
  j["pass"] = r.positive();
  write_json(rc.output_dir, j);
  return r.positive() ? kExitPass : kExitFail;
}

SolveOptions solve_options(const RunConfig& rc, const Tolerances& tol) {
  SolveOptions o;
  o.force = rc.force;
  o.tolerance = tol.algebraic;
  return o;
}

int run_solve(const RunConfig& rc, bool inclusion, std::ostream& out) {
  ProblemSpec spec = load_problem(rc.input, rc.overrides);
  Tolerances tol = tolerances_for(rc, spec.tolerances);
  if (!inclusion && spec.mono) throw ConfigError("solve-linear cannot take a [monotone] section; use solve-inclusion");
  if (spec.x0) spec.f = build_ivp_rhs(spec.law, *spec.x0, spec.f);
  SolveOptions opt = solve_options(rc, tol);

  SolvabilityReport margin = margin_gate(spec.law, spec.nu, opt);
  SolveOptions inner = opt;
  inner.check_margin = false;

  json j;
  j["command"] = inclusion ? "solve-inclusion" : "solve-linear";
  j["nu"] = spec.nu;
  j["dt"] = spec.f.grid().dt;
  j["steps"] = spec.f.size();
  j["margin"] = margin_json(margin);
  if (!margin.positive()) j["forced"] = true;

  InclusionProblem ip{spec.law, spec.a, spec.mono, spec.f, spec.nu};
  SolveFn time_solve = [&](const WeightedSignal& f) {
    InclusionProblem q = ip;
    q.f = f;
    return solve_inclusion_time(q, inner).u;
  };
  TimeSolution ts = solve_inclusion_time(ip, inner);
  j["time"] = {{"max_step_residual", ts.max_step_residual},
               {"max_inner_iterations", ts.max_inner_iterations},
               {"contraction", ts.contraction}};
  write_solution(rc.output_dir, inclusion ? "solution.csv" : "solution_time.csv", ts.u);

  std::ostringstream text;
  text << std::setprecision(10) << margin_text(margin);
  text << "time residual        " << ts.max_step_residual << "\n";
  if (!inclusion) {
    LinearProblem lp{spec.law, spec.a, spec.f, spec.nu};
    FrequencySolution fs_sol = solve_linear_frequency(lp, inner);
    double cross = relative_weighted_error(ts.u, fs_sol.u);
    j["frequency"] = {{"residual", fs_sol.residual}, {"cross_error", cross}};
    text << "frequency residual   " << fs_sol.residual << "\n"
         << "cross-solver error   " << cross << "\n";
    write_solution(rc.output_dir, "solution.csv", fs_sol.u);
  }
  Diagnostics d = diagnose(time_solve, spec.f, margin.c_est, tol);
  put_diagnostics(j, d);
  text << diagnostics_text(d);
  bool pass = d.causality.pass;
  j["pass"] = pass;
  out << text.str() << (pass ? "PASS" : "FAIL") << "\n";
  write_json(rc.output_dir, j);
  return pass ? kExitPass : kExitFail;
}

std::string kernel_check_text(const std::string& name, const KernelHypothesisReport& h) {
  std::ostringstream os;
  os << std::setprecision(10);
  os << name << " selfadjoint " << (h.selfadjoint.pass ? "pass" : "FAIL") << ", commuting "
     << (h.commuting.pass ? "pass" : "FAIL") << ", d_est = " << h.im_bound.d_est << ", d = " << h.d << "\n";
  return os.str();
}

int run_demo_visco(const RunConfig& rc, std::ostream& out) {
  ViscoConfig cfg = rc.config.empty() ? ViscoConfig{} : load_visco_config(rc.config);
  apply_overrides(cfg, rc.overrides);
  Tolerances tol = rc.config.empty() ? Tolerances{} : load_tolerances(rc.config);
  ViscoSetup s = build_visco(cfg);
  SolveOptions opt = solve_options(rc, tol);
  ViscoReport r = run_visco(s, opt, true);

  SolveOptions inner = opt;
  inner.check_margin = false;
  SolveFn solve = [&](const WeightedSignal& f) {
    InclusionProblem q = InclusionProblem::from_linear(s.problem);
    q.f = f;
    return solve_inclusion_time(q, inner).u;
  };
  Diagnostics d = diagnose(solve, s.problem.f, r.margin.c_est, tol);

  std::ostringstream text;
  text << std::setprecision(10);
  text << "scenario             visco-elastic, " << cfg.cells << " cells, nu = " << cfg.nu << ", dt = " << cfg.dt
       << ", tmax = " << cfg.tmax << "\n";
  text << kernel_check_text("relaxation kernel   ", r.relaxation_check);
  text << kernel_check_text("conjugated kernel   ", r.conjugated_check);
  text << "conjugated d bound   " << r.conjugated_d_bound << (r.conjugated_d_ok ? "  (holds)" : "  (VIOLATED)") << "\n";
  text << margin_text(r.margin);
  text << "time residual        " << r.time.max_step_residual << "\n";
  text << "frequency residual   " << (r.frequency ? r.frequency->residual : 0.0) << "\n";
  text << "cross-solver error   " << r.cross_error << "\n";
  text << "energy first/max/last " << r.energy.front() << " " << *std::max_element(r.energy.begin(), r.energy.end())
       << " " << r.energy.back() << "\n";
  text << diagnostics_text(d);
  bool pass = d.causality.pass && r.conjugated_d_ok;
  text << (pass ? "PASS" : "FAIL") << "\n";
  out << text.str();
  write_text(rc.output_dir, text.str());
  write_solution(rc.output_dir, "solution.csv", r.time.u);
  return pass ? kExitPass : kExitFail;
}

int run_demo_phase(const RunConfig& rc, std::ostream& out) {
  PhaseConfig cfg = rc.config.empty() ? PhaseConfig{} : load_phase_config(rc.config);
  apply_overrides(cfg, rc.overrides);
  Tolerances tol = rc.config.empty() ? Tolerances{} : load_tolerances(rc.config);
  PhaseSetup s = build_phase(cfg);
  SolveOptions opt = solve_options(rc, tol);
  PhaseReport r = run_phase(s, opt);

  SolveOptions inner = opt;
  inner.check_margin = false;
  SolveFn solve = [&](const WeightedSignal& f) {
    InclusionProblem q = s.problem;
    q.f = f;
    return solve_inclusion_time(q, inner).u;
  };
  Diagnostics d = diagnose(solve, s.problem.f, r.margin.c_est, tol);

  std::ostringstream text;
  text << std::setprecision(10);
  text << "scenario             phase transition, " << cfg.cells << " cells, nu = " << cfg.nu << ", dt = " << cfg.dt
       << ", tmax = " << cfg.tmax << ", relation " << cfg.relation << "\n";
  text << kernel_check_text("flux kernel         ", r.k_check);
  text << margin_text(r.margin);
  text << "coupling margin      " << r.coupling_margin.c_est << "\n";
  for (size_t i = 0; i < r.epsilon_bounds.size(); ++i)
    text << "  nu = " << std::setw(10) << r.coupling_margin.grid.nu[i] << "  sampled " << r.coupling_margin.row_minima[i]
         << "  eps-bound " << r.epsilon_bounds[i] << "\n";
  text << "eps-bound consistent " << (r.epsilon_bound_ok ? "yes" : "NO") << "\n";
  text << "chi range            [" << r.chi_min << ", " << r.chi_max << "]\n";
  text << "time residual        " << r.time.max_step_residual << "  inner iterations " << r.time.max_inner_iterations
       << "  contraction " << r.time.contraction << "\n";
  text << "heat residual        " << r.heat_residual << "\n";
  text << "flux residual        " << r.flux_residual << "\n";
  text << diagnostics_text(d);
  bool pass = d.causality.pass && r.epsilon_bound_ok;
  text << (pass ? "PASS" : "FAIL") << "\n";
  out << text.str();
  write_text(rc.output_dir, text.str());
  write_solution(rc.output_dir, "solution.csv", r.time.u);
  return pass ? kExitPass : kExitFail;
}

void add_overrides(CLI::App* app, RunConfig& rc) {
  auto pos = CLI::PositiveNumber;
  app->add_option_function<double>("--nu", [&rc](double v) { rc.overrides.nu = v; }, "weight nu")->check(pos);
  app->add_option_function<double>("--dt", [&rc](double v) { rc.overrides.dt = v; }, "time step")->check(pos);
  app->add_option_function<int>("--cells", [&rc](int v) { rc.overrides.cells = v; }, "spatial cells")->check(pos);
  app->add_option_function<double>("--tmax", [&rc](double v) { rc.overrides.tmax = v; }, "final time")->check(pos);
  app->add_flag("--force", rc.force, "run even if the margin gate trips");
  app->add_option("--output-dir", rc.output_dir, "directory for CSV and report files");
  app->add_option("--config", rc.config, "INI file (scenario parameters and/or [tolerances])")->check(CLI::ExistingFile);
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig rc;
  CLI::App app{"Evolutionary integro-differential inclusions: hypothesis checks, solvers, demos", "idekit"};
  app.require_subcommand(1);

  auto* ck = app.add_subcommand("check-kernel", "check kernel hypotheses (selfadjoint, commuting, d estimate)");
  ck->add_option("file", rc.input, "kernel file")->required()->check(CLI::ExistingFile);
  ck->add_option("--nu0", rc.nu0, "base weight")->check(CLI::PositiveNumber);
  ck->add_option("--output-dir", rc.output_dir, "directory for report.json");

  auto* cm = app.add_subcommand("check-material", "sample the solvability margin of a material law");
  cm->add_option("file", rc.input, "material file")->required()->check(CLI::ExistingFile);
  cm->add_option("--r1", rc.r1, "disc radius (margin ladder starts at nu = 1/(2 r1))")->check(CLI::PositiveNumber);
  cm->add_option("--output-dir", rc.output_dir, "directory for report.json");

  auto* sl = app.add_subcommand("solve-linear", "solve a linear problem in frequency and time domain");
  sl->add_option("file", rc.input, "problem file")->required()->check(CLI::ExistingFile);
  add_overrides(sl, rc);

  auto* si = app.add_subcommand("solve-inclusion", "solve a monotone inclusion by implicit time stepping");
  si->add_option("file", rc.input, "problem file")->required()->check(CLI::ExistingFile);
  add_overrides(si, rc);

  auto* demo = app.add_subcommand("demo", "run a built-in scenario");
  demo->add_option("scenario", rc.scenario, "visco | phase")->required()->check(CLI::IsMember({"visco", "phase"}));
  add_overrides(demo, rc);
  demo->add_option_function<double>("--r1", [&rc](double v) { rc.overrides.r1 = v; }, "disc radius, sets nu = 1/(2 r1)")
      ->check(CLI::PositiveNumber);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitPass;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitPass;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }
  rc.command = app.get_subcommands().front()->get_name();

  try {
    if (rc.command == "check-kernel") return run_check_kernel(rc, out);
    if (rc.command == "check-material") return run_check_material(rc, out);
    if (rc.command == "solve-linear") return run_solve(rc, false, out);
    if (rc.command == "solve-inclusion") return run_solve(rc, true, out);
    return rc.scenario == "visco" ? run_demo_visco(rc, out) : run_demo_phase(rc, out);
  } catch (const MarginGateError& e) {
    err << "margin gate: " << e.what() << "\n";
    return kExitFail;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DimensionMismatch& e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const StructureError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const RangeError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DivergenceRisk& e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "failed: " << e.what() << "\n";
    return kExitFail;
  } catch (const fs::filesystem_error& e) {
    err << "output error: " << e.what() << "\n";
    return kExitUsage;
  }
}

int dispatch(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return dispatch(args, std::cout, std::cerr);
}

}  // namespace ide
