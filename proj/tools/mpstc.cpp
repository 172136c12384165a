// mpstc: command-line front end for the session-calculus library.
//
// Commands: parse, wf, project, check, step, reach, paths, simulate, verify.
// Exit status: 0 all verdicts pass, 1 verdict failure, 2 usage or IO error.

#include "mpst/analysis.hpp"
#include "mpst/congruence.hpp"
#include "mpst/parse.hpp"
#include "mpst/print.hpp"
#include "mpst/report.hpp"
#include "mpst/verify.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace mpst;
namespace fs = std::filesystem;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Annotation references inside a .mps file resolve relative to the file.
ProcPtr load_process(const std::string& path) {
  ParseOptions opts;
  fs::path dir = fs::path(path).parent_path();
  opts.base_dir = dir.empty() ? "." : dir.string();
  return parse_process(slurp(path), opts);
}

GlobalPtr load_global(const std::string& path) { return parse_global_type(slurp(path)); }

struct Output {
  bool json = false;

  void emit(const Json& j, const std::string& text) const {
    if (json)
      std::cout << j.dump(2) << "\n";
    else
      std::cout << text;
  }
};

std::string interval_text(const ImpreciseProb& d) {
  return "[" + rational_string(d.lo) + "," + rational_string(d.hi) + "]";
}

std::string prob_cell(const Rational& r) {
  return rational_string(r) + " (" + approx_string(r) + ")";
}

int run_parse(const std::string& file, const Output& out) {
  if (fs::path(file).extension() == ".gty") {
    auto g = load_global(file);
    out.emit(Json{{"ok", true}, {"pretty", pretty_print(g)}}, pretty_print(g) + "\n");
    return 0;
  }
  auto p = load_process(file);
  out.emit(Json{{"ok", true}, {"pretty", pretty_print(p)}}, pretty_print(p) + "\n");
  return 0;
}

int run_wf(const std::string& file, const Output& out) {
  auto rep = well_formed(load_global(file));
  std::ostringstream text;
  text << (rep.ok ? "well formed" : "not well formed") << "\n";
  for (const auto& [role, type] : rep.projections)
    text << "  " << role << ": " << pretty_print(type) << "\n";
  for (const auto& [role, reason] : rep.undefined)
    text << "  " << role << ": projection undefined: " << reason << "\n";
  for (const auto& bad : rep.bad_interval_sets)
    text << "  interval set " << bad.shown << " at " << bad.path << ": "
         << (bad.proper ? "proper" : "not proper") << ", not reachable\n";
  out.emit(json_wf(rep), text.str());
  return rep.ok ? 0 : 1;
}

int run_project(const std::string& file, const std::string& role, const Output& out) {
  auto g = load_global(file);
  try {
    auto t = project(g, role);
    out.emit(Json{{"ok", true}, {"role", role}, {"projection", pretty_print(t)}},
             pretty_print(t) + "\n");
    return 0;
  } catch (const ProjectError& e) {
    out.emit(Json{{"ok", false},
                  {"role", role},
                  {"error", {{"kind", e.kind}, {"path", e.path}, {"detail", e.what()}}}},
             "projection onto " + role + " undefined: " + e.kind + " at " + e.path + "\n");
    return 1;
  }
}

int run_check(const std::string& file, const std::string& mode, const Output& out) {
  auto p = load_process(file);
  auto r = type_check({}, p, mode == "strict" ? CheckMode::Strict : CheckMode::Subset);
  std::ostringstream text;
  if (r.ok()) {
    text << "well typed; typing " << typing_string(*r.typing) << "\n";
  } else {
    text << "ill typed: " << r.error->kind << ": " << r.error->detail << "\n";
    for (const auto& frame : r.error->path) text << "  at " << frame << "\n";
  }
  for (const auto& w : r.warnings) text << "warning: " << w.kind << ": " << w.detail << "\n";
  out.emit(json_check(r), text.str());
  return r.ok() ? 0 : 1;
}

int run_step(const std::string& file, const Output& out) {
  auto p = load_process(file);
  auto r = enabled_steps(p);
  std::ostringstream text;
  if (r.steps.empty()) text << "no enabled transitions\n";
  for (const auto& st : r.steps)
    text << st.label.index() << "", text.seekp(-1, std::ios_base::cur), text << label_string(st.label)
         << "  " << prob_cell(st.prob) << "  ->  " << pretty_print(st.target) << "\n";
  for (const auto& d : r.diagnostics)
    text << "diagnostic: " << d.kind << ": " << d.detail << "\n";
  out.emit(json_steps(r), text.str());
  return 0;
}

int run_reach(const std::string& file, int k, std::size_t cap, const Output& out) {
  auto p = load_process(file);
  AnalysisLimits limits(cap);
  auto entries = reach(p, k, limits);
  auto total = total_probability(p, k, limits);
  std::ostringstream text;
  text << "states after " << k << " steps: " << entries.size() << "\n";
  for (const auto& e : entries)
    text << "  " << prob_cell(e.mass) << (e.absorbed ? "  [absorbed]" : "") << "  "
         << pretty_print(e.state) << "\n";
  if (total)
    text << "total: " << prob_cell(*total) << "\n";
  else
    text << "total: not computed (empty distribution)\n";
  out.emit(json_reach(entries, total), text.str());
  return 0;
}

int run_paths(const std::string& file, int depth, std::size_t cap, const Output& out) {
  auto p = load_process(file);
  auto paths = enumerate_paths(p, depth, AnalysisLimits(cap));
  std::ostringstream text;
  text << "paths to depth " << depth << ": " << paths.size() << "\n";
  for (const auto& ep : paths) {
    text << "  " << prob_cell(ep.probability()) << "  ";
    if (ep.steps.empty()) text << "(no transitions)";
    for (const auto& st : ep.steps) text << label_string(st.label) << " ";
    text << "\n";
  }
  out.emit(json_paths(paths), text.str());
  return 0;
}

int run_simulate(const std::string& file, std::uint64_t trials, std::uint64_t seed,
                 std::size_t step_cap, const std::string& ref, const Output& out) {
  auto p = load_process(file);
  SimOptions opts;
  opts.step_cap = step_cap;
  if (!ref.empty()) opts.reference = load_global(ref);
  auto rep = simulate(p, trials, seed, opts);
  bool pass = true;
  for (const auto& row : rep.audit) pass = pass && row.pass;
  std::ostringstream text;
  text << "trials " << rep.trials << ", seed " << rep.seed << ", quiescent " << rep.quiescent
       << "\n";
  for (const auto& row : rep.audit) {
    text << "  " << row.label << ": declared " << prob_cell(row.declared) << ", empirical "
         << row.empirical << " (" << row.count << "/" << rep.trials << "), margin " << row.margin;
    if (row.delta) text << ", interval " << interval_text(*row.delta);
    text << (row.pass ? "  pass" : "  FAIL") << "\n";
  }
  out.emit(json_sim(rep), text.str());
  return pass ? 0 : 1;
}

int run_verify(const std::string& dir, const Output& out) {
  auto rep = verify_corpus(dir);
  std::ostringstream text;
  for (const auto& row : rep.rows)
    text << (row.pass ? "  ok   " : "  FAIL ") << row.suite << "  " << row.subject << ": "
         << row.detail << "\n";
  text << (rep.all_pass() ? "all properties hold" : "property failures present") << " ("
       << rep.rows.size() << " rows)\n";
  out.emit(json_verify(rep), text.str());
  return rep.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"session calculus with interval-probability typing"};
  app.require_subcommand(1);

  std::string format = "text";
  app.add_option("--format", format, "output format")
      ->check(CLI::IsMember({"text", "json"}))
      ->capture_default_str();

  std::string file, role, mode = "subset", ref, dir = "fixtures";
  int k = 1, depth = 1;
  std::uint64_t trials = 10000, seed = 0;
  std::size_t cap = explosion_cap(), step_cap = 64;

  auto* parse_cmd = app.add_subcommand("parse", "echo the normalized form of a file");
  parse_cmd->add_option("file", file, "input .mps or .gty file")->required();

  auto* wf_cmd = app.add_subcommand("wf", "well-formedness of a global type");
  wf_cmd->add_option("file", file, "input .gty file")->required();

  auto* project_cmd = app.add_subcommand("project", "project a global type onto a role");
  project_cmd->add_option("file", file, "input .gty file")->required();
  project_cmd->add_option("--role", role, "role to project onto")->required();

  auto* check_cmd = app.add_subcommand("check", "type-check an annotated process");
  check_cmd->add_option("file", file, "input .mps file")->required();
  check_cmd->add_option("--mode", mode, "label-set discipline for selections")
      ->check(CLI::IsMember({"subset", "strict"}))
      ->capture_default_str();

  auto* step_cmd = app.add_subcommand("step", "enabled transitions with exact probabilities");
  step_cmd->add_option("file", file, "input .mps file")->required();

  auto* reach_cmd = app.add_subcommand("reach", "k-step state distribution and its sum");
  reach_cmd->add_option("file", file, "input .mps file")->required();
  reach_cmd->add_option("-k", k, "number of steps")->required()->check(CLI::PositiveNumber);
  reach_cmd->add_option("--cap", cap, "state cap")->capture_default_str();

  auto* paths_cmd = app.add_subcommand("paths", "evolution paths to a depth");
  paths_cmd->add_option("file", file, "input .mps file")->required();
  paths_cmd->add_option("--depth", depth, "path length bound")
      ->required()
      ->check(CLI::PositiveNumber);
  paths_cmd->add_option("--cap", cap, "path cap")->capture_default_str();

  auto* sim_cmd = app.add_subcommand("simulate", "seeded Monte Carlo interval audit");
  sim_cmd->add_option("file", file, "input .mps file")->required();
  sim_cmd->add_option("-n,--trials", trials, "number of trials")->capture_default_str();
  sim_cmd->add_option("--seed", seed, "random seed")->capture_default_str();
  sim_cmd->add_option("--steps", step_cap, "per-trial transition budget")->capture_default_str();
  sim_cmd->add_option("--ref", ref, "global type whose root intervals the audit checks");

  auto* verify_cmd = app.add_subcommand("verify", "property harness over the fixture corpus");
  verify_cmd->add_option("dir", dir, "fixtures directory")->capture_default_str();

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  Output out{format == "json"};
  try {
    if (parse_cmd->parsed()) return run_parse(file, out);
    if (wf_cmd->parsed()) return run_wf(file, out);
    if (project_cmd->parsed()) return run_project(file, role, out);
    if (check_cmd->parsed()) return run_check(file, mode, out);
    if (step_cmd->parsed()) return run_step(file, out);
    if (reach_cmd->parsed()) return run_reach(file, k, cap, out);
    if (paths_cmd->parsed()) return run_paths(file, depth, cap, out);
    if (sim_cmd->parsed()) return run_simulate(file, trials, seed, step_cap, ref, out);
    if (verify_cmd->parsed()) return run_verify(dir, out);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << file << ":" << e.line << ":" << e.col << ": " << e.kind << ": " << e.what()
              << "\n";
    return 1;
  } catch (const ExplosionGuard& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
