#include "vkctrl/cli/commands.hpp"

#include "vkctrl/convergence.hpp"
#include "vkctrl/verify.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>

namespace vkctrl::cli {

namespace fs = std::filesystem;

namespace {

void open_for_write(std::ofstream& file, const fs::path& path) {
  file.open(path, std::ios::binary | std::ios::trunc);
  if (!file) throw std::runtime_error("cannot write '" + path.string() + "'");
}

template <class Writer>
fs::path write_file(const fs::path& dir, const std::string& name, Writer&& writer) {
  const fs::path path = dir / name;
  std::ofstream file;
  open_for_write(file, path);
  writer(file);
  if (!file) throw std::runtime_error("error writing '" + path.string() + "'");
  return path;
}

void make_output_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ConfigError("out", "cannot create directory '" + dir + "'");
}

std::vector<ErrorColumn> all_columns() {
  std::vector<ErrorColumn> cols;
  for (int c = 0; c < kNumErrorColumns; ++c) cols.push_back(static_cast<ErrorColumn>(c));
  return cols;
}

/// Flag name, config key and help text of the options shared by study and solve.
struct FlagSpec {
  const char* flag;
  const char* key;
  const char* help;
};

constexpr FlagSpec kSharedFlags[] = {
    {"--case", "case", "Manufactured case: ex1 or ex2"},
    {"--alpha", "alpha", "Tikhonov weight (overrides the case)"},
    {"--ua", "ua", "Lower control bound (overrides the case)"},
    {"--ub", "ub", "Upper control bound (overrides the case)"},
    {"--omega", "omega", "Control region: whole or x0,y0,x1,y1"},
    {"--quad-assembly", "quad_assembly", "Gauss points per direction for assembly"},
    {"--quad-error", "quad_error", "Gauss points per direction for loads and errors"},
    {"--tol-newton", "tol_newton", "Absolute Newton residual tolerance"},
    {"--tol-pdas", "tol_pdas", "Max cellwise control change at termination"},
    {"--max-outer", "max_outer", "Maximum active-set iterations"},
    {"--relaxation", "relaxation", "Control update relaxation in (0, 1]"},
    {"--out", "out", "Output directory (default $VKCTRL_OUT or .)"},
};

/// Flag values of one subcommand, gathered as config assignments.
class FlagSet {
 public:
  void add(CLI::App* app, const char* flag, const char* key, const char* help) {
    auto& slot = values_[key];
    entries_.push_back({app->add_option(flag, slot, help), key});
  }
  Settings settings() const {
    Settings out;
    for (const auto& [opt, key] : entries_)
      if (opt->count() > 0) out.emplace_back(key, values_.at(key));
    return out;
  }

 private:
  std::map<std::string, std::string> values_;
  std::vector<std::pair<CLI::Option*, std::string>> entries_;
};

}  // namespace

int cmd_study(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  make_output_dir(cfg.out_dir);
  const CaseSpec spec = make_case(cfg.case_name);
  StudyOptions opts = cfg.study_options();
  opts.progress = [&](const ErrorRecord& r) {
    char line[160];
    std::snprintf(line, sizeof line, "level %d  N=%d  outer=%d  state_energy=%s  control_l2=%s\n", r.level, r.n_free,
                  r.outer_iterations, format_number(r[ErrorColumn::StateEnergy]).c_str(),
                  format_number(r[ErrorColumn::Control]).c_str());
    out << line << std::flush;
  };
  EocTable table;
  try {
    table = run_study(spec, opts);
  } catch (const StudyFailure& e) {
    err << "study failed at " << e.what() << '\n';
    return kExitFailure;
  }

  const fs::path dir = cfg.out_dir;
  std::vector<fs::path> written;
  const std::pair<const char*, std::vector<ErrorColumn>> tables[] = {{"table_control", control_table_columns()},
                                                                     {"table_state", state_table_columns()}};
  for (const auto& [name, cols] : tables) {
    if (cfg.wants(OutputFormat::Csv))
      written.push_back(write_file(dir, std::string(name) + ".csv", [&](std::ostream& o) { write_csv(o, table, cols); }));
    if (cfg.wants(OutputFormat::Markdown))
      written.push_back(
          write_file(dir, std::string(name) + ".md", [&](std::ostream& o) { write_markdown(o, table, cols); }));
  }
  if (cfg.wants(OutputFormat::Dat)) {
    for (ErrorColumn c : all_columns())
      written.push_back(write_file(dir, column_name(c) + ".dat", [&](std::ostream& o) { write_dat(o, table, c); }));
  }
  for (const auto& p : written) out << "wrote " << p.string() << '\n';
  return kExitOk;
}

void write_solution(std::ostream& out, const OcpSolution& sol) {
  const auto line = [&out](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g\n", v);
    out << buf;
  };
  out << sol.control.size() << ' ' << sol.state.n_free() << '\n';
  for (double v : sol.control.values()) line(v);
  for (int i = 0; i < sol.state.n_free(); ++i) line(sol.state.first[i]);
  for (int i = 0; i < sol.state.n_free(); ++i) line(sol.state.second[i]);
}

int cmd_solve(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  make_output_dir(cfg.out_dir);
  CaseSpec spec = make_case(cfg.case_name);
  spec.bounds = cfg.bounds(spec);
  const Discretization disc(RectMesh::build(spec.domain, cfg.level), cfg.quad_assembly, cfg.quad_error);
  const ControlProblem problem(disc, spec, cfg.omega);
  std::optional<OcpSolution> solved;
  try {
    solved = problem.pdas_solve(cfg.pdas_options());
  } catch (const std::runtime_error& e) {
    err << "solve failed at level " << cfg.level << ": " << e.what() << '\n';
    return kExitFailure;
  }
  const OcpSolution& sol = *solved;
  const ErrorRecord rec = compute_errors(problem, sol, spec);
  const ActiveSetCounts active = count_active(sol.control);
  const std::string name = "solution_" + cfg.case_name + "_level" + std::to_string(cfg.level) + ".txt";
  const fs::path path = write_file(cfg.out_dir, name, [&](std::ostream& o) { write_solution(o, sol); });

  out << "case " << cfg.case_name << "  level " << cfg.level << "  N=" << disc.n_free()
      << "  outer=" << sol.outer_iterations << "  cost=" << format_number(sol.cost) << '\n';
  out << "active cells: lower " << active.lower << ", upper " << active.upper << ", inactive " << active.inactive
      << '\n';
  for (ErrorColumn c : all_columns()) out << "  " << column_name(c) << " = " << format_number(rec[c]) << '\n';
  out << "wrote " << path.string() << '\n';
  return kExitOk;
}

int cmd_verify(const std::vector<std::string>& names, bool adjoint_fault, std::ostream& out, std::ostream& err) {
  verify::Options opts;
  opts.adjoint_sign_fault = adjoint_fault;
  const std::vector<std::string> selected = names.empty() ? verify::property_names() : names;
  int failed = 0;
  for (const auto& name : selected) {
    verify::Result r;
    try {
      r = verify::run(name, opts);
    } catch (const std::invalid_argument& e) {
      err << e.what() << '\n';
      return kExitConfig;
    }
    out << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
    failed += r.passed ? 0 : 1;
  }
  out << (selected.size() - failed) << '/' << selected.size() << " properties passed\n";
  return failed == 0 ? kExitOk : kExitFailure;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Optimal control of the von Karman plate equations with C1 finite elements", "vkctrl"};
  app.require_subcommand(1);

  std::string config_path;
  FlagSet study_flags;
  FlagSet solve_flags;

  auto* study = app.add_subcommand("study", "Convergence study over a range of levels");
  auto* solve = app.add_subcommand("solve", "Single-level solve with a solution dump");
  for (auto [sub, flags] : {std::pair{study, &study_flags}, std::pair{solve, &solve_flags}}) {
    sub->add_option("--config", config_path, "key=value configuration file");
    for (const auto& f : kSharedFlags) flags->add(sub, f.flag, f.key, f.help);
  }
  study_flags.add(study, "--levels", "levels", "Level range A..B");
  study_flags.add(study, "--format", "format", "Comma-separated output formats: csv, md, dat");
  solve_flags.add(solve, "--level", "level", "Refinement level");

  auto* check = app.add_subcommand("verify", "Run the property suite");
  bool list = false;
  bool fault = false;
  std::vector<std::string> properties;
  check->add_flag("--list", list, "Print property names without running them");
  check->add_option("--property", properties, "Run only the named properties");
  check->add_flag("--inject-adjoint-fault", fault, "Flip the bracket sign in the adjoint (the gradient check must fail)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  if (check->parsed()) {
    if (list) {
      for (const auto& n : verify::property_names()) out << n << '\n';
      return kExitOk;
    }
    return cmd_verify(properties, fault, out, err);
  }

  const bool is_study = study->parsed();
  try {
    const Settings file = config_path.empty() ? Settings{} : read_config_file(config_path);
    const RunConfig cfg =
        resolve(file, is_study ? study_flags.settings() : solve_flags.settings(), std::getenv("VKCTRL_OUT"));
    return is_study ? cmd_study(cfg, out, err) : cmd_solve(cfg, out, err);
  } catch (const ConfigError& e) {
    err << "invalid configuration: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace vkctrl::cli
