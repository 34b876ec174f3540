#include "vkctrl/cli/commands.hpp"
#include "vkctrl/cli/config.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace vkctrl;
using namespace vkctrl::cli;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "vkctrl");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag)
      : path_(fs::temp_directory_path() / ("vkctrl_cli_" + tag + "_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()))) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }
  std::string str() const { return path_.string(); }

 private:
  fs::path path_;
};

int count_lines(const std::string& s) {
  int n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

TEST(ConfigParse, KeyValueLinesAndComments) {
  const Settings s = parse_config("# header\ncase = ex2\n\nlevels=1..4  # trailing\n  alpha = 2.5e-3\n");
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s[0], (std::pair<std::string, std::string>{"case", "ex2"}));
  EXPECT_EQ(s[1].second, "1..4");
  EXPECT_EQ(s[2].second, "2.5e-3");
}

TEST(ConfigParse, MalformedLineNamesTheLine) {
  try {
    parse_config("case=ex1\njust text\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "line 2");
  }
}

TEST(ConfigResolve, FlagsOverrideFileOverrideEnvironment) {
  const RunConfig env_only = resolve({}, {}, "/env/dir");
  EXPECT_EQ(env_only.out_dir, "/env/dir");
  const RunConfig file = resolve({{"out", "/file/dir"}, {"levels", "2..3"}}, {}, "/env/dir");
  EXPECT_EQ(file.out_dir, "/file/dir");
  EXPECT_EQ(file.level_min, 2);
  EXPECT_EQ(file.level_max, 3);
  const RunConfig flags = resolve({{"out", "/file/dir"}}, {{"out", "/flag/dir"}}, "/env/dir");
  EXPECT_EQ(flags.out_dir, "/flag/dir");
}

TEST(ConfigResolve, AppliesEveryKey) {
  const RunConfig c = resolve({{"case", "ex2"},
                               {"levels", "1..2"},
                               {"level", "2"},
                               {"alpha", "0.5"},
                               {"ua", "-10"},
                               {"ub", "10"},
                               {"omega", "0,0,0.5,0.5"},
                               {"quad_assembly", "6"},
                               {"quad_error", "8"},
                               {"tol_newton", "1e-9"},
                               {"tol_newton_rel", "1e-8"},
                               {"tol_newton_step", "1e-7"},
                               {"max_newton", "12"},
                               {"tol_pdas", "1e-6"},
                               {"max_outer", "9"},
                               {"relaxation", "0.5"},
                               {"format", "dat, csv"}},
                              {}, nullptr);
  EXPECT_EQ(c.case_name, "ex2");
  EXPECT_EQ(c.level, 2);
  EXPECT_EQ(c.bounds(make_case(CaseId::Ex2)).alpha, 0.5);
  EXPECT_FALSE(c.omega.whole);
  EXPECT_EQ(c.quad_assembly, 6);
  EXPECT_EQ(c.quad_error, 8);
  EXPECT_EQ(c.newton.tol_abs, 1e-9);
  EXPECT_EQ(c.newton.tol_rel, 1e-8);
  EXPECT_EQ(c.newton.tol_step, 1e-7);
  EXPECT_EQ(c.newton.max_iter, 12);
  EXPECT_EQ(c.pdas_options().tol_u, 1e-6);
  EXPECT_EQ(c.pdas_options().max_outer, 9);
  EXPECT_EQ(c.pdas_options().relaxation, 0.5);
  EXPECT_TRUE(c.wants(OutputFormat::Dat));
  EXPECT_TRUE(c.wants(OutputFormat::Csv));
  EXPECT_FALSE(c.wants(OutputFormat::Markdown));
  EXPECT_EQ(config_keys().size(), 18u);
}

TEST(ConfigResolve, ErrorsNameTheKey) {
  const std::pair<Settings, std::string> bad[] = {
      {{{"case", "ex3"}}, "case"},
      {{{"levels", "3..2"}}, "levels"},
      {{{"levels", "0..2"}}, "levels"},
      {{{"levels", "1..9"}}, "levels"},
      {{{"alpha", "-1"}}, "alpha"},
      {{{"alpha", "abc"}}, "alpha"},
      {{{"ua", "5"}, {"ub", "1"}}, "ub"},
      {{{"omega", "0,0,2,2"}}, "omega"},
      {{{"quad_assembly", "3"}}, "quad_assembly"},
      {{{"relaxation", "1.5"}}, "relaxation"},
      {{{"format", "xml"}}, "format"},
      {{{"colour", "red"}}, "colour"},
  };
  for (const auto& [settings, key] : bad) {
    try {
      resolve(settings, {}, nullptr);
      ADD_FAILURE() << "accepted invalid " << key;
    } catch (const ConfigError& e) {
      EXPECT_EQ(e.key(), key) << e.what();
    }
  }
}

TEST(ConfigFile, MissingFileIsAConfigError) {
  EXPECT_THROW(read_config_file("/nonexistent/vkctrl.cfg"), ConfigError);
}

TEST(CliRun, UsageErrorsExitWithTwo) {
  EXPECT_EQ(invoke({}).code, kExitConfig);
  EXPECT_EQ(invoke({"frobnicate"}).code, kExitConfig);
  EXPECT_EQ(invoke({"study", "--bogus"}).code, kExitConfig);
  const Outcome bad_case = invoke({"study", "--case", "ex9"});
  EXPECT_EQ(bad_case.code, kExitConfig);
  EXPECT_NE(bad_case.err.find("case"), std::string::npos) << bad_case.err;
  const Outcome descending = invoke({"study", "--levels", "3..1"});
  EXPECT_EQ(descending.code, kExitConfig);
  EXPECT_NE(descending.err.find("levels"), std::string::npos) << descending.err;
  EXPECT_EQ(invoke({"verify", "--property", "no_such_property"}).code, kExitConfig);
}

TEST(CliRun, HelpExitsCleanly) {
  const Outcome o = invoke({"--help"});
  EXPECT_EQ(o.code, kExitOk);
  EXPECT_NE(o.out.find("study"), std::string::npos);
}

TEST(CliRun, VerifyListAndSelection) {
  const Outcome list = invoke({"verify", "--list"});
  EXPECT_EQ(list.code, kExitOk);
  EXPECT_NE(list.out.find("reduced_gradient_fd"), std::string::npos);
  const Outcome one = invoke({"verify", "--property", "gamma_root"});
  EXPECT_EQ(one.code, kExitOk);
  EXPECT_NE(one.out.find("PASS gamma_root"), std::string::npos) << one.out;
  const Outcome fault = invoke({"verify", "--property", "reduced_gradient_fd", "--inject-adjoint-fault"});
  EXPECT_EQ(fault.code, kExitFailure);
  EXPECT_NE(fault.out.find("FAIL reduced_gradient_fd"), std::string::npos) << fault.out;
}

TEST(CliRun, SolveWritesDeterministicDump) {
  TempDir dir("solve");
  const Outcome first = invoke({"solve", "--case", "ex1", "--level", "1", "--out", dir.str()});
  ASSERT_EQ(first.code, kExitOk) << first.err;
  const fs::path dump = dir.path() / "solution_ex1_level1.txt";
  const std::string a = slurp(dump);
  EXPECT_EQ(count_lines(a), 1 + 16 + 2 * 36);
  EXPECT_EQ(a.substr(0, a.find('\n')), "16 36");
  EXPECT_NE(first.out.find("upper 4"), std::string::npos) << first.out;
  ASSERT_EQ(invoke({"solve", "--case", "ex1", "--level", "1", "--out", dir.str()}).code, kExitOk);
  EXPECT_EQ(slurp(dump), a);
}

TEST(CliRun, SolveFailureExitsWithOne) {
  TempDir dir("solvefail");
  const Outcome o = invoke({"solve", "--level", "2", "--max-outer", "1", "--out", dir.str()});
  EXPECT_EQ(o.code, kExitFailure);
  EXPECT_NE(o.err.find("level 2"), std::string::npos) << o.err;
}

TEST(CliRun, StudyWritesTablesFromConfigFile) {
  TempDir dir("study");
  const fs::path cfg = dir.path() / "run.cfg";
  std::ofstream(cfg) << "case = ex1\nlevels = 1..2\nformat = csv,md,dat\nout = " << dir.str() << "\n";
  const Outcome o = invoke({"study", "--config", cfg.string()});
  ASSERT_EQ(o.code, kExitOk) << o.err;
  for (const char* name : {"table_control.csv", "table_control.md", "table_state.csv", "table_state.md",
                           "state_energy.dat", "control_l2.dat"})
    EXPECT_TRUE(fs::exists(dir.path() / name)) << name;
  const std::string csv = slurp(dir.path() / "table_control.csv");
  EXPECT_EQ(count_lines(csv), 3);
  EXPECT_EQ(csv.rfind("N,h_over_h0,state_energy_err,state_energy_eoc", 0), 0u) << csv;
  ASSERT_EQ(invoke({"study", "--config", cfg.string(), "--format", "csv"}).code, kExitOk);
  EXPECT_EQ(slurp(dir.path() / "table_control.csv"), csv);
}

#ifdef VKCTRL_CLI_PATH
TEST(CliBinary, OutputDirectoryFromEnvironment) {
  TempDir dir("env");
  const std::string cmd = "VKCTRL_OUT=" + dir.str() + " " + VKCTRL_CLI_PATH + " solve --level 1 > /dev/null";
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  EXPECT_TRUE(fs::exists(dir.path() / "solution_ex1_level1.txt"));
}

TEST(CliBinary, ExitStatusPropagates) {
  const std::string cmd = std::string(VKCTRL_CLI_PATH) + " study --levels 2..1 2> /dev/null";
  const int status = std::system(cmd.c_str());
  ASSERT_TRUE(WIFEXITED(status));
  EXPECT_EQ(WEXITSTATUS(status), kExitConfig);
}
#endif
