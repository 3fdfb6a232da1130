#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "commands.hpp"
#include "test_support.hpp"

namespace depmark::test {
namespace {

namespace fs = std::filesystem;
using cli::Options;

struct Run {
  int code;
  std::string out;
  std::string err;
};

template <typename Fn>
Run run(Fn fn, const Options& opt) {
  std::ostringstream out, err;
  int code = fn(opt, out, err);
  return {code, out.str(), err.str()};
}

Options on(const std::string& model) {
  Options o;
  o.file = models_dir() + "/" + model;
  return o;
}

std::string temp_file(const std::string& name, const std::string& text) {
  auto path = fs::temp_directory_path() / ("depmark_cli_test_" + name);
  std::ofstream(path, std::ios::binary) << text;
  return path.string();
}

std::vector<std::string> data_lines(const std::string& csv) {
  std::vector<std::string> lines;
  std::istringstream in(csv);
  for (std::string line; std::getline(in, line);)
    if (!line.empty() && line[0] != '#') lines.push_back(line);
  return lines;
}

/// Runs the installed binary through the shell, capturing stdout.
Run spawn(const std::string& args) {
  std::string cmd = std::string(DEPMARK_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) throw std::runtime_error("popen failed");
  std::string out;
  char buf[4096];
  for (std::size_t n; (n = fread(buf, 1, sizeof buf, pipe)) > 0;) out.append(buf, n);
  int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out, ""};
}

TEST(CliHelpers, Grid) {
  EXPECT_EQ((std::vector<double>{0, 100, 200}), cli::parse_grid("0:200:100"));
  EXPECT_EQ((std::vector<double>{0, 100, 150}), cli::parse_grid("0:150:100"));
  EXPECT_EQ(4380.0, cli::parse_grid("0:4380:100").back());
  EXPECT_EQ(220u, cli::parse_grid("0:4380:20").size());
  EXPECT_EQ(45u, cli::parse_grid("0:4380:100").size());
  EXPECT_THROW(cli::parse_grid("0:10"), cli::UsageError);
  EXPECT_THROW(cli::parse_grid("0:10:0"), cli::UsageError);
  EXPECT_THROW(cli::parse_grid("5:1:1"), cli::UsageError);
}

TEST(CliHelpers, SetsAndNumbers) {
  auto s = cli::parse_sets({"C=0.99", "MU=1e-2"});
  EXPECT_EQ(0.99, s.at("C"));
  EXPECT_EQ(0.01, s.at("MU"));
  EXPECT_THROW(cli::parse_sets({"C"}), cli::UsageError);
  EXPECT_THROW(cli::parse_sets({"C=abc"}), cli::UsageError);
  EXPECT_EQ("a", cli::csv_field("a"));
  EXPECT_EQ("\"a,\"\"b\"\"\"", cli::csv_field("a,\"b\""));
  EXPECT_EQ("e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855", cli::sha256_hex(""));
}

TEST(CliValidate, BundledModelWarnsAboutUnreachableStates) {
  auto r = run(cli::run_validate, on("dfwcs.mdl"));
  EXPECT_EQ(0, r.code) << r.err;
  EXPECT_NE(std::string::npos, r.out.find("warning,state:4"));
  EXPECT_NE(std::string::npos, r.out.find("# absorbing: [6,7]"));
  EXPECT_NE(std::string::npos, r.out.find("# input_sha256: "));
}

TEST(CliValidate, SyntaxErrorIsUsage) {
  Options o;
  o.file = temp_file("bad.mdl", "state 1 \"a\" operational;\ntrans 1 -> ;\n");
  auto r = run(cli::run_validate, o);
  EXPECT_EQ(2, r.code);
  EXPECT_NE(std::string::npos, r.err.find(":2:"));
}

TEST(CliValidate, MissingFile) {
  Options o;
  o.file = "/nonexistent/model.mdl";
  EXPECT_EQ(2, run(cli::run_validate, o).code);
  EXPECT_EQ(2, run(cli::run_solve, o).code);
}

TEST(CliValidate, FatalFindingIsDomain) {
  Options o = on("dfwcs.mdl");
  o.sets = {"C=1.5"};
  EXPECT_EQ(1, run(cli::run_validate, o).code);
  EXPECT_EQ(1, run(cli::run_solve, o).code);
  o.sets = {"NOPE=1"};
  EXPECT_EQ(1, run(cli::run_solve, o).code);
}

TEST(CliSolve, ToyAtTwoHours) {
  Options o = on("toy_twostate.mdl");
  o.at = 2.0;
  auto r = run(cli::run_solve, o);
  ASSERT_EQ(0, r.code) << r.err;
  auto lines = data_lines(r.out);
  ASSERT_EQ(2u, lines.size());
  EXPECT_EQ("time_hours,up,down,R,S,Pfs,Pfu", lines[0]);
  EXPECT_EQ("2,0.367879441,0.632120559,0.367879441,1,0.632120559,0", lines[1]);
}

TEST(CliSolve, DefaultsToModelHorizon) {
  auto r = run(cli::run_solve, on("dfwcs.mdl"));
  ASSERT_EQ(0, r.code) << r.err;
  auto lines = data_lines(r.out);
  ASSERT_EQ(2u, lines.size());
  EXPECT_EQ(0u, lines[1].rfind("4380,", 0));
}

TEST(CliSolve, GridAndMethods) {
  for (const char* method : {"uniformization", "expm", "euler"}) {
    Options o = on("dfwcs.mdl");
    o.grid = "0:4380:100";
    o.method = method;
    auto r = run(cli::run_solve, o);
    ASSERT_EQ(0, r.code) << method << r.err;
    EXPECT_EQ(46u, data_lines(r.out).size()) << method;
  }
}

TEST(CliSolve, PaperLiteralReportsMassDefect) {
  Options o = on("dfwcs.mdl");
  o.method = "paper-literal";
  o.grid = "0:3:1";
  auto r = run(cli::run_solve, o);
  ASSERT_EQ(0, r.code) << r.err;
  EXPECT_NE(std::string::npos, r.out.find("# max_mass_defect: "));
  auto lines = data_lines(r.out);
  ASSERT_EQ(5u, lines.size());
  EXPECT_NE(std::string::npos, lines[0].find(",mass_defect"));
  EXPECT_NE(std::string::npos, lines[2].find(",2.64e-06"));
}

TEST(CliSolve, EulerStepTooLargeIsNumeric) {
  Options o = on("dfwcs.mdl");
  o.method = "euler";
  o.sets = {"MU=6"};
  o.at = 10.0;
  EXPECT_EQ(3, run(cli::run_solve, o).code);
}

TEST(CliSolve, UsageErrors) {
  Options o = on("dfwcs.mdl");
  o.method = "rk4";
  EXPECT_EQ(2, run(cli::run_solve, o).code);
  o = on("dfwcs.mdl");
  o.grid = "1:2";
  EXPECT_EQ(2, run(cli::run_solve, o).code);
}

TEST(CliSolve, JsonOutput) {
  Options o = on("toy_twostate.mdl");
  o.at = 2.0;
  o.output = "json";
  auto r = run(cli::run_solve, o);
  ASSERT_EQ(0, r.code);
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ("solve", j["manifest"]["command"]);
  EXPECT_EQ(7u, j["columns"].size());
  EXPECT_NEAR(0.632120559, j["rows"][0]["down"].get<double>(), 1e-9);
}

TEST(CliSweep, NineCoverageRows) {
  Options o = on("dfwcs.mdl");
  o.param = "C";
  o.values = "0.900,0.920,0.940,0.950,0.960,0.980,0.990,0.999,1";
  auto r = run(cli::run_sweep, o);
  ASSERT_EQ(0, r.code) << r.err;
  auto lines = data_lines(r.out);
  ASSERT_EQ(10u, lines.size());
  EXPECT_EQ("param,R,S,Pfs,Pfu", lines[0]);
  EXPECT_EQ("1,", lines[9].substr(0, 2));
  EXPECT_EQ(",0", lines[9].substr(lines[9].size() - 2));
}

TEST(CliSweep, OutOfDomainValue) {
  Options o = on("dfwcs.mdl");
  o.param = "C";
  o.values = "0.9,1.2";
  auto r = run(cli::run_sweep, o);
  EXPECT_EQ(1, r.code);
  EXPECT_NE(std::string::npos, r.err.find("1.2"));
}

TEST(CliSimulate, DeterministicOutput) {
  Options o = on("toy_twostate.mdl");
  o.at = 2.0;
  o.trials = 10000;
  o.seed = 3;
  auto a = run(cli::run_simulate, o);
  o.threads = 3;
  auto b = run(cli::run_simulate, o);
  ASSERT_EQ(0, a.code) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ("state,label,count,estimate,half_width,lower,upper", data_lines(a.out)[0]);
}

TEST(CliAudit, PublishedTableFlagsOneRow) {
  Options o;
  o.table = tables_dir() + "/table3.csv";
  auto r = run(cli::run_audit, o);
  EXPECT_EQ(1, r.code);
  EXPECT_NE(std::string::npos, r.out.find("# flagged_rows: 1"));
  auto lines = data_lines(r.out);
  ASSERT_EQ(10u, lines.size());
  auto fields = cli::split(lines[1], ',');
  ASSERT_EQ(5u, fields.size());
  EXPECT_EQ("0.9", fields[0]);
  EXPECT_LE(std::abs(cli::parse_double(fields[1], "safety")), 1e-15);
  EXPECT_EQ("0.00144371", fields[2]);
  EXPECT_EQ("flagged", fields[3]);
  EXPECT_EQ("S+Pfu!=1", fields[4]);
  EXPECT_EQ(0u, lines[9].find("1,"));
  EXPECT_NE(std::string::npos, lines[9].find(",ok,"));
}

TEST(CliAudit, ComputedSweepIsClean) {
  Options s = on("dfwcs.mdl");
  s.param = "C";
  s.values = "0.9,0.95,0.99,1";
  auto sweep_out = run(cli::run_sweep, s);
  ASSERT_EQ(0, sweep_out.code);
  Options o;
  o.table = temp_file("sweep.csv", sweep_out.out);
  auto r = run(cli::run_audit, o);
  EXPECT_EQ(0, r.code) << r.out;
}

TEST(CliAudit, MissingColumnOrFile) {
  Options o;
  o.table = temp_file("nopfu.csv", "param,R,S,Pfs\n0.9,1,1,0\n");
  auto r = run(cli::run_audit, o);
  EXPECT_EQ(2, r.code);
  EXPECT_NE(std::string::npos, r.err.find("Pfu"));
  o.table = "/nonexistent.csv";
  EXPECT_EQ(2, run(cli::run_audit, o).code);
}

TEST(CliAudit, QuotedFields) {
  auto rows = cli::read_audit_csv("# c\n\"param\",R,S,Pfs,Pfu\r\n\"0.5\",0.9,0.95,0.05,0.05\r\n");
  ASSERT_EQ(1u, rows.size());
  EXPECT_EQ(0.5, rows[0].param);
  EXPECT_EQ(0.05, rows[0].Pfu);
  EXPECT_THROW(cli::read_audit_csv("param,R,S,Pfs,Pfu\n1,2\n"), cli::UsageError);
}

TEST(CliBinary, ExitCodesAndReruns) {
  const std::string models = models_dir() + "/";
  EXPECT_EQ(0, spawn("validate " + models + "dfwcs.mdl").code);
  EXPECT_EQ(2, spawn("validate /nonexistent.mdl").code);
  EXPECT_EQ(2, spawn("bogus").code);
  EXPECT_EQ(2, spawn("").code);
  EXPECT_EQ(1, spawn("audit --table " + tables_dir() + "/table3.csv").code);
  EXPECT_EQ(1, spawn("sweep " + models + "dfwcs.mdl --param C --values 1.2").code);

  auto a = spawn("solve " + models + "dfwcs.mdl --at 4380 --set C=0.999");
  auto b = spawn("solve --set C=0.999 --at 4380 " + models + "dfwcs.mdl");
  ASSERT_EQ(0, a.code);
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(std::string::npos, a.out.find("# overrides: C=0.999"));

  auto c = spawn("solve " + models + "dfwcs.mdl --set C=0.99 --set MU=0.01 --at 10");
  ASSERT_EQ(0, c.code);
  EXPECT_NE(std::string::npos, c.out.find("# overrides: C=0.99 MU=0.01"));

  auto s1 = spawn("simulate " + models + "dfwcs.mdl --trials 20000 --seed 9");
  auto s2 = spawn("simulate " + models + "dfwcs.mdl --trials 20000 --seed 9 --threads 1");
  ASSERT_EQ(0, s1.code);
  EXPECT_EQ(data_lines(s1.out), data_lines(s2.out));
}

}  // namespace
}  // namespace depmark::test
