#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Runs the CLI through the shell; `env` is prepended verbatim (e.g. "MAX_NODES=10").
RunResult run(const std::string& args, const std::string& env = "") {
  const fs::path err_file = fs::temp_directory_path() / ("torusbcast_cli_err_" + std::to_string(::getpid()));
  const std::string cmd = env + (env.empty() ? "" : " ") + "'" TORUSBCAST_CLI "' " + args + " 2>'" +
                          err_file.string() + "'";
  RunResult r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  std::size_t got = 0;
  while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), got);
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = slurp(err_file);
  fs::remove(err_file);
  return r;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("torusbcast_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, FeasibleExitCodes) {
  EXPECT_EQ(run("feasible 5 2").code, 0);
  EXPECT_EQ(run("feasible 3 4").code, 0);
  const auto neg = run("feasible 4 2 --format json");
  EXPECT_EQ(neg.code, 1);
  EXPECT_NE(neg.out.find("\"t\": 2"), std::string::npos) << neg.out;
  EXPECT_EQ(run("feasible 2 3").code, 2);
  EXPECT_EQ(run("feasible 5").code, 2);
  EXPECT_EQ(run("feasible 5 2 --format xml").code, 2);
  EXPECT_EQ(run("feasible 5 2 --bogus").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("--help").code, 0);
}

TEST_F(CliTest, FeasibleBeyondBudgetStillDecides) {
  const auto r = run("feasible 101 8 --format json");
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("null"), std::string::npos) << r.out;
}

TEST_F(CliTest, ClassesOutput) {
  const auto r52 = run("classes 5 2 --format csv");
  EXPECT_EQ(r52.code, 0);
  EXPECT_EQ(r52.out,
            "t,p,v,count,factored,match\n"
            "1,1,0,4,4,true\n2,1,0,4,4,true\n2,2,1,4,4,true\n3,1,1,8,8,true\n4,2,2,4,4,true\n");
  const auto r42 = run("classes 4 2 --format csv");
  EXPECT_EQ(r42.code, 0);
  EXPECT_NE(r42.out.find("\n2,1,0,2,2,true\n"), std::string::npos) << r42.out;
  EXPECT_EQ(run("classes 3 1 --format csv").out, "t,p,v,count,factored,match\n1,1,1,2,2,true\n");
}

TEST_F(CliTest, BudgetExceeded) {
  EXPECT_EQ(run("classes 10 7").code, 3);
  EXPECT_EQ(run("classes 5 3 --max-nodes 100").code, 3);
  EXPECT_EQ(run("classes 5 3", "MAX_NODES=100").code, 3);
  EXPECT_EQ(run("classes 5 3 --max-nodes 125", "MAX_NODES=100").code, 0);
  EXPECT_EQ(run("classes 5 3", "MAX_NODES=lots").code, 2);
  EXPECT_EQ(run("schedule 5 4 --out " + path("s.json") + " --max-nodes 100").code, 3);
}

TEST_F(CliTest, ScheduleVerifyRoundTrip) {
  const auto s = run("schedule 5 2 --out " + path("s.json"));
  ASSERT_EQ(s.code, 0) << s.err;
  EXPECT_NE(s.out.find("loads: 1 2 2 1"), std::string::npos) << s.out;
  const auto v = run("verify " + path("s.json"));
  EXPECT_EQ(v.code, 0) << v.out << v.err;

  const auto vj = run("verify " + path("s.json") + " --format json");
  EXPECT_EQ(vj.code, 0);
  EXPECT_NE(vj.out.find("\"balance_ok\": true"), std::string::npos) << vj.out;

  ASSERT_EQ(run("schedule 5 2 --out " + path("t.json")).code, 0);
  EXPECT_EQ(slurp(path("s.json")), slurp(path("t.json")));
}

TEST_F(CliTest, ScheduleInfeasible) {
  const auto r = run("schedule 3 3 --out " + path("s.json"));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE((r.out + r.err).find("sphere(3)"), std::string::npos) << r.out << r.err;
  EXPECT_FALSE(fs::exists(path("s.json")));
  EXPECT_EQ(run("schedule 5 2 --out " + path("s.json") + " --rule sideways").code, 2);
}

TEST_F(CliTest, VerifyRejectsBrokenFiles) {
  ASSERT_EQ(run("schedule 5 2 --out " + path("s.json")).code, 0);
  std::string text = slurp(path("s.json"));
  const auto at = text.find("  {\"offset\": [1, 1]");
  ASSERT_NE(at, std::string::npos);
  text.erase(at, text.find('\n', at) - at + 1);
  std::ofstream(path("missing.json"), std::ios::binary) << text;

  const auto r = run("verify " + path("missing.json"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("missing offset"), std::string::npos) << r.err;

  std::ofstream(path("garbage.json"), std::ios::binary) << "{\"k\": 5,\n\"n\": 2,\n\"tree\": [ oops";
  const auto g = run("verify " + path("garbage.json"));
  EXPECT_EQ(g.code, 2);
  EXPECT_NE(g.err.find("line 3"), std::string::npos) << g.err;

  EXPECT_EQ(run("verify " + path("does_not_exist.json")).code, 2);
}

TEST_F(CliTest, VerifyReportsUnbalancedTree) {
  const std::string text = R"({"k": 3, "n": 2, "tree": [
  {"offset": [-1, -1], "axis": 1, "sign": -1},
  {"offset": [-1, 0], "axis": 1, "sign": -1},
  {"offset": [-1, 1], "axis": 1, "sign": -1},
  {"offset": [0, -1], "axis": 2, "sign": -1},
  {"offset": [0, 1], "axis": 2, "sign": 1},
  {"offset": [1, -1], "axis": 1, "sign": 1},
  {"offset": [1, 0], "axis": 1, "sign": 1},
  {"offset": [1, 1], "axis": 1, "sign": 1}
]}
)";
  std::ofstream(path("u.json"), std::ios::binary) << text;
  const auto r = run("verify " + path("u.json") + " --format json");
  EXPECT_EQ(r.code, 1) << r.err;
  EXPECT_NE(r.out.find("\"balance_ok\": false"), std::string::npos) << r.out;
}

TEST_F(CliTest, Scan) {
  const auto one = run("scan --k 5..5 --n 2..2 --format csv");
  EXPECT_EQ(one.code, 0);
  EXPECT_EQ(one.out, "k,n,nodes,brute,analytic,theorem,first_witness\n5,2,25,true,true,true,\n");

  const auto empty = run("scan --k 3..9 --n 1..8 --max-nodes 2 --format csv");
  EXPECT_EQ(empty.code, 0);
  EXPECT_EQ(empty.out, "k,n,nodes,brute,analytic,theorem,first_witness\n");

  EXPECT_EQ(run("scan --k 9..3 --n 1..2 --format csv").out, "k,n,nodes,brute,analytic,theorem,first_witness\n");
  EXPECT_EQ(run("scan --k x..3 --n 1..2").code, 2);
}

TEST_F(CliTest, MachineFormatsAreDeterministic) {
  for (const std::string args : {"scan --k 3..6 --n 1..4 --format json", "scan --k 3..6 --n 1..4 --format csv",
                                 "classes 6 3 --format json", "classes 6 3 --format csv",
                                 "feasible 6 3 --format json", "feasible 7 4 --format csv"}) {
    const auto a = run(args);
    const auto b = run(args);
    EXPECT_EQ(a.code, b.code) << args;
    EXPECT_FALSE(a.out.empty()) << args;
    EXPECT_EQ(a.out, b.out) << args;
  }
  const auto sa = run("schedule 3 4 --out " + path("a.json") + " --format json");
  const auto sb = run("schedule 3 4 --out " + path("b.json") + " --format json");
  EXPECT_EQ(sa.out, sb.out);
  EXPECT_EQ(slurp(path("a.json")), slurp(path("b.json")));
}

TEST_F(CliTest, Numtheory) {
  const auto seq = run("numtheory seq 3 2");
  EXPECT_EQ(seq.code, 0);
  EXPECT_EQ(seq.out, "1 1 2 1 1 2 1 1 3\n");
  EXPECT_EQ(run("numtheory legendre 3 9").out, "4\n");
  EXPECT_EQ(run("numtheory carries 3 4 6").out, "carries=1 valuation=1\n");
  EXPECT_EQ(run("numtheory floorsum 6 3").out, "2\n");

  EXPECT_EQ(run("numtheory legendre 4 9").code, 2);
  EXPECT_EQ(run("numtheory carries 6 4 6").code, 2);
  EXPECT_EQ(run("numtheory legendre 3").code, 2);
  EXPECT_EQ(run("numtheory seq x 2").code, 2);
  EXPECT_EQ(run("numtheory wat 1").code, 2);
}
