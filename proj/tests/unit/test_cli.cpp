#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

#include "agrisk/engine.hpp"
#include "agrisk/io.hpp"
#include "test_support.hpp"

namespace {

namespace fs = std::filesystem;
using namespace agrisk;

struct Result {
  int code = -1;
  std::string out;
};

Result cli(const std::string& args, const fs::path& dir) {
  const fs::path log = dir / "cli.log";
  const std::string cmd =
      std::string(AGRISK_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  r.out = ss.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::string kSmall =
    "--trials 120 --events-min 20 --events-max 40 --catalog 5000 --elts 4 --elt-entries 300";

class Cli : public ::testing::Test {
 protected:
  agrisk::testing::TempDir dir{"cli"};
  fs::path gen_dir() const { return dir.path() / "data"; }
  void generate() {
    const auto r = cli("gen " + kSmall + " --out-dir " + gen_dir().string(), dir.path());
    ASSERT_EQ(r.code, 0) << r.out;
  }
  std::string run_args(const std::string& out, const std::string& extra = "") const {
    return "run --yet " + (gen_dir() / "yet.bin").string() + " --portfolio " +
           (gen_dir() / "portfolio.json").string() + " --out " + (dir.path() / out).string() +
           " " + extra;
  }
};

TEST_F(Cli, HelpAndUsageErrors) {
  EXPECT_EQ(cli("--help", dir.path()).code, 0);
  EXPECT_EQ(cli("", dir.path()).code, 2);
  EXPECT_EQ(cli("frobnicate", dir.path()).code, 2);
  EXPECT_EQ(cli("gen --no-such-flag", dir.path()).code, 2);
  const auto zero = cli("gen --trials 0 --out-dir " + gen_dir().string(), dir.path());
  EXPECT_EQ(zero.code, 2);
  EXPECT_NE(zero.out.find("num_trials"), std::string::npos);
  EXPECT_EQ(cli("gen --elts 31", dir.path()).code, 2);
}

TEST_F(Cli, GenWritesFilesDeterministically) {
  generate();
  EXPECT_TRUE(fs::exists(gen_dir() / "yet.bin"));
  EXPECT_TRUE(fs::exists(gen_dir() / "portfolio.json"));
  for (int k = 1; k <= 4; ++k) {
    EXPECT_TRUE(fs::exists(gen_dir() / ("elt_" + std::to_string(k) + ".csv")));
  }
  const fs::path again = dir.path() / "again";
  ASSERT_EQ(cli("gen " + kSmall + " --out-dir " + again.string(), dir.path()).code, 0);
  for (const char* name : {"yet.bin", "portfolio.json", "elt_1.csv", "elt_4.csv"}) {
    EXPECT_EQ(slurp(gen_dir() / name), slurp(again / name)) << name;
  }
  const auto yet = read_yet_file(gen_dir() / "yet.bin");
  EXPECT_EQ(yet.num_trials(), 120u);
}

TEST_F(Cli, RunPrintsConfigAndIsWorkerInvariant) {
  generate();
  const auto one = cli(run_args("w1", "--workers 1"), dir.path());
  ASSERT_EQ(one.code, 0) << one.out;
  EXPECT_NE(one.out.find("workers=1"), std::string::npos);
  EXPECT_NE(one.out.find("compute:"), std::string::npos);
  EXPECT_NE(one.out.find("throughput:"), std::string::npos);
  ASSERT_EQ(cli(run_args("w8", "--workers 8 --chunk 7"), dir.path()).code, 0);
  for (const char* name : {"ylt_total.csv", "ylt_p1_l1.csv"}) {
    const auto a = slurp(dir.path() / "w1" / name);
    EXPECT_FALSE(a.empty());
    EXPECT_EQ(a, slurp(dir.path() / "w8" / name)) << name;
  }
}

TEST_F(Cli, RunNarrowWithinBound) {
  generate();
  ASSERT_EQ(cli(run_args("wide"), dir.path()).code, 0);
  ASSERT_EQ(cli(run_args("narrow", "--precision narrow --layout hash"), dir.path()).code, 0);
  const auto wide = read_ylt_file(dir.path() / "wide" / "ylt_total.csv");
  const auto narrow = read_ylt_file(dir.path() / "narrow" / "ylt_total.csv");
  EXPECT_LE(max_relative_difference(wide, narrow), 1e-3);
}

TEST_F(Cli, RunErrorsMapToExitCodes) {
  generate();
  EXPECT_EQ(cli("run --yet " + (gen_dir() / "yet.bin").string() + " --portfolio " +
                    (dir.path() / "missing.json").string(),
                dir.path())
                .code,
            3);
  EXPECT_EQ(cli(run_args("x", "--precision half"), dir.path()).code, 2);
  EXPECT_EQ(cli(run_args("x", "--workers 0"), dir.path()).code, 2);
  EXPECT_EQ(cli("run --yet a.bin", dir.path()).code, 2);

  // Swap the two timestamps of the first trial so it is out of order.
  std::string bytes = slurp(gen_dir() / "yet.bin");
  const std::size_t first_event = kYetHeaderBytes + kYetTrialHeaderBytes;
  float a = 0.0f;
  float b = 0.0f;
  std::memcpy(&a, bytes.data() + first_event + 4, 4);
  std::memcpy(&b, bytes.data() + first_event + 12, 4);
  ASSERT_LT(a, b);
  std::memcpy(bytes.data() + first_event + 4, &b, 4);
  std::memcpy(bytes.data() + first_event + 12, &a, 4);
  std::ofstream(gen_dir() / "yet.bin", std::ios::binary) << bytes;

  const auto bad = cli(run_args("x"), dir.path());
  EXPECT_EQ(bad.code, 4);
  EXPECT_NE(bad.out.find("out-of-order"), std::string::npos);
  const auto val = cli("validate --yet " + (gen_dir() / "yet.bin").string(), dir.path());
  EXPECT_EQ(val.code, 4);
  EXPECT_NE(val.out.find("trial 1: out-of-order"), std::string::npos);

  std::ofstream(gen_dir() / "yet.bin", std::ios::binary) << "garbage";
  EXPECT_EQ(cli(run_args("x"), dir.path()).code, 4);
}

TEST_F(Cli, ValidateGoodData) {
  generate();
  const auto r = cli("validate --yet " + (gen_dir() / "yet.bin").string() + " --portfolio " +
                         (gen_dir() / "portfolio.json").string() +
                         " --events-min 20 --events-max 40",
                     dir.path());
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find(" 0 violation(s)"), std::string::npos);
  const auto tight = cli("validate --yet " + (gen_dir() / "yet.bin").string() +
                             " --events-min 30 --events-max 40",
                         dir.path());
  EXPECT_EQ(tight.code, 4);
  EXPECT_NE(tight.out.find("trial-length"), std::string::npos);
  EXPECT_EQ(cli("validate", dir.path()).code, 2);
}

TEST_F(Cli, MetricsTables) {
  {
    std::ofstream out(dir.path() / "ylt.csv");
    out << "trial_id,loss\n";
    for (int i = 1; i <= 10; ++i) out << i << "," << i << "\n";
  }
  const auto ylt = (dir.path() / "ylt.csv").string();
  const auto r = cli("metrics --ylt " + ylt + " --return-periods 2,5,10 --alphas 0.8", dir.path());
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("return_period,loss\n2,6\n5,9\n10,10\n"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("alpha,var,tvar\n0.8,8,9.5\n"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("loss,probability\n1,1\n2,0.9\n"), std::string::npos) << r.out;

  const auto file = dir.path() / "metrics.csv";
  ASSERT_EQ(cli("metrics --ylt " + ylt + " --return-periods 2 --no-curve --out " + file.string(),
                dir.path())
                .code,
            0);
  EXPECT_NE(slurp(file).find("2,6"), std::string::npos);
  EXPECT_EQ(slurp(file).find("loss,probability"), std::string::npos);

  const auto too_far = cli("metrics --ylt " + ylt + " --return-periods 20", dir.path());
  EXPECT_EQ(too_far.code, 4);
  EXPECT_NE(too_far.out.find("exceeds the number of trials"), std::string::npos);

  std::ofstream(dir.path() / "empty.csv") << "trial_id,loss\n";
  EXPECT_EQ(cli("metrics --ylt " + (dir.path() / "empty.csv").string(), dir.path()).code, 4);
  EXPECT_EQ(cli("metrics --ylt " + (dir.path() / "nope.csv").string(), dir.path()).code, 3);
  EXPECT_EQ(cli("metrics --ylt " + ylt + " --alphas 1.5", dir.path()).code, 2);
}

const std::string kBenchSmall =
    "--trials 40 --events-min 20 --events-max 30 --catalog 5000 --elts 3 --elt-entries 200 "
    "--repetitions 3 --base-workers 1";

std::vector<std::string> report_rows(const fs::path& csv) {
  std::istringstream in(slurp(csv));
  std::vector<std::string> rows;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    rows.push_back(line);
  }
  return rows;
}

std::string checksum_of(const std::string& row) {
  std::vector<std::string> cells;
  std::stringstream ss(row);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells.at(11);
}

TEST_F(Cli, BenchExperiments) {
  const auto unknown = cli("bench --experiment warp " + kBenchSmall, dir.path());
  EXPECT_EQ(unknown.code, 2);
  EXPECT_NE(unknown.out.find("scaling, oversubscription, layouts"), std::string::npos);

  const auto scaling_csv = dir.path() / "scaling.csv";
  const auto s = cli("bench --experiment scaling --workers 1,2,4 " + kBenchSmall + " --out " +
                         scaling_csv.string(),
                     dir.path());
  ASSERT_EQ(s.code, 0) << s.out;
  EXPECT_EQ(report_rows(scaling_csv).size(), 3u);

  const auto over_csv = dir.path() / "over.csv";
  ASSERT_EQ(cli("bench --experiment oversubscription " + kBenchSmall + " --out " +
                    over_csv.string(),
                dir.path())
                .code,
            0);
  EXPECT_NE(slurp(over_csv).find("beats_baseline"), std::string::npos);

  const auto layouts_csv = dir.path() / "layouts.csv";
  ASSERT_EQ(cli("bench --experiment layouts --kinds direct,sorted,hash,combined " + kBenchSmall +
                    " --out " + layouts_csv.string(),
                dir.path())
                .code,
            0);
  const auto rows = report_rows(layouts_csv);
  ASSERT_EQ(rows.size(), 4u);
  for (const auto& row : rows) EXPECT_EQ(checksum_of(row), checksum_of(rows[0]));

  EXPECT_EQ(cli("bench --experiment layouts --kinds direct,btree " + kBenchSmall, dir.path()).code,
            2);
  EXPECT_EQ(cli("bench --experiment chunks --repetitions 2", dir.path()).code, 2);
}

}  // namespace
