// Copyright 2026 The Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <string>

#include <gtest/gtest.h>

#include "anopack/io.hpp"
#include "test_support.hpp"

namespace anopack {
namespace {

using testing::TempDir;

// Runs the command line tool; stdout and stderr go to `log`.
int run_cli(const std::string& args, const std::string& log) {
  const std::string cmd = std::string(ANOPACK_CLI_PATH) + " " + args + " > " + log + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    ASSERT_EQ(run_cli("synth --m 600 --d 6 --num-packs 2 --seed 3 --output " + dir.file("train.csv") +
                          " --truth " + dir.file("truth.json"),
                      dir.file("synth.log")),
              0);
  }
  std::string explain(const std::string& out, const std::string& extra = "") {
    return "explain --input " + dir.file("train.csv") + " --workers 1 --out-dir " + dir.file(out) +
           " " + extra;
  }
  TempDir dir;
};

TEST_F(Cli, ExplainWritesArtifacts) {
  ASSERT_EQ(run_cli(explain("out", "--dump-lattice " + dir.file("lattice.json")), dir.file("log")), 0)
      << read_file(dir.file("log"));
  const auto doc = read_packing(dir.file("out/packing.json"));
  EXPECT_EQ(doc.seed, 42u);
  EXPECT_EQ(doc.d, 6u);
  EXPECT_EQ(read_file(dir.file("out/cost.csv")).substr(0, 7), "K,bits\n");
  EXPECT_NE(read_file(dir.file("out/report.txt")).find("savings:"), std::string::npos);
  const Json lattice = Json::parse(read_file(dir.file("lattice.json")));
  EXPECT_TRUE(lattice.contains("levels"));
  EXPECT_TRUE(lattice.contains("rectangles"));
  const Json summary = Json::parse(read_file(dir.file("log")));
  EXPECT_EQ(summary["best_k"].get<std::size_t>(), doc.packs.size());
}

TEST_F(Cli, RerunIsByteIdentical) {
  ASSERT_EQ(run_cli(explain("a"), dir.file("a.log")), 0);
  ASSERT_EQ(run_cli(explain("b"), dir.file("b.log")), 0);
  EXPECT_EQ(read_file(dir.file("a/packing.json")), read_file(dir.file("b/packing.json")));
  EXPECT_EQ(read_file(dir.file("a/cost.csv")), read_file(dir.file("b/cost.csv")));
  EXPECT_EQ(read_file(dir.file("a/report.txt")), read_file(dir.file("b/report.txt")));
}

TEST_F(Cli, FlagsOverrideConfigFile) {
  dir.write("config.json", R"({"seed": 9, "k_cap": 4})");
  ASSERT_EQ(run_cli(explain("c", "--config " + dir.file("config.json")), dir.file("c.log")), 0);
  EXPECT_EQ(read_packing(dir.file("c/packing.json")).seed, 9u);
  ASSERT_EQ(run_cli(explain("d", "--config " + dir.file("config.json") + " --seed 11"),
                    dir.file("d.log")),
            0);
  EXPECT_EQ(read_packing(dir.file("d/packing.json")).seed, 11u);
  // k_cap 4 limits the trace to K = 0..4.
  const auto trace = read_file(dir.file("c/cost.csv"));
  EXPECT_EQ(std::count(trace.begin(), trace.end(), '\n'), 6);
}

TEST_F(Cli, DetectAndMetrics) {
  ASSERT_EQ(run_cli(explain("out"), dir.file("log")), 0);
  ASSERT_EQ(run_cli("detect --packing " + dir.file("out/packing.json") + " --input " +
                        dir.file("train.csv") + " --label-column label --output " +
                        dir.file("scores.csv"),
                    dir.file("detect.log")),
            0);
  const std::string scores = read_file(dir.file("scores.csv"));
  EXPECT_EQ(scores.substr(0, 20), "id,score,flag,label\n");
  EXPECT_NE(read_file(dir.file("detect.log")).find("AUPRC: "), std::string::npos);
  ASSERT_EQ(run_cli("metrics --packing " + dir.file("out/packing.json") + " --input " +
                        dir.file("train.csv") + " --scores " + dir.file("scores.csv"),
                    dir.file("metrics.log")),
            0);
  const Json m = Json::parse(read_file(dir.file("metrics.log")));
  EXPECT_EQ(m["membership_violations"], 0);
  EXPECT_GT(m["auprc"].get<double>(), 0.8);
  EXPECT_TRUE(m["interpretability"].contains("avg_interval_width"));
  const auto doc = read_packing(dir.file("out/packing.json"));
  EXPECT_NEAR(m["total_bits"].get<double>(), doc.total_bits, 1e-6 * doc.total_bits);
}

TEST_F(Cli, DetectWithoutLabelsReportsNa) {
  dir.write("plain.csv", "f0,f1,f2,f3,f4,f5\n0.5,0.5,0.5,0.5,0.5,0.5\n");
  ASSERT_EQ(run_cli(explain("out"), dir.file("log")), 0);
  ASSERT_EQ(run_cli("detect --packing " + dir.file("out/packing.json") + " --input " +
                        dir.file("plain.csv") + " --output " + dir.file("s.csv"),
                    dir.file("detect.log")),
            0);
  EXPECT_EQ(read_file(dir.file("detect.log")), "AUPRC: NA\n");
  EXPECT_EQ(read_file(dir.file("s.csv")).substr(0, 14), "id,score,flag\n");
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(run_cli("", dir.file("log")), 2);
  EXPECT_EQ(run_cli("explain --input " + dir.file("nope.csv"), dir.file("log")), 2);
  EXPECT_EQ(run_cli(explain("x", "--bogus"), dir.file("log")), 2);
  EXPECT_EQ(run_cli(explain("x", "--label-column missing"), dir.file("log")), 2);
  dir.write("bad.json", R"({"seeds": 1})");
  EXPECT_EQ(run_cli(explain("x", "--config " + dir.file("bad.json")), dir.file("log")), 2);
  dir.write("broken_packing.json", R"({"version": 1})");
  EXPECT_EQ(run_cli("detect --packing " + dir.file("broken_packing.json") + " --input " +
                        dir.file("train.csv"),
                    dir.file("log")),
            4);
  ASSERT_EQ(run_cli(explain("out"), dir.file("log")), 0);
  dir.write("other.csv", "a,b\n1,2\n");
  EXPECT_EQ(run_cli("detect --packing " + dir.file("out/packing.json") + " --input " +
                        dir.file("other.csv") + " --output " + dir.file("s.csv"),
                    dir.file("log")),
            4);
  EXPECT_EQ(run_cli("synth --anomaly-fraction 0 --output " + dir.file("s.csv"), dir.file("log")), 2);
}

TEST_F(Cli, HelpExitsCleanly) { EXPECT_EQ(run_cli("--help", dir.file("log")), 0); }

}  // namespace
}  // namespace anopack
