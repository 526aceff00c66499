// Copyright 2026 The pefkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Drives the pef binary end to end. PEF_BINARY is set by the build.

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "pefkit/io.h"

namespace pefkit {
namespace {

namespace fs = std::filesystem;
using ::testing::HasSubstr;

struct RunResult {
  int exit_code = -1;
  std::string output;
};

RunResult RunPef(const std::string& args) {
  const std::string cmd = std::string(PEF_BINARY) + " " + args + " 2>&1";
  RunResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  std::array<char, 4096> buf;
  while (std::fgets(buf.data(), buf.size(), pipe) != nullptr) r.output += buf.data();
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path TempDir(const std::string& name) {
  fs::path dir = fs::path(::testing::TempDir()) / ("pef_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string Slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(CliTest, HelpExitsZero) {
  const RunResult r = RunPef("--help");
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_THAT(r.output, HasSubstr("generate"));
}

TEST(CliTest, UsageErrorsExitTwo) {
  EXPECT_EQ(RunPef("").exit_code, 2);
  EXPECT_EQ(RunPef("generate").exit_code, 2);
  EXPECT_EQ(RunPef("nonsense").exit_code, 2);
  const fs::path dir = TempDir("usage");
  EXPECT_EQ(RunPef("generate --setting nope --out-dir " + dir.string()).exit_code, 2);
  EXPECT_EQ(RunPef("generate --setting unequal --groups 1 --out-dir " + dir.string())
                .exit_code,
            2);
}

TEST(CliTest, MissingInputExitsFive) {
  const fs::path dir = TempDir("missing");
  EXPECT_EQ(RunPef("funnel --truth " + (dir / "absent.json").string() +
                " --out-dir " + dir.string())
                .exit_code,
            5);
}

TEST(CliTest, SharedSupportExitsThree) {
  const fs::path dir = TempDir("shared");
  ASSERT_TRUE(WriteTextFile(dir / "s.csv", "x,concept\n0,0\n1,0\n1,1\n2,1\n").ok());
  const RunResult r =
      RunPef("erase --samples " + (dir / "s.csv").string() + " --out-dir " + dir.string());
  EXPECT_EQ(r.exit_code, 3) << r.output;
}

TEST(CliTest, OracleTooLargeExitsFour) {
  const fs::path dir = TempDir("oracle");
  const Json five = {{"support", {0, 1, 2, 3, 4}},
                     {"probs", {0.2, 0.2, 0.2, 0.2, 0.2}}};
  ASSERT_TRUE(WriteJsonFile(dir / "p.json", five).ok());
  const std::string p = (dir / "p.json").string();
  EXPECT_EQ(RunPef("mec --oracle --p " + p + " --q " + p + " --out-dir " + dir.string())
                .exit_code,
            4);
}

TEST(CliTest, MecPrintsEntropy) {
  const fs::path dir = TempDir("mec");
  ASSERT_TRUE(
      WriteJsonFile(dir / "p.json", {{"support", {0, 1}}, {"probs", {0.5, 0.5}}}).ok());
  ASSERT_TRUE(
      WriteJsonFile(dir / "q.json", {{"support", {0, 1}}, {"probs", {0.6, 0.4}}}).ok());
  const RunResult r = RunPef("mec --p " + (dir / "p.json").string() + " --q " +
                          (dir / "q.json").string() + " --out-dir " + dir.string());
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_THAT(r.output, HasSubstr("entropy_bits 1.36096"));
  EXPECT_TRUE(fs::exists(dir / "coupling.csv"));
  EXPECT_TRUE(fs::exists(dir / "config.json"));
}

TEST(CliTest, PipelineProducesConsistentFiles) {
  const fs::path dir = TempDir("pipeline");
  const std::string out = " --out-dir " + dir.string();
  ASSERT_EQ(RunPef("generate --setting unequal --support 6 --samples 2000 --seed 4" + out)
                .exit_code,
            0);
  const std::string truth = (dir / "truth.json").string();
  const std::string samples = (dir / "samples.csv").string();
  const RunResult erase = RunPef("erase --samples " + samples + " --truth " + truth +
                              " --seed 4" + out);
  ASSERT_EQ(erase.exit_code, 0) << erase.output;
  absl::StatusOr<Json> report = ReadJsonFile(dir / "report.json");
  ASSERT_TRUE(report.ok());
  EXPECT_EQ((*report)["branch"], "unequal");
  EXPECT_LE((*report)["i_za_analytic"].get<double>(), 1e-8);
  EXPECT_LT((*report)["j_value"].get<double>(), 0.0);

  const RunResult eval = RunPef("evaluate --truth " + truth + " --samples " + samples +
                             " --erased " + (dir / "erased.csv").string() +
                             " --function " + (dir / "function.json").string() + out);
  ASSERT_EQ(eval.exit_code, 0) << eval.output;
  EXPECT_TRUE(fs::exists(dir / "evaluation.json"));
  EXPECT_THAT(Slurp(dir / "tradeoff.csv"),
              HasSubstr("method,mode,utility_bits,privacy_bits\n"));
  EXPECT_THAT(Slurp(dir / "funnel.csv"), HasSubstr("u,lower,upper\n"));

  ASSERT_EQ(RunPef("pic --truth " + truth + out).exit_code, 0);
  absl::StatusOr<Json> pic = ReadJsonFile(dir / "pic.json");
  ASSERT_TRUE(pic.ok());
  EXPECT_TRUE((*pic)["feasible"].get<bool>());

  ASSERT_EQ(RunPef("funnel --format json --truth " + truth + out).exit_code, 0);
  EXPECT_TRUE(fs::exists(dir / "funnel.json"));
}

TEST(CliTest, SeedFlagAcceptedEitherSide) {
  const fs::path a = TempDir("seed_a");
  const fs::path b = TempDir("seed_b");
  ASSERT_EQ(RunPef("--seed 9 generate --setting unequal --support 4 --samples 50 "
                "--out-dir " + a.string())
                .exit_code,
            0);
  ASSERT_EQ(RunPef("generate --setting unequal --support 4 --samples 50 --seed 9 "
                "--out-dir " + b.string())
                .exit_code,
            0);
  EXPECT_EQ(Slurp(a / "samples.csv"), Slurp(b / "samples.csv"));
  EXPECT_EQ(Slurp(a / "truth.json"), Slurp(b / "truth.json"));
}

}  // namespace
}  // namespace pefkit
