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

#include "pefkit/io.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gtest/gtest.h"
#include "test_util.h"

namespace pefkit {
namespace {

using ::pefkit::testing::Cat;
using ::pefkit::testing::Groups;

std::filesystem::path TempDir(const std::string& name) {
  std::filesystem::path dir = std::filesystem::path(::testing::TempDir()) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string Slurp(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(JsonTest, CategoricalRoundTripIsExact) {
  const Categorical p = Cat({3, 5, 9}, {0.1, 0.2, 0.7});
  const Json j = ToJson(p);
  EXPECT_EQ(j.dump(), R"({"support":[3,5,9],"probs":[0.1,0.2,0.7]})");
  absl::StatusOr<Categorical> back = CategoricalFromJson(j);
  ASSERT_TRUE(back.ok());
  EXPECT_EQ(back->ids(), p.ids());
  EXPECT_EQ(back->probs(), p.probs());
}

TEST(JsonTest, GroupedDataRoundTrip) {
  const GroupedData g = Groups({{0.5, 0.5}, {0.6, 0.3, 0.1}}, {0.4, 0.6});
  absl::StatusOr<GroupedData> back = GroupedDataFromJson(ToJson(g));
  ASSERT_TRUE(back.ok());
  EXPECT_EQ(back->priors(), g.priors());
  ASSERT_EQ(back->num_groups(), 2u);
  EXPECT_EQ(back->groups()[1].dist.probs(), g.groups()[1].dist.probs());
  EXPECT_EQ(back->groups()[1].concept_id, 1);
}

TEST(JsonTest, MalformedInputIsDataLoss) {
  EXPECT_EQ(CategoricalFromJson(Json::parse(R"({"support":[0]})")).status().code(),
            absl::StatusCode::kDataLoss);
  EXPECT_EQ(CategoricalFromJson(Json::parse(R"({"support":"x","probs":[1]})"))
                .status()
                .code(),
            absl::StatusCode::kDataLoss);
  EXPECT_EQ(GroupedDataFromJson(Json::parse("[]")).status().code(),
            absl::StatusCode::kDataLoss);
  // Well-formed but invalid distributions keep their validation code.
  EXPECT_EQ(CategoricalFromJson(Json::parse(R"({"support":[0,1],"probs":[0.9,0.9]})"))
                .status()
                .code(),
            absl::StatusCode::kInvalidArgument);
}

TEST(JsonTest, ErasureFunctionRoundTrip) {
  for (const auto& probs : std::vector<std::vector<std::vector<double>>>{
           {{0.3, 0.7}, {0.7, 0.3}}, {{0.5, 0.5}, {0.6, 0.4}}}) {
    const GroupedData g = Groups(probs);
    absl::StatusOr<PipelineResult> r = RunAlgorithm1(g, PipelineOptions{});
    ASSERT_TRUE(r.ok());
    const Json j = ToJson(r->function);
    absl::StatusOr<ErasureFunction> back = ErasureFunctionFromJson(j);
    ASSERT_TRUE(back.ok()) << back.status();
    EXPECT_EQ(ToJson(*back).dump(), j.dump());
    EXPECT_EQ(back->is_deterministic(), r->function.is_deterministic());
  }
}

TEST(FileTest, JsonFileRoundTripAndErrors) {
  const std::filesystem::path dir = TempDir("io_json");
  const Json j = ToJson(Cat({0.25, 0.75}));
  ASSERT_TRUE(WriteJsonFile(dir / "nested" / "p.json", j).ok());
  EXPECT_EQ(Slurp(dir / "nested" / "p.json").back(), '\n');
  absl::StatusOr<Json> back = ReadJsonFile(dir / "nested" / "p.json");
  ASSERT_TRUE(back.ok());
  EXPECT_EQ(*back, j);

  EXPECT_EQ(ReadJsonFile(dir / "absent.json").status().code(),
            absl::StatusCode::kNotFound);
  ASSERT_TRUE(WriteTextFile(dir / "bad.json", "{not json").ok());
  EXPECT_EQ(ReadJsonFile(dir / "bad.json").status().code(),
            absl::StatusCode::kDataLoss);
}

TEST(FileTest, SampleCsvRoundTrip) {
  const std::filesystem::path dir = TempDir("io_csv");
  const std::vector<Sample> samples = {{Symbol{4}, 0}, {Symbol{17}, 2}};
  ASSERT_TRUE(WriteSamplesCsv(dir / "s.csv", samples).ok());
  EXPECT_EQ(Slurp(dir / "s.csv"), "x,concept\n4,0\n17,2\n");
  absl::StatusOr<std::vector<Sample>> back = ReadSamplesCsv(dir / "s.csv");
  ASSERT_TRUE(back.ok());
  ASSERT_EQ(back->size(), 2u);
  EXPECT_EQ((*back)[1].x.id, 17);
  EXPECT_EQ((*back)[1].concept_id, 2);

  const std::vector<ErasedSample> erased = {{Symbol{9}, 1}};
  ASSERT_TRUE(WriteErasedCsv(dir / "z.csv", erased).ok());
  absl::StatusOr<std::vector<ErasedSample>> zback = ReadErasedCsv(dir / "z.csv");
  ASSERT_TRUE(zback.ok());
  EXPECT_EQ(*zback, erased);

  ASSERT_TRUE(WriteTextFile(dir / "bad.csv", "x,concept\n1,two\n").ok());
  EXPECT_EQ(ReadSamplesCsv(dir / "bad.csv").status().code(),
            absl::StatusCode::kDataLoss);
  ASSERT_TRUE(WriteTextFile(dir / "hdr.csv", "z,concept\n1,2\n").ok());
  EXPECT_FALSE(ReadSamplesCsv(dir / "hdr.csv").ok());
}

TEST(FileTest, CouplingCsvLayout) {
  const std::filesystem::path dir = TempDir("io_coupling");
  const Coupling c = GreedyMec(Cat({0.5, 0.5}), Cat({7, 8}, {0.5, 0.5}));
  ASSERT_TRUE(WriteCouplingCsv(dir / "c.csv", c).ok());
  EXPECT_EQ(Slurp(dir / "c.csv"), "row,7,8\n0,0.5,0\n1,0,0.5\n");
  const Json j = ToJson(c);
  EXPECT_EQ(j["rows"], Json::array({0, 1}));
  EXPECT_NEAR(j["entropy_bits"].get<double>(), 1.0, 1e-12);
}

}  // namespace
}  // namespace pefkit
