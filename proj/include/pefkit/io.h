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

// File formats. JSON objects keep insertion order so identical inputs give
// byte-identical files.
//
//   Categorical   {"support": [ids], "probs": [p]}
//   GroupedData   {"priors": [p], "groups": [{"concept": id, "dist": ...}]}
//   samples CSV   x,concept
//   erased CSV    z,concept
//   coupling CSV  header "row,<column ids>", then one line per row symbol
//
// Unreadable files are NotFound/Unavailable; malformed content is DataLoss.

#ifndef PEFKIT_IO_H_
#define PEFKIT_IO_H_

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "pefkit/coupling.h"
#include "pefkit/dist_core.h"
#include "pefkit/erasure.h"
#include "pefkit/eval.h"

namespace pefkit {

using Json = nlohmann::ordered_json;

Json ToJson(const Categorical& p);
Json ToJson(const GroupedData& g);
Json ToJson(const Coupling& c);
Json ToJson(const ErasureFunction& f);
Json ToJson(const ErasureReport& r);
Json ToJson(const PicSpectrum& s);
Json ToJson(const TradeoffPoint& p);

absl::StatusOr<Categorical> CategoricalFromJson(const Json& j);
absl::StatusOr<GroupedData> GroupedDataFromJson(
    const Json& j, AssumptionCheck check = AssumptionCheck::kEnforce);
absl::StatusOr<ErasureFunction> ErasureFunctionFromJson(const Json& j);

absl::StatusOr<Json> ReadJsonFile(const std::filesystem::path& path);
// Pretty-printed with a trailing newline.
absl::Status WriteJsonFile(const std::filesystem::path& path, const Json& j);
absl::Status WriteTextFile(const std::filesystem::path& path,
                           const std::string& text);

absl::StatusOr<std::vector<Sample>> ReadSamplesCsv(
    const std::filesystem::path& path);
absl::Status WriteSamplesCsv(const std::filesystem::path& path,
                             std::span<const Sample> samples);
absl::StatusOr<std::vector<ErasedSample>> ReadErasedCsv(
    const std::filesystem::path& path);
absl::Status WriteErasedCsv(const std::filesystem::path& path,
                            std::span<const ErasedSample> erased);

absl::Status WriteCouplingCsv(const std::filesystem::path& path,
                              const Coupling& c);

}  // namespace pefkit

#endif  // PEFKIT_IO_H_
