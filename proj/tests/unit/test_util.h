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

#ifndef PEFKIT_TESTS_UNIT_TEST_UTIL_H_
#define PEFKIT_TESTS_UNIT_TEST_UTIL_H_

#include <cstdint>
#include <random>
#include <vector>

#include "gtest/gtest.h"
#include "pefkit/dist_core.h"

namespace pefkit::testing {

// Aborts the test binary on invalid input; fixtures are meant to be valid.
inline Categorical Cat(std::vector<std::int64_t> ids, std::vector<double> probs) {
  absl::StatusOr<Categorical> c = Categorical::FromIds(ids, probs);
  if (!c.ok()) {
    ADD_FAILURE() << c.status();
    std::abort();
  }
  return *std::move(c);
}

// Ids 0..n-1.
inline Categorical Cat(std::vector<double> probs) {
  std::vector<std::int64_t> ids(probs.size());
  for (std::size_t k = 0; k < ids.size(); ++k) ids[k] = static_cast<std::int64_t>(k);
  return Cat(std::move(ids), std::move(probs));
}

// Groups get consecutive disjoint ids and concept ids 0..n-1.
inline GroupedData Groups(std::vector<std::vector<double>> probs,
                          std::vector<double> priors = {},
                          AssumptionCheck check = AssumptionCheck::kEnforce) {
  std::vector<ConceptGroup> groups;
  std::int64_t next = 0;
  for (std::size_t g = 0; g < probs.size(); ++g) {
    std::vector<std::int64_t> ids;
    for (std::size_t k = 0; k < probs[g].size(); ++k) ids.push_back(next++);
    groups.push_back(ConceptGroup{static_cast<ConceptId>(g), Cat(ids, probs[g])});
  }
  if (priors.empty()) priors.assign(probs.size(), 1.0 / probs.size());
  absl::StatusOr<GroupedData> g =
      GroupedData::Create(std::move(groups), std::move(priors), check);
  if (!g.ok()) {
    ADD_FAILURE() << g.status();
    std::abort();
  }
  return *std::move(g);
}

inline std::vector<double> RandomSimplex(int k, std::mt19937_64& rng) {
  std::gamma_distribution<double> gamma(1.0, 1.0);
  std::vector<double> v(k);
  double total = 0;
  for (double& x : v) total += (x = gamma(rng) + 1e-6);
  for (double& x : v) x /= total;
  return v;
}

}  // namespace pefkit::testing

#endif  // PEFKIT_TESTS_UNIT_TEST_UTIL_H_
