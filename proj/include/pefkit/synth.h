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

// Synthetic concept groups over disjoint finite supports, with samples.

#ifndef PEFKIT_SYNTH_H_
#define PEFKIT_SYNTH_H_

#include <cstdint>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "pefkit/dist_core.h"
#include "pefkit/erasure.h"

namespace pefkit {

enum class SynthSetting { kEqualUniform, kEqualGaussian, kUnequal };

std::string_view SynthSettingName(SynthSetting setting);
absl::StatusOr<SynthSetting> ParseSynthSetting(std::string_view name);

struct SynthConfig {
  int n_groups = 2;
  int support_per_group = 100;
  int n_samples_per_group = 10000;
  SynthSetting setting = SynthSetting::kEqualUniform;
  std::uint64_t seed = 0;
  // Symmetric Dirichlet concentration for kUnequal.
  double dirichlet_alpha = 1.0;
};

absl::Status ValidateSynthConfig(const SynthConfig& cfg);

struct SynthData {
  GroupedData true_dists;
  // Grouped by concept in concept order; within a group, in draw order.
  std::vector<Sample> samples;
};

// Group g owns symbol ids [g * k, (g + 1) * k) with k = support_per_group and
// concept id g. Priors are equal. For kEqualGaussian every group carries the
// bell profile, shuffled per group so the groups differ by a relabeling.
absl::StatusOr<SynthData> Generate(const SynthConfig& cfg);

// probs proportional to exp(-(i - (k-1)/2)^2 / (2 (k/4)^2)), i = 0..k-1.
std::vector<double> BellProfile(int k);

}  // namespace pefkit

#endif  // PEFKIT_SYNTH_H_
