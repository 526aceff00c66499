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

#include "pefkit/synth.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "pefkit/random.h"

namespace pefkit {
namespace {

std::vector<double> DirichletDraw(int k, double alpha, std::mt19937_64& rng) {
  std::gamma_distribution<double> gamma(alpha, 1.0);
  std::vector<double> v(k);
  double total = 0;
  // A draw that underflows everywhere is retried; vanishingly rare for sane
  // alpha.
  while (total <= 0) {
    total = 0;
    for (double& x : v) {
      x = gamma(rng);
      total += x;
    }
  }
  for (double& x : v) x /= total;
  return v;
}

// Fisher-Yates driven by UnitInterval so the result does not depend on the
// standard library's distribution implementations.
void Shuffle(std::vector<double>& v, std::uint64_t seed) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const double u = UnitInterval(DeriveSeed(seed, static_cast<std::uint64_t>(i)));
    const auto j = static_cast<std::size_t>(u * static_cast<double>(i));
    std::swap(v[i - 1], v[std::min(j, i - 1)]);
  }
}

}  // namespace

std::string_view SynthSettingName(SynthSetting setting) {
  switch (setting) {
    case SynthSetting::kEqualUniform:
      return "equal_uniform";
    case SynthSetting::kEqualGaussian:
      return "equal_gaussian";
    case SynthSetting::kUnequal:
      return "unequal";
  }
  return "unknown";
}

absl::StatusOr<SynthSetting> ParseSynthSetting(std::string_view name) {
  for (SynthSetting s : {SynthSetting::kEqualUniform,
                         SynthSetting::kEqualGaussian, SynthSetting::kUnequal}) {
    if (SynthSettingName(s) == name) return s;
  }
  return absl::InvalidArgumentError(absl::StrCat(
      "unknown setting '", std::string(name),
      "'; expected equal_uniform, equal_gaussian or unequal"));
}

absl::Status ValidateSynthConfig(const SynthConfig& cfg) {
  if (cfg.n_groups < 2) {
    return absl::InvalidArgumentError("n_groups must be at least 2");
  }
  if (cfg.support_per_group < 2) {
    return absl::InvalidArgumentError("support_per_group must be at least 2");
  }
  if (cfg.n_samples_per_group < 1) {
    return absl::InvalidArgumentError("n_samples_per_group must be positive");
  }
  if (!(cfg.dirichlet_alpha > 0) || !std::isfinite(cfg.dirichlet_alpha)) {
    return absl::InvalidArgumentError("dirichlet_alpha must be positive");
  }
  return absl::OkStatus();
}

std::vector<double> BellProfile(int k) {
  std::vector<double> p(std::max(k, 0));
  const double center = (k - 1) / 2.0;
  const double width = k / 4.0;
  for (int i = 0; i < k; ++i) {
    const double d = i - center;
    p[i] = std::exp(-d * d / (2 * width * width));
  }
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  for (double& v : p) v /= total;
  return p;
}

absl::StatusOr<SynthData> Generate(const SynthConfig& cfg) {
  if (absl::Status s = ValidateSynthConfig(cfg); !s.ok()) return s;
  const int k = cfg.support_per_group;
  const std::vector<double> bell = BellProfile(k);

  std::vector<ConceptGroup> groups;
  std::vector<Sample> samples;
  samples.reserve(static_cast<std::size_t>(cfg.n_groups) *
                  cfg.n_samples_per_group);
  for (int g = 0; g < cfg.n_groups; ++g) {
    const std::uint64_t group_seed =
        DeriveSeed(DeriveSeed(cfg.seed, "synth"), static_cast<std::uint64_t>(g));
    std::vector<double> probs;
    switch (cfg.setting) {
      case SynthSetting::kEqualUniform:
        probs.assign(k, 1.0 / k);
        break;
      case SynthSetting::kEqualGaussian:
        probs = bell;
        if (g > 0) Shuffle(probs, DeriveSeed(group_seed, "shuffle"));
        break;
      case SynthSetting::kUnequal: {
        std::mt19937_64 rng(DeriveSeed(group_seed, "dirichlet"));
        probs = DirichletDraw(k, cfg.dirichlet_alpha, rng);
        break;
      }
    }
    std::vector<Symbol> support(k);
    for (int i = 0; i < k; ++i) {
      support[i] = Symbol{static_cast<std::int64_t>(g) * k + i};
    }
    absl::StatusOr<Categorical> dist = Categorical::Create(support, probs);
    if (!dist.ok()) return dist.status();

    // Inverse-CDF draws over the stored (trimmed) distribution.
    std::vector<double> cdf(dist->size());
    std::partial_sum(dist->probs().begin(), dist->probs().end(), cdf.begin());
    const std::uint64_t sample_seed = DeriveSeed(group_seed, "samples");
    for (int n = 0; n < cfg.n_samples_per_group; ++n) {
      const double u = UnitInterval(
          DeriveSeed(sample_seed, static_cast<std::uint64_t>(n))) * cdf.back();
      const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
      const std::size_t idx =
          std::min<std::size_t>(it - cdf.begin(), cdf.size() - 1);
      samples.push_back(Sample{dist->support()[idx], g});
    }
    groups.push_back(ConceptGroup{g, *std::move(dist)});
  }
  std::vector<double> priors(cfg.n_groups, 1.0 / cfg.n_groups);
  absl::StatusOr<GroupedData> data =
      GroupedData::Create(std::move(groups), std::move(priors));
  if (!data.ok()) return data.status();
  return SynthData{*std::move(data), std::move(samples)};
}

}  // namespace pefkit
