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

#include "pefkit/erasure.h"

#include <algorithm>
#include <cmath>
#include <map>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "pefkit/coupling.h"
#include "pefkit/random.h"

namespace pefkit {
namespace {

Categorical PointMass(Symbol z) { return *Categorical::Create({z}, {1.0}); }

absl::StatusOr<Categorical> FromMassMap(const std::map<std::int64_t, double>& mass) {
  std::vector<Symbol> support;
  std::vector<double> probs;
  for (const auto& [id, p] : mass) {
    support.push_back(Symbol{id});
    probs.push_back(p);
  }
  return Categorical::Create(std::move(support), std::move(probs));
}

}  // namespace

ErasureFunction::ErasureFunction(DeterministicErasure f)
    : variant_(std::move(f)) {
  BuildIndex();
}

ErasureFunction::ErasureFunction(StochasticErasure f) : variant_(std::move(f)) {
  BuildIndex();
}

void ErasureFunction::BuildIndex() {
  index_.clear();
  if (is_deterministic()) {
    const auto& groups = deterministic().groups;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      const auto& pairs = groups[g].map.pairs();
      for (std::size_t k = 0; k < pairs.size(); ++k) {
        index_.emplace(pairs[k].first.id, std::make_pair(g, k));
      }
    }
  } else {
    const auto& groups = stochastic().groups;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      for (std::size_t k = 0; k < groups[g].rows.size(); ++k) {
        index_.emplace(groups[g].rows[k].x.id, std::make_pair(g, k));
      }
    }
  }
}

const Categorical& ErasureFunction::q() const {
  return is_deterministic() ? deterministic().q : stochastic().q;
}

std::optional<Categorical> ErasureFunction::ConditionalOf(Symbol x) const {
  auto it = index_.find(x.id);
  if (it == index_.end()) return std::nullopt;
  const auto [g, k] = it->second;
  if (is_deterministic()) {
    return PointMass(deterministic().groups[g].map.pairs()[k].second);
  }
  return stochastic().groups[g].rows[k].z_given_x;
}

absl::StatusOr<std::vector<ErasedSample>> ErasureFunction::Apply(
    std::span<const Sample> samples, std::uint64_t seed) const {
  std::vector<ErasedSample> out;
  out.reserve(samples.size());
  for (std::size_t n = 0; n < samples.size(); ++n) {
    const Sample& sample = samples[n];
    auto it = index_.find(sample.x.id);
    if (it == index_.end()) {
      return absl::FailedPreconditionError(absl::StrCat(
          "symbol ", sample.x.id, " (sample ", n,
          ") is not covered by the erasure function"));
    }
    const auto [g, k] = it->second;
    Symbol z;
    if (is_deterministic()) {
      z = deterministic().groups[g].map.pairs()[k].second;
    } else {
      const Categorical& row = stochastic().groups[g].rows[k].z_given_x;
      const double u = UnitInterval(DeriveSeed(seed, static_cast<std::uint64_t>(n)));
      std::size_t pick = row.size() - 1;
      double cumulative = 0;
      for (std::size_t j = 0; j < row.size(); ++j) {
        cumulative += row.probs()[j];
        if (u < cumulative) {
          pick = j;
          break;
        }
      }
      z = row.support()[pick];
    }
    out.push_back(ErasedSample{z, sample.concept_id});
  }
  return out;
}

std::string_view BranchName(Branch branch) {
  return branch == Branch::kEqual ? "equal" : "unequal";
}

absl::StatusOr<ErasureAnalysis> AnalyzeErasure(const GroupedData& g,
                                               const ErasureFunction& f) {
  ErasureAnalysis analysis;
  analysis.h_x_given_a = ConditionalEntropyXGivenA(g);
  double h_z_given_x = 0;
  std::vector<std::map<std::int64_t, double>> induced(g.num_groups());
  for (std::size_t i = 0; i < g.num_groups(); ++i) {
    const Categorical& dist = g.groups()[i].dist;
    const double prior = g.priors()[i];
    for (std::size_t k = 0; k < dist.size(); ++k) {
      std::optional<Categorical> row = f.ConditionalOf(dist.support()[k]);
      if (!row) {
        return absl::FailedPreconditionError(
            absl::StrCat("symbol ", dist.support()[k].id,
                         " is not covered by the erasure function"));
      }
      const double px = dist.probs()[k];
      h_z_given_x += prior * px * Entropy(*row);
      for (std::size_t j = 0; j < row->size(); ++j) {
        induced[i][row->support()[j].id] += px * row->probs()[j];
      }
    }
  }
  for (const auto& mass : induced) {
    absl::StatusOr<Categorical> dist = FromMassMap(mass);
    if (!dist.ok()) return dist.status();
    analysis.induced.push_back(*std::move(dist));
  }

  // Identical conditionals mean Z is independent of A; report that exactly
  // rather than through a difference of rounded entropies.
  const bool identical = std::all_of(
      analysis.induced.begin(), analysis.induced.end(),
      [&](const Categorical& c) {
        return c.support() == analysis.induced.front().support() &&
               c.probs() == analysis.induced.front().probs();
      });
  double h_z_given_a = 0;
  for (std::size_t i = 0; i < g.num_groups(); ++i) {
    h_z_given_a += g.priors()[i] * Entropy(analysis.induced[i]);
  }
  if (identical) {
    analysis.h_z = Entropy(analysis.induced.front());
    analysis.i_za = 0;
    h_z_given_a = analysis.h_z;
  } else {
    std::map<std::int64_t, double> pooled;
    for (std::size_t i = 0; i < g.num_groups(); ++i) {
      for (const auto& [id, p] : induced[i]) pooled[id] += g.priors()[i] * p;
    }
    absl::StatusOr<Categorical> marginal = FromMassMap(pooled);
    if (!marginal.ok()) return marginal.status();
    analysis.h_z = Entropy(*marginal);
    analysis.i_za = analysis.h_z - h_z_given_a;
  }
  analysis.i_zx = analysis.h_z - h_z_given_x;
  // H(X|Z,A) = H(X|A) - I(Z;X|A), and I(Z;X|A) = H(Z|A) - H(Z|X) because Z
  // depends on A only through X.
  analysis.h_x_given_za = analysis.h_x_given_a - (h_z_given_a - h_z_given_x);
  return analysis;
}

absl::StatusOr<Categorical> EstimateDistribution(
    std::span<const Sample> samples, ConceptId concept_id) {
  std::map<std::int64_t, std::size_t> counts;
  std::size_t n = 0;
  for (const Sample& s : samples) {
    if (s.concept_id != concept_id) continue;
    ++counts[s.x.id];
    ++n;
  }
  if (n == 0) {
    return absl::InvalidArgumentError(
        absl::StrCat("no samples for concept ", concept_id));
  }
  std::vector<Symbol> support;
  std::vector<double> probs;
  for (const auto& [id, count] : counts) {
    support.push_back(Symbol{id});
    probs.push_back(static_cast<double>(count) / static_cast<double>(n));
  }
  return Categorical::Create(std::move(support), std::move(probs));
}

absl::StatusOr<GroupedData> EstimateGroupedData(
    std::span<const Sample> samples) {
  if (samples.empty()) return absl::InvalidArgumentError("no samples");
  std::map<ConceptId, std::size_t> concept_counts;
  for (const Sample& s : samples) ++concept_counts[s.concept_id];
  std::vector<ConceptGroup> groups;
  std::vector<double> priors;
  for (const auto& [concept_id, count] : concept_counts) {
    absl::StatusOr<Categorical> dist = EstimateDistribution(samples, concept_id);
    if (!dist.ok()) return dist.status();
    groups.push_back(ConceptGroup{concept_id, *std::move(dist)});
    priors.push_back(static_cast<double>(count) /
                     static_cast<double>(samples.size()));
  }
  return GroupedData::Create(std::move(groups), std::move(priors));
}

double DefaultPermutationTolerance(std::size_t n_min, double delta) {
  const double n = static_cast<double>(std::max<std::size_t>(n_min, 1));
  return 2.0 * std::sqrt(std::log(2.0 / delta) / (2.0 * n));
}

bool AllPermutationEqual(const GroupedData& g, double tol) {
  const auto& groups = g.groups();
  for (std::size_t i = 0; i < groups.size(); ++i) {
    for (std::size_t j = i + 1; j < groups.size(); ++j) {
      if (!CheckPermutationEqual(groups[i].dist, groups[j].dist, tol)) {
        return false;
      }
    }
  }
  return true;
}

absl::StatusOr<ErasureFunction> BuildDeterministicPef(const GroupedData& g,
                                                      double tol) {
  if (!AllPermutationEqual(g, tol)) {
    return absl::FailedPreconditionError(absl::StrFormat(
        "group distributions are not permutations of each other within "
        "tolerance %g",
        tol));
  }
  const std::size_t size = g.groups().front().dist.size();
  std::vector<std::vector<std::size_t>> orders;
  std::vector<std::vector<double>> profiles;
  for (const ConceptGroup& group : g.groups()) {
    orders.push_back(DescendingOrder(group.dist));
    std::vector<double> profile;
    for (std::size_t k : orders.back()) profile.push_back(group.dist.probs()[k]);
    profiles.push_back(std::move(profile));
  }
  std::vector<double> shared = profiles.front();
  const bool identical =
      std::all_of(profiles.begin(), profiles.end(),
                  [&](const std::vector<double>& p) { return p == shared; });
  if (!identical) {
    std::fill(shared.begin(), shared.end(), 0.0);
    double weight = 0;
    for (std::size_t i = 0; i < profiles.size(); ++i) {
      weight += g.priors()[i];
      for (std::size_t k = 0; k < size; ++k) {
        shared[k] += g.priors()[i] * profiles[i][k];
      }
    }
    for (double& v : shared) v /= weight;
  }

  std::vector<Symbol> output_support = FreshSymbols(g, size);
  absl::StatusOr<Categorical> q = Categorical::Create(output_support, shared);
  if (!q.ok()) return q.status();
  DeterministicErasure f{.output_support = std::move(output_support),
                         .q = *std::move(q),
                         .groups = {}};
  for (std::size_t i = 0; i < g.num_groups(); ++i) {
    const Categorical& dist = g.groups()[i].dist;
    std::vector<std::pair<Symbol, Symbol>> pairs;
    for (std::size_t k = 0; k < size; ++k) {
      pairs.emplace_back(dist.support()[orders[i][k]], f.output_support[k]);
    }
    absl::StatusOr<Permutation> map = Permutation::Create(std::move(pairs));
    if (!map.ok()) return map.status();
    f.groups.push_back(GroupPermutation{g.groups()[i].concept_id, *std::move(map)});
  }
  return ErasureFunction(std::move(f));
}

absl::StatusOr<ErasureFunction> BuildStochasticPef(const GroupedData& g,
                                                   const QCandidate& q,
                                                   HminMethod method) {
  StochasticErasure f{.q = q.dist, .groups = {}};
  for (const ConceptGroup& group : g.groups()) {
    absl::StatusOr<Coupling> coupling =
        MinEntropyCoupling(group.dist, q.dist, method);
    if (!coupling.ok()) return coupling.status();
    absl::StatusOr<std::vector<Categorical>> rows =
        ConditionalRows(*coupling, group.dist);
    if (!rows.ok()) return rows.status();
    GroupConditionals conditionals{group.concept_id, {}};
    for (std::size_t k = 0; k < rows->size(); ++k) {
      conditionals.rows.push_back(
          ConditionalRow{coupling->row_support()[k], std::move((*rows)[k])});
    }
    f.groups.push_back(std::move(conditionals));
  }
  return ErasureFunction(std::move(f));
}

absl::StatusOr<PipelineResult> RunAlgorithm1(const GroupedData& g,
                                             const PipelineOptions& options) {
  if (g.num_groups() < 2) {
    return absl::FailedPreconditionError(
        "concept erasure needs at least two concepts");
  }
  if (!g.disjoint_supports()) {
    return absl::FailedPreconditionError("group supports must be disjoint");
  }
  const double tol = options.tol.value_or(kExactTolerance);
  if (!(tol >= 0)) {
    return absl::InvalidArgumentError("tolerance must be non-negative");
  }

  if (AllPermutationEqual(g, tol)) {
    absl::StatusOr<ErasureFunction> f = BuildDeterministicPef(g, tol);
    if (!f.ok()) return f.status();
    absl::StatusOr<ErasureAnalysis> analysis = AnalyzeErasure(g, *f);
    if (!analysis.ok()) return analysis.status();
    ErasureReport report{
        .branch = Branch::kEqual,
        .i_za_analytic = analysis->i_za,
        .i_zx_analytic = analysis->i_zx,
        .h_x_given_a = analysis->h_x_given_a,
        .j_value = -analysis->h_x_given_za,
        .tolerance = tol,
        .bo_j_value = std::nullopt,
        .q_source = QSource::kStationary,
    };
    return PipelineResult{*std::move(f), report, g, std::nullopt};
  }

  const int out_size = options.out_size.value_or(DefaultOutSize(g));
  absl::StatusOr<QSelection> selection =
      SelectQ(g, out_size, options.bo, options.use_bo, options.hmin);
  if (!selection.ok()) return selection.status();
  absl::StatusOr<ErasureFunction> f =
      BuildStochasticPef(g, selection->selected, options.hmin);
  if (!f.ok()) return f.status();
  absl::StatusOr<ErasureAnalysis> analysis = AnalyzeErasure(g, *f);
  if (!analysis.ok()) return analysis.status();
  ErasureReport report{
      .branch = Branch::kUnequal,
      .i_za_analytic = analysis->i_za,
      .i_zx_analytic = analysis->i_zx,
      .h_x_given_a = analysis->h_x_given_a,
      .j_value = selection->selected.j_value,
      .tolerance = tol,
      .bo_j_value = selection->bo
                        ? std::optional<double>(selection->bo->best.j_value)
                        : std::nullopt,
      .q_source = selection->selected.source,
  };
  return PipelineResult{*std::move(f), report, g, *std::move(selection)};
}

absl::StatusOr<PipelineResult> RunAlgorithm1(std::span<const Sample> samples,
                                             const PipelineOptions& options) {
  std::map<ConceptId, std::size_t> per_concept;
  for (const Sample& s : samples) ++per_concept[s.concept_id];
  if (per_concept.size() < 2) {
    return absl::FailedPreconditionError(
        "concept erasure needs samples from at least two concepts");
  }
  absl::StatusOr<GroupedData> g = EstimateGroupedData(samples);
  if (!g.ok()) return g.status();
  std::size_t n_min = samples.size();
  for (const auto& [concept_id, count] : per_concept) {
    n_min = std::min(n_min, count);
  }
  PipelineOptions resolved = options;
  if (!resolved.tol) resolved.tol = DefaultPermutationTolerance(n_min);
  return RunAlgorithm1(*g, resolved);
}

}  // namespace pefkit
