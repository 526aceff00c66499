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

// Perfect erasure functions.
//
// Given concept groups with disjoint supports, an erasure function maps every
// representation x to an output z so that P(Z | A = a_i) is the same
// distribution Q for every concept, i.e. I(Z;A) = 0.
//
//  * When the groups are permutations of one another, each group is mapped
//    bijectively onto Q. This retains the maximum utility I(Z;X) = H(X|A).
//  * Otherwise each group is coupled to a chosen Q with a minimum entropy
//    coupling and z is drawn from the coupling's conditional P(Z | X = x).
//    Utility is H(X|A) + J(Q) < H(X|A).
//
// The function only looks at x when applied; the concept label is never read.

#ifndef PEFKIT_ERASURE_H_
#define PEFKIT_ERASURE_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "absl/status/statusor.h"
#include "pefkit/dist_core.h"
#include "pefkit/qopt.h"

namespace pefkit {

struct Sample {
  Symbol x;
  ConceptId concept_id = 0;
};

struct ErasedSample {
  Symbol z;
  ConceptId concept_id = 0;

  friend bool operator==(const ErasedSample&, const ErasedSample&) = default;
};

struct GroupPermutation {
  ConceptId concept_id = 0;
  Permutation map;
};

struct DeterministicErasure {
  std::vector<Symbol> output_support;
  Categorical q;
  std::vector<GroupPermutation> groups;
};

struct ConditionalRow {
  Symbol x;
  Categorical z_given_x;
};

struct GroupConditionals {
  ConceptId concept_id = 0;
  std::vector<ConditionalRow> rows;
};

struct StochasticErasure {
  Categorical q;
  std::vector<GroupConditionals> groups;
};

class ErasureFunction {
 public:
  explicit ErasureFunction(DeterministicErasure f);
  explicit ErasureFunction(StochasticErasure f);

  bool is_deterministic() const {
    return std::holds_alternative<DeterministicErasure>(variant_);
  }
  const DeterministicErasure& deterministic() const {
    return std::get<DeterministicErasure>(variant_);
  }
  const StochasticErasure& stochastic() const {
    return std::get<StochasticErasure>(variant_);
  }
  const Categorical& q() const;

  // P(Z | X = x), or nullopt for a symbol outside every group.
  std::optional<Categorical> ConditionalOf(Symbol x) const;

  // Maps every sample. Stochastic draws use inverse-CDF sampling with a
  // uniform keyed by (seed, sample index), so the output depends only on
  // (function, samples, seed). Fails on symbols the function does not cover.
  absl::StatusOr<std::vector<ErasedSample>> Apply(
      std::span<const Sample> samples, std::uint64_t seed) const;

 private:
  void BuildIndex();

  std::variant<DeterministicErasure, StochasticErasure> variant_;
  // x -> (group, row) for lookups.
  std::unordered_map<std::int64_t, std::pair<std::size_t, std::size_t>> index_;
};

enum class Branch { kEqual, kUnequal };

std::string_view BranchName(Branch branch);

// Exact information quantities of an erasure function applied to known
// group distributions.
struct ErasureAnalysis {
  double i_za = 0;
  double i_zx = 0;
  double h_x_given_a = 0;
  double h_z = 0;
  // H(X | Z, A); zero iff every group map is invertible.
  double h_x_given_za = 0;
  // P(Z | A = a_i) per group, over the output support.
  std::vector<Categorical> induced;
};

absl::StatusOr<ErasureAnalysis> AnalyzeErasure(const GroupedData& g,
                                               const ErasureFunction& f);

struct ErasureReport {
  Branch branch = Branch::kEqual;
  double i_za_analytic = 0;
  double i_zx_analytic = 0;
  double h_x_given_a = 0;
  double j_value = 0;
  double tolerance = 0;
  // Set when BO ran: J of its best point, whether or not it was selected.
  std::optional<double> bo_j_value;
  QSource q_source = QSource::kStationary;
};

absl::StatusOr<Categorical> EstimateDistribution(
    std::span<const Sample> samples, ConceptId concept_id);

// Empirical groups (sorted by concept id) and priors. Fails with
// FailedPrecondition naming the symbol if two concepts share a symbol.
absl::StatusOr<GroupedData> EstimateGroupedData(
    std::span<const Sample> samples);

// 2 sqrt(ln(2/delta) / (2 n_min)): twice the DKW deviation bound for the
// smallest group.
double DefaultPermutationTolerance(std::size_t n_min, double delta = 0.01);

// True when every pair of groups is permutation-equal within tol.
bool AllPermutationEqual(const GroupedData& g, double tol);

// Bijective erasure onto a fresh output support of size |X_1|. Q is the
// common sorted profile (the prior-weighted mean when the profiles differ
// within tol); group i sends its k-th largest symbol to the k-th output.
absl::StatusOr<ErasureFunction> BuildDeterministicPef(const GroupedData& g,
                                                      double tol);

// Couples each group to q.dist with a minimum entropy coupling and stores the
// row conditionals. Use the same method that scored q.
absl::StatusOr<ErasureFunction> BuildStochasticPef(
    const GroupedData& g, const QCandidate& q,
    HminMethod method = HminMethod::kGreedy);

struct PipelineOptions {
  // Permutation-equality tolerance. Unset: DefaultPermutationTolerance for
  // sample input, kExactTolerance for known distributions.
  std::optional<double> tol;
  BoConfig bo;
  bool use_bo = false;
  // Output support size for the unequal branch; unset means DefaultOutSize.
  std::optional<int> out_size;
  HminMethod hmin = HminMethod::kGreedy;
};

inline constexpr double kExactTolerance = 1e-9;

struct PipelineResult {
  ErasureFunction function;
  ErasureReport report;
  GroupedData distributions;
  std::optional<QSelection> selection;
};

// Estimates the group distributions from samples, then runs the pipeline.
absl::StatusOr<PipelineResult> RunAlgorithm1(std::span<const Sample> samples,
                                             const PipelineOptions& options);
// Runs the pipeline on known group distributions.
absl::StatusOr<PipelineResult> RunAlgorithm1(const GroupedData& g,
                                             const PipelineOptions& options);

}  // namespace pefkit

#endif  // PEFKIT_ERASURE_H_
