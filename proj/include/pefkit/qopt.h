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

// Choosing the shared output distribution Q when the concept groups are not
// permutations of each other.
//
// Every group is coupled to Q with a minimum entropy coupling, which yields
// the utility I(Z;X) = H(X|A) + J(Q) where
//
//   J(Q) = H(Q) - sum_i p(a_i) H_min(P_i, Q)  <=  0.
//
// Candidates for Q are the group distributions themselves plus the best point
// found by GP-UCB Bayesian optimization over the simplex.

#ifndef PEFKIT_QOPT_H_
#define PEFKIT_QOPT_H_

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "pefkit/coupling.h"
#include "pefkit/dist_core.h"

namespace pefkit {

enum class QSource { kStationary, kBayesOpt, kUser };

std::string_view QSourceName(QSource source);

struct QCandidate {
  Categorical dist;
  double j_value = 0;
  QSource source = QSource::kUser;
};

struct BoConfig {
  int budget = 100;
  double kappa = 2.5;
  int n_acq_candidates = 1024;
  std::uint64_t seed = 0;
  // Squared-exponential lengthscale; unset means the median pairwise
  // distance between observed points, recomputed every round.
  std::optional<double> kernel_lengthscale;
  // Symmetric-Dirichlet draws added to the initial design.
  int n_initial_random = 5;
  double dirichlet_alpha = 1.0;
};

absl::Status ValidateBoConfig(const BoConfig& cfg);

// Zero-prior groups are skipped. With kOracle every group/Q pair must fit the
// oracle's cell limit.
absl::StatusOr<double> ObjectiveJ(const Categorical& q, const GroupedData& g,
                                  HminMethod method = HminMethod::kGreedy);

// Default output support size: the largest group support.
int DefaultOutSize(const GroupedData& g);

// The output symbols used for every candidate: FreshSymbols(g, out_size).
std::vector<Symbol> OutputSupport(const GroupedData& g, int out_size);

// Each P_i, sorted by decreasing probability, placed on the first |X_i|
// output symbols and scored with ObjectiveJ. Requires out_size >= max |X_i|.
absl::StatusOr<std::vector<QCandidate>> ScanStationary(
    const GroupedData& g, int out_size,
    HminMethod method = HminMethod::kGreedy);

struct BoResult {
  QCandidate best;
  // Unconstrained parameters of `best` (centered log-probabilities).
  std::vector<double> best_parameters;
  // J of every evaluation in order, and the running maximum.
  std::vector<double> evaluations;
  std::vector<double> best_so_far;
  // Set when the GP could not be fit (all observed points coincide) and
  // the remaining budget was spent on random proposals.
  bool random_search_fallback = false;
};

// Parameters theta in R^out_size map to Q = softmax(theta) with entries below
// 1e-12 flushed to zero. The stationary candidates are always evaluated
// first, so the result is never worse than the best of them.
absl::StatusOr<BoResult> BayesOptQ(const GroupedData& g, int out_size,
                                   const BoConfig& cfg,
                                   HminMethod method = HminMethod::kGreedy);

struct QSelection {
  QCandidate selected;
  std::vector<QCandidate> stationary;
  std::optional<BoResult> bo;
};

// argmax of J over the stationary candidates and, with use_bo, the BO
// result. Ties go to the stationary candidates.
absl::StatusOr<QSelection> SelectQ(const GroupedData& g, int out_size,
                                   const BoConfig& cfg, bool use_bo,
                                   HminMethod method = HminMethod::kGreedy);

// Exposed for tests.
std::vector<double> SimplexFromParameters(std::span<const double> theta);
std::vector<double> ParametersFromSimplex(std::span<const double> q);

}  // namespace pefkit

#endif  // PEFKIT_QOPT_H_
