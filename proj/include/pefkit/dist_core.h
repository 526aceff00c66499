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

// Finite categorical distributions over symbol ids, concept-grouped data,
// information measures and the diagnostics built on them (erasure funnel
// envelope, permutation equivalence, principal inertia components).
//
// All entropies and mutual informations are reported in bits.

#ifndef PEFKIT_DIST_CORE_H_
#define PEFKIT_DIST_CORE_H_

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/statusor.h"

namespace pefkit {

// One element of a finite representation support.
struct Symbol {
  std::int64_t id = 0;

  friend auto operator<=>(const Symbol&, const Symbol&) = default;
};

using ConceptId = std::int64_t;

// Sums within this distance of 1 are accepted as-is.
inline constexpr double kNormalizationTolerance = 1e-9;
// Sums off by more than kNormalizationTolerance but at most this much are
// renormalized (and flagged); anything worse is rejected.
inline constexpr double kRenormalizationLimit = 1e-6;

// A probability distribution over an ordered finite support. Zero-mass
// entries are dropped on construction, so every stored probability is
// strictly positive.
class Categorical {
 public:
  static absl::StatusOr<Categorical> Create(std::vector<Symbol> support,
                                            std::vector<double> probs);
  static absl::StatusOr<Categorical> FromIds(std::span<const std::int64_t> ids,
                                             std::span<const double> probs);
  // Uniform over `support`; support must be non-empty with unique ids.
  static absl::StatusOr<Categorical> Uniform(std::vector<Symbol> support);

  const std::vector<Symbol>& support() const { return support_; }
  const std::vector<double>& probs() const { return probs_; }
  std::size_t size() const { return support_.size(); }

  std::optional<std::size_t> IndexOf(Symbol s) const;
  // Zero for symbols outside the support.
  double ProbabilityOf(Symbol s) const;

  // True when the input sum was off by more than kNormalizationTolerance and
  // the probabilities were rescaled.
  bool renormalized() const { return renormalized_; }

  std::vector<std::int64_t> ids() const;

 private:
  Categorical(std::vector<Symbol> support, std::vector<double> probs,
              bool renormalized)
      : support_(std::move(support)),
        probs_(std::move(probs)),
        renormalized_(renormalized) {}

  std::vector<Symbol> support_;
  std::vector<double> probs_;
  bool renormalized_ = false;
};

// Shannon entropy in bits; zero entries contribute nothing.
double Entropy(std::span<const double> probs);
double Entropy(const Categorical& p);

// Indices of `p` ordered by decreasing probability, ties by ascending id.
std::vector<std::size_t> DescendingOrder(const Categorical& p);

struct ConceptGroup {
  ConceptId concept_id = 0;
  Categorical dist;
};

// Which structural assumptions GroupedData::Create enforces.
enum class AssumptionCheck {
  // Disjoint group supports and |X| > |A| (number of groups).
  kEnforce,
  // Record violations but accept the input. Only the diagnostics
  // (PicSpectrum, ErasureFeasible) are meaningful on such data.
  kDiagnostic,
};

// Per-concept conditional distributions P(X | A = a_i) together with the
// concept priors p(a_i).
class GroupedData {
 public:
  static absl::StatusOr<GroupedData> Create(
      std::vector<ConceptGroup> groups, std::vector<double> priors,
      AssumptionCheck check = AssumptionCheck::kEnforce);

  const std::vector<ConceptGroup>& groups() const { return groups_; }
  const std::vector<double>& priors() const { return priors_; }
  std::size_t num_groups() const { return groups_.size(); }

  // |X|: number of distinct symbols across all groups.
  std::size_t support_size() const { return support_size_; }
  bool disjoint_supports() const { return disjoint_; }
  bool support_exceeds_concepts() const {
    return support_size_ > groups_.size();
  }
  bool priors_renormalized() const { return priors_renormalized_; }

  // P(X) = sum_i p(a_i) P_i, over symbols sorted by id.
  Categorical MarginalX() const;
  // P(A), over the concept ids (as symbols) of groups with positive prior.
  Categorical MarginalA() const;

  std::int64_t max_symbol_id() const;

 private:
  GroupedData() = default;

  std::vector<ConceptGroup> groups_;
  std::vector<double> priors_;
  std::size_t support_size_ = 0;
  bool disjoint_ = true;
  bool priors_renormalized_ = false;
};

// `n` fresh symbols whose ids exceed every id used by `g`.
std::vector<Symbol> FreshSymbols(const GroupedData& g, std::size_t n);

// H(X|A) = sum_i p(a_i) H(P_i).
double ConditionalEntropyXGivenA(const GroupedData& g);
// I(A;X) = H(A) - H(A|X). Equals H(A) when supports are disjoint.
double MutualInformationAX(const GroupedData& g);

// Bounds on the erasure funnel eps(u) = inf{I(Z;A) : I(Z;X) >= u}:
//   max{0, u - H(X|A)} <= eps(u) <= u I(A;X) / H(X),  0 <= u <= H(X).
struct FunnelCurve {
  std::vector<double> u_grid;
  std::vector<double> lower;
  std::vector<double> upper;
  double h_x_given_a = 0;
  double h_x = 0;
  double i_ax = 0;

  double LowerAt(double u) const;
  double UpperAt(double u) const;
};

absl::StatusOr<FunnelCurve> FunnelBounds(const GroupedData& g,
                                         int n_points);

// A bijection between the supports of two distributions.
class Permutation {
 public:
  Permutation() = default;
  // `pairs` are (source, target); both sides must be free of duplicates.
  static absl::StatusOr<Permutation> Create(
      std::vector<std::pair<Symbol, Symbol>> pairs);

  std::optional<Symbol> Apply(Symbol source) const;
  Permutation Inverse() const;
  // x -> next(this(x)). Fails unless this permutation's range equals the
  // domain of `next`.
  absl::StatusOr<Permutation> Then(const Permutation& next) const;

  // Sorted by source id.
  const std::vector<std::pair<Symbol, Symbol>>& pairs() const {
    return pairs_;
  }
  std::size_t size() const { return pairs_.size(); }

 private:
  explicit Permutation(std::vector<std::pair<Symbol, Symbol>> pairs)
      : pairs_(std::move(pairs)) {}

  std::vector<std::pair<Symbol, Symbol>> pairs_;
};

// Returns sigma with p(x) = q(sigma(x)) (within `tol` after sorting both
// probability vectors), or nullopt. sigma pairs the k-th largest symbol of p
// with the k-th largest of q; ties are ordered by ascending id.
std::optional<Permutation> CheckPermutationEqual(const Categorical& p,
                                                 const Categorical& q,
                                                 double tol);

struct PicSpectrum {
  // Singular values of D_X^{-1/2} P D_A^{-1/2}, descending.
  std::vector<double> singular_values;
  // lambda_k = sigma_{k+1}^2, k = 1..d with d = min(|X|, |A|) - 1.
  std::vector<double> pics;
  double lambda_d = 0;
  // Set when the input violates disjointness or |X| > |A|.
  bool assumptions_violated = false;

  double MaximalCorrelationSquared() const;
  double ChiSquared() const;
};

// Requires strictly positive priors.
absl::StatusOr<PicSpectrum> ComputePicSpectrum(const GroupedData& g);

struct Feasibility {
  bool feasible = false;
  std::string reason;
};

// Perfect erasure (I(Z;A) = 0 with positive utility) is achievable when the
// smallest principal inertia component vanishes or |X| > |A|. Groups with
// zero prior are ignored.
absl::StatusOr<Feasibility> ErasureFeasible(const GroupedData& g);

}  // namespace pefkit

template <>
struct std::hash<pefkit::Symbol> {
  std::size_t operator()(const pefkit::Symbol& s) const noexcept {
    return std::hash<std::int64_t>()(s.id);
  }
};

#endif  // PEFKIT_DIST_CORE_H_
