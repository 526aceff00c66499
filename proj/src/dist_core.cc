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

#include "pefkit/dist_core.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <Eigen/Dense>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"

namespace pefkit {
namespace {

// Checks that `values` is a probability vector up to the renormalization
// limit. Returns whether it was rescaled.
absl::StatusOr<bool> NormalizeInPlace(std::vector<double>& values,
                                      const char* what) {
  double sum = 0;
  for (double v : values) {
    if (!std::isfinite(v) || v < 0) {
      return absl::InvalidArgumentError(
          absl::StrFormat("%s must be finite and non-negative, got %g", what,
                          v));
    }
    sum += v;
  }
  const double deviation = std::abs(sum - 1.0);
  if (deviation <= kNormalizationTolerance) return false;
  if (deviation > kRenormalizationLimit) {
    return absl::InvalidArgumentError(
        absl::StrFormat("%s sum to %.12g, not 1", what, sum));
  }
  for (double& v : values) v /= sum;
  return true;
}

}  // namespace

absl::StatusOr<Categorical> Categorical::Create(std::vector<Symbol> support,
                                                std::vector<double> probs) {
  if (support.size() != probs.size()) {
    return absl::InvalidArgumentError(
        absl::StrFormat("support has %d symbols but %d probabilities",
                        support.size(), probs.size()));
  }
  if (support.empty()) {
    return absl::InvalidArgumentError("empty distribution");
  }
  std::unordered_set<std::int64_t> seen;
  for (Symbol s : support) {
    if (s.id < 0) {
      return absl::InvalidArgumentError(
          absl::StrCat("negative symbol id ", s.id));
    }
    if (!seen.insert(s.id).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("duplicate symbol id ", s.id));
    }
  }
  absl::StatusOr<bool> renormalized = NormalizeInPlace(probs, "probabilities");
  if (!renormalized.ok()) return renormalized.status();

  std::vector<Symbol> kept_support;
  std::vector<double> kept_probs;
  kept_support.reserve(support.size());
  kept_probs.reserve(probs.size());
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (probs[i] > 0) {
      kept_support.push_back(support[i]);
      kept_probs.push_back(probs[i]);
    }
  }
  return Categorical(std::move(kept_support), std::move(kept_probs),
                     *renormalized);
}

absl::StatusOr<Categorical> Categorical::FromIds(
    std::span<const std::int64_t> ids, std::span<const double> probs) {
  std::vector<Symbol> support;
  support.reserve(ids.size());
  for (std::int64_t id : ids) support.push_back(Symbol{id});
  return Create(std::move(support),
                std::vector<double>(probs.begin(), probs.end()));
}

absl::StatusOr<Categorical> Categorical::Uniform(std::vector<Symbol> support) {
  if (support.empty()) return absl::InvalidArgumentError("empty support");
  std::vector<double> probs(support.size(),
                            1.0 / static_cast<double>(support.size()));
  return Create(std::move(support), std::move(probs));
}

std::optional<std::size_t> Categorical::IndexOf(Symbol s) const {
  auto it = std::find(support_.begin(), support_.end(), s);
  if (it == support_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - support_.begin());
}

double Categorical::ProbabilityOf(Symbol s) const {
  std::optional<std::size_t> i = IndexOf(s);
  return i ? probs_[*i] : 0.0;
}

std::vector<std::int64_t> Categorical::ids() const {
  std::vector<std::int64_t> out;
  out.reserve(support_.size());
  for (Symbol s : support_) out.push_back(s.id);
  return out;
}

double Entropy(std::span<const double> probs) {
  double h = 0;
  for (double p : probs) {
    if (p > 0) h -= p * std::log2(p);
  }
  return h;
}

double Entropy(const Categorical& p) { return Entropy(p.probs()); }

std::vector<std::size_t> DescendingOrder(const Categorical& p) {
  std::vector<std::size_t> order(p.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto& probs = p.probs();
  const auto& support = p.support();
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (probs[a] != probs[b]) return probs[a] > probs[b];
    return support[a].id < support[b].id;
  });
  return order;
}

absl::StatusOr<GroupedData> GroupedData::Create(
    std::vector<ConceptGroup> groups, std::vector<double> priors,
    AssumptionCheck check) {
  if (groups.empty()) return absl::InvalidArgumentError("no concept groups");
  if (groups.size() != priors.size()) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "%d groups but %d priors", groups.size(), priors.size()));
  }
  std::unordered_set<ConceptId> concepts;
  for (const ConceptGroup& group : groups) {
    if (!concepts.insert(group.concept_id).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("duplicate concept id ", group.concept_id));
    }
  }
  absl::StatusOr<bool> renormalized = NormalizeInPlace(priors, "priors");
  if (!renormalized.ok()) return renormalized.status();

  GroupedData g;
  std::unordered_map<std::int64_t, ConceptId> owner;
  std::optional<std::int64_t> shared_symbol;
  for (const ConceptGroup& group : groups) {
    for (Symbol s : group.dist.support()) {
      auto [it, inserted] = owner.emplace(s.id, group.concept_id);
      if (!inserted && !shared_symbol) shared_symbol = s.id;
    }
  }
  g.support_size_ = owner.size();
  g.disjoint_ = !shared_symbol.has_value();
  g.groups_ = std::move(groups);
  g.priors_ = std::move(priors);
  g.priors_renormalized_ = *renormalized;

  if (check == AssumptionCheck::kEnforce) {
    if (shared_symbol) {
      return absl::FailedPreconditionError(absl::StrCat(
          "group supports must be disjoint; symbol ", *shared_symbol,
          " appears in more than one group"));
    }
    if (!g.support_exceeds_concepts()) {
      return absl::FailedPreconditionError(absl::StrFormat(
          "representation support size %d must exceed the number of "
          "concepts %d",
          g.support_size_, g.groups_.size()));
    }
  }
  return g;
}

Categorical GroupedData::MarginalX() const {
  std::map<std::int64_t, double> mass;
  for (std::size_t i = 0; i < groups_.size(); ++i) {
    const Categorical& dist = groups_[i].dist;
    for (std::size_t k = 0; k < dist.size(); ++k) {
      mass[dist.support()[k].id] += priors_[i] * dist.probs()[k];
    }
  }
  std::vector<Symbol> support;
  std::vector<double> probs;
  for (const auto& [id, p] : mass) {
    support.push_back(Symbol{id});
    probs.push_back(p);
  }
  // The inputs are validated distributions, so this cannot fail.
  return *Categorical::Create(std::move(support), std::move(probs));
}

Categorical GroupedData::MarginalA() const {
  std::vector<Symbol> support;
  for (const ConceptGroup& group : groups_) {
    support.push_back(Symbol{group.concept_id});
  }
  return *Categorical::Create(std::move(support), priors_);
}

std::int64_t GroupedData::max_symbol_id() const {
  std::int64_t max_id = -1;
  for (const ConceptGroup& group : groups_) {
    for (Symbol s : group.dist.support()) max_id = std::max(max_id, s.id);
  }
  return max_id;
}

std::vector<Symbol> FreshSymbols(const GroupedData& g, std::size_t n) {
  std::vector<Symbol> out;
  out.reserve(n);
  const std::int64_t base = g.max_symbol_id() + 1;
  for (std::size_t k = 0; k < n; ++k) {
    out.push_back(Symbol{base + static_cast<std::int64_t>(k)});
  }
  return out;
}

double ConditionalEntropyXGivenA(const GroupedData& g) {
  double h = 0;
  for (std::size_t i = 0; i < g.num_groups(); ++i) {
    if (g.priors()[i] > 0) h += g.priors()[i] * Entropy(g.groups()[i].dist);
  }
  return h;
}

double MutualInformationAX(const GroupedData& g) {
  // I(A;X) = H(X) - H(X|A); identical to H(A) - H(A|X).
  const double i = Entropy(g.MarginalX()) - ConditionalEntropyXGivenA(g);
  return std::max(0.0, i);
}

double FunnelCurve::LowerAt(double u) const {
  return std::max(0.0, u - h_x_given_a);
}

// Never below LowerAt: h_x, h_x_given_a and i_ax are summed separately, so
// the two lines can cross by a rounding error where they meet.
double FunnelCurve::UpperAt(double u) const {
  return std::max(h_x > 0 ? u * i_ax / h_x : 0.0, LowerAt(u));
}

absl::StatusOr<FunnelCurve> FunnelBounds(const GroupedData& g, int n_points) {
  if (n_points < 2) {
    return absl::InvalidArgumentError(
        absl::StrCat("funnel grid needs at least 2 points, got ", n_points));
  }
  FunnelCurve curve;
  curve.h_x_given_a = ConditionalEntropyXGivenA(g);
  curve.h_x = Entropy(g.MarginalX());
  curve.i_ax = MutualInformationAX(g);
  curve.u_grid.resize(n_points);
  curve.lower.resize(n_points);
  curve.upper.resize(n_points);
  for (int k = 0; k < n_points; ++k) {
    const double u = k == n_points - 1
                         ? curve.h_x
                         : curve.h_x * static_cast<double>(k) / (n_points - 1);
    curve.u_grid[k] = u;
    curve.lower[k] = curve.LowerAt(u);
    curve.upper[k] = curve.UpperAt(u);
  }
  return curve;
}

absl::StatusOr<Permutation> Permutation::Create(
    std::vector<std::pair<Symbol, Symbol>> pairs) {
  std::unordered_set<std::int64_t> sources;
  std::unordered_set<std::int64_t> targets;
  for (const auto& [from, to] : pairs) {
    if (!sources.insert(from.id).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("symbol ", from.id, " mapped twice"));
    }
    if (!targets.insert(to.id).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("target symbol ", to.id, " hit twice"));
    }
  }
  std::sort(pairs.begin(), pairs.end());
  return Permutation(std::move(pairs));
}

std::optional<Symbol> Permutation::Apply(Symbol source) const {
  auto it = std::lower_bound(
      pairs_.begin(), pairs_.end(), source,
      [](const std::pair<Symbol, Symbol>& p, Symbol s) { return p.first < s; });
  if (it == pairs_.end() || it->first != source) return std::nullopt;
  return it->second;
}

Permutation Permutation::Inverse() const {
  std::vector<std::pair<Symbol, Symbol>> flipped;
  flipped.reserve(pairs_.size());
  for (const auto& [from, to] : pairs_) flipped.emplace_back(to, from);
  std::sort(flipped.begin(), flipped.end());
  return Permutation(std::move(flipped));
}

absl::StatusOr<Permutation> Permutation::Then(const Permutation& next) const {
  if (next.size() != size()) {
    return absl::InvalidArgumentError("composed permutations differ in size");
  }
  std::vector<std::pair<Symbol, Symbol>> composed;
  composed.reserve(pairs_.size());
  for (const auto& [from, mid] : pairs_) {
    std::optional<Symbol> to = next.Apply(mid);
    if (!to) {
      return absl::InvalidArgumentError(
          absl::StrCat("symbol ", mid.id, " outside the domain of next"));
    }
    composed.emplace_back(from, *to);
  }
  return Permutation(std::move(composed));
}

std::optional<Permutation> CheckPermutationEqual(const Categorical& p,
                                                 const Categorical& q,
                                                 double tol) {
  if (p.size() != q.size()) return std::nullopt;
  const std::vector<std::size_t> p_order = DescendingOrder(p);
  const std::vector<std::size_t> q_order = DescendingOrder(q);
  std::vector<std::pair<Symbol, Symbol>> pairs;
  pairs.reserve(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) {
    const std::size_t i = p_order[k];
    const std::size_t j = q_order[k];
    if (std::abs(p.probs()[i] - q.probs()[j]) > tol) return std::nullopt;
    pairs.emplace_back(p.support()[i], q.support()[j]);
  }
  // Supports have unique ids, so this is a bijection.
  return *Permutation::Create(std::move(pairs));
}

double PicSpectrum::MaximalCorrelationSquared() const {
  return pics.empty() ? 0.0 : pics.front();
}

double PicSpectrum::ChiSquared() const {
  return std::accumulate(pics.begin(), pics.end(), 0.0);
}

absl::StatusOr<PicSpectrum> ComputePicSpectrum(const GroupedData& g) {
  for (std::size_t i = 0; i < g.num_groups(); ++i) {
    if (!(g.priors()[i] > 0)) {
      return absl::InvalidArgumentError(absl::StrCat(
          "concept ", g.groups()[i].concept_id,
          " has zero prior; the joint matrix has an empty column"));
    }
  }
  const Categorical marginal_x = g.MarginalX();
  std::unordered_map<std::int64_t, Eigen::Index> row_of;
  for (std::size_t r = 0; r < marginal_x.size(); ++r) {
    row_of[marginal_x.support()[r].id] = static_cast<Eigen::Index>(r);
  }
  const Eigen::Index m = static_cast<Eigen::Index>(marginal_x.size());
  const Eigen::Index n = static_cast<Eigen::Index>(g.num_groups());

  Eigen::MatrixXd normalized = Eigen::MatrixXd::Zero(m, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    const double prior = g.priors()[a];
    const Categorical& dist = g.groups()[a].dist;
    for (std::size_t k = 0; k < dist.size(); ++k) {
      const Eigen::Index x = row_of.at(dist.support()[k].id);
      const double joint = prior * dist.probs()[k];
      normalized(x, a) =
          joint / std::sqrt(marginal_x.probs()[x] * prior);
    }
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(normalized);
  const Eigen::VectorXd& sv = svd.singularValues();

  PicSpectrum spectrum;
  spectrum.assumptions_violated =
      !g.disjoint_supports() || !g.support_exceeds_concepts();
  spectrum.singular_values.assign(sv.data(), sv.data() + sv.size());
  const std::size_t d = static_cast<std::size_t>(std::min(m, n)) - 1;
  for (std::size_t k = 1; k <= d; ++k) {
    const double s = k < spectrum.singular_values.size()
                         ? spectrum.singular_values[k]
                         : 0.0;
    spectrum.pics.push_back(std::clamp(s * s, 0.0, 1.0));
  }
  spectrum.lambda_d = spectrum.pics.empty() ? 0.0 : spectrum.pics.back();
  return spectrum;
}

absl::StatusOr<Feasibility> ErasureFeasible(const GroupedData& g) {
  std::vector<ConceptGroup> groups;
  std::vector<double> priors;
  for (std::size_t i = 0; i < g.num_groups(); ++i) {
    if (g.priors()[i] > 0) {
      groups.push_back(g.groups()[i]);
      priors.push_back(g.priors()[i]);
    }
  }
  absl::StatusOr<GroupedData> effective = GroupedData::Create(
      std::move(groups), std::move(priors), AssumptionCheck::kDiagnostic);
  if (!effective.ok()) return effective.status();
  absl::StatusOr<PicSpectrum> spectrum = ComputePicSpectrum(*effective);
  if (!spectrum.ok()) return spectrum.status();

  constexpr double kZeroPic = 1e-9;
  const std::size_t x_size = effective->support_size();
  const std::size_t a_size = effective->num_groups();
  const bool pic_clause = spectrum->lambda_d <= kZeroPic;
  const bool size_clause = x_size > a_size;

  Feasibility out;
  out.feasible = pic_clause || size_clause;
  std::vector<std::string> reasons;
  if (pic_clause) {
    reasons.push_back(absl::StrFormat(
        "smallest principal inertia component is zero (lambda_d = %.3g)",
        spectrum->lambda_d));
  }
  if (size_clause) {
    reasons.push_back(absl::StrFormat(
        "support size |X| = %d exceeds concept count |A| = %d", x_size,
        a_size));
  }
  if (reasons.empty()) {
    out.reason = absl::StrFormat(
        "infeasible: |X| = %d <= |A| = %d and lambda_d = %.6g > 0", x_size,
        a_size, spectrum->lambda_d);
  } else {
    out.reason = reasons.front();
    for (std::size_t k = 1; k < reasons.size(); ++k) {
      absl::StrAppend(&out.reason, "; ", reasons[k]);
    }
  }
  return out;
}

}  // namespace pefkit
