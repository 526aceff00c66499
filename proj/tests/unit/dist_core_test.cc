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

#include <cmath>
#include <random>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace pefkit {
namespace {

using ::pefkit::testing::Cat;
using ::pefkit::testing::Groups;
using ::pefkit::testing::RandomSimplex;
using ::testing::HasSubstr;

// Reference values computed independently in double precision.
constexpr double kH532 = 1.4854752972273344;       // H(0.5, 0.3, 0.2)
constexpr double kHxa = 1.7427376486136672;        // (kH532 + 2) / 2
constexpr double kBinary09 = 0.4689955935892812;   // H(0.9, 0.1)

TEST(EntropyTest, KnownValues) {
  EXPECT_NEAR(Entropy(Cat({0.25, 0.25, 0.25, 0.25})), 2.0, 1e-12);
  EXPECT_EQ(Entropy(Cat({1.0})), 0.0);
  EXPECT_NEAR(Entropy(Cat({0.5, 0.3, 0.2})), kH532, 1e-12);
}

TEST(EntropyTest, ZeroEntriesContributeNothing) {
  const std::vector<double> p = {0.5, 0.0, 0.5};
  EXPECT_NEAR(Entropy(p), 1.0, 1e-15);
}

TEST(EntropyTest, BoundedByLogSupportOnRandomInputs) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = 1 + trial % 12;
    const Categorical p = Cat(RandomSimplex(k, rng));
    const double h = Entropy(p);
    EXPECT_GE(h, 0.0);
    EXPECT_LE(h, std::log2(static_cast<double>(p.size())) + 1e-12);
  }
}

TEST(CategoricalTest, TrimsZeroMass) {
  const Categorical p = Cat({4, 7, 9}, {0.5, 0.0, 0.5});
  ASSERT_EQ(p.size(), 2u);
  EXPECT_EQ(p.support()[1].id, 9);
  EXPECT_EQ(p.ProbabilityOf(Symbol{7}), 0.0);
}

TEST(CategoricalTest, RejectsInvalidInput) {
  const std::vector<std::int64_t> dup = {1, 1};
  const std::vector<double> half = {0.5, 0.5};
  EXPECT_EQ(Categorical::FromIds(dup, half).status().code(),
            absl::StatusCode::kInvalidArgument);
  const std::vector<std::int64_t> ids = {0, 1};
  const std::vector<double> negative = {1.5, -0.5};
  EXPECT_FALSE(Categorical::FromIds(ids, negative).ok());
  const std::vector<double> short_sum = {0.5, 0.4};
  EXPECT_FALSE(Categorical::FromIds(ids, short_sum).ok());
  const std::vector<std::int64_t> negative_id = {-1, 0};
  EXPECT_FALSE(Categorical::FromIds(negative_id, half).ok());
}

TEST(CategoricalTest, RenormalizesSmallDrift) {
  const std::vector<std::int64_t> ids = {0, 1};
  const std::vector<double> exact = {0.5, 0.5 + 1e-10};
  absl::StatusOr<Categorical> a = Categorical::FromIds(ids, exact);
  ASSERT_TRUE(a.ok());
  EXPECT_FALSE(a->renormalized());

  const std::vector<double> drift = {0.5, 0.5 + 5e-7};
  absl::StatusOr<Categorical> b = Categorical::FromIds(ids, drift);
  ASSERT_TRUE(b.ok());
  EXPECT_TRUE(b->renormalized());
  EXPECT_NEAR(b->probs()[0] + b->probs()[1], 1.0, 1e-15);
}

TEST(GroupedDataTest, ConditionalEntropyExamples) {
  EXPECT_NEAR(ConditionalEntropyXGivenA(
                  Groups({{0.25, 0.25, 0.25, 0.25}, {0.25, 0.25, 0.25, 0.25}})),
              2.0, 1e-12);
  EXPECT_NEAR(ConditionalEntropyXGivenA(
                  Groups({{0.5, 0.5}, {0.2, 0.3, 0.5}}, {1.0, 0.0})),
              1.0, 1e-12);
  EXPECT_NEAR(ConditionalEntropyXGivenA(
                  Groups({{0.5, 0.3, 0.2}, {0.25, 0.25, 0.25, 0.25}})),
              kHxa, 1e-12);
}

TEST(GroupedDataTest, MutualInformationExamples) {
  EXPECT_NEAR(MutualInformationAX(Groups({{0.5, 0.5}, {0.5, 0.5}})), 1.0,
              1e-12);
  EXPECT_NEAR(MutualInformationAX(
                  Groups({{0.5, 0.5}, {0.5, 0.5}, {0.5, 0.5}, {0.5, 0.5}})),
              2.0, 1e-12);
  EXPECT_NEAR(
      MutualInformationAX(Groups({{0.5, 0.5}, {0.5, 0.5}}, {0.9, 0.1})),
      kBinary09, 1e-12);
}

TEST(GroupedDataTest, RejectsSharedSymbolNamingIt) {
  std::vector<ConceptGroup> groups = {{0, Cat({3, 4}, {0.5, 0.5})},
                                      {1, Cat({4, 5}, {0.5, 0.5})}};
  absl::StatusOr<GroupedData> g = GroupedData::Create(groups, {0.5, 0.5});
  EXPECT_EQ(g.status().code(), absl::StatusCode::kFailedPrecondition);
  EXPECT_THAT(g.status().message(), HasSubstr("symbol 4"));

  absl::StatusOr<GroupedData> diag =
      GroupedData::Create(groups, {0.5, 0.5}, AssumptionCheck::kDiagnostic);
  ASSERT_TRUE(diag.ok());
  EXPECT_FALSE(diag->disjoint_supports());
}

TEST(GroupedDataTest, RequiresSupportLargerThanConceptCount) {
  std::vector<ConceptGroup> groups = {{0, Cat({0}, {1.0})},
                                      {1, Cat({1}, {1.0})}};
  EXPECT_EQ(GroupedData::Create(groups, {0.5, 0.5}).status().code(),
            absl::StatusCode::kFailedPrecondition);
}

TEST(GroupedDataTest, RejectsBadPriors) {
  std::vector<ConceptGroup> groups = {{0, Cat({0, 1}, {0.5, 0.5})},
                                      {1, Cat({2, 3}, {0.5, 0.5})}};
  EXPECT_FALSE(GroupedData::Create(groups, {0.7, 0.7}).ok());
  EXPECT_FALSE(GroupedData::Create(groups, {1.0}).ok());
  EXPECT_FALSE(GroupedData::Create(groups, {1.2, -0.2}).ok());
}

TEST(GroupedDataTest, ConditioningReducesEntropyOnRandomInstances) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 4;
    std::vector<std::vector<double>> probs;
    for (int g = 0; g < n; ++g) probs.push_back(RandomSimplex(1 + trial % 5 + g, rng));
    const GroupedData g = Groups(probs, RandomSimplex(n, rng));
    EXPECT_LE(ConditionalEntropyXGivenA(g), Entropy(g.MarginalX()) + 1e-12);
  }
}

TEST(FunnelTest, EightSymbolExample) {
  const GroupedData g =
      Groups({{0.25, 0.25, 0.25, 0.25}, {0.25, 0.25, 0.25, 0.25}});
  absl::StatusOr<FunnelCurve> c = FunnelBounds(g, 7);
  ASSERT_TRUE(c.ok());
  EXPECT_NEAR(c->h_x, 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(c->u_grid.back(), c->h_x);
  EXPECT_NEAR(c->upper.back(), 1.0, 1e-12);
  EXPECT_EQ(c->lower.front(), 0.0);
  EXPECT_EQ(c->upper.front(), 0.0);
  EXPECT_NEAR(c->LowerAt(2.5), 0.5, 1e-12);
  EXPECT_NEAR(c->UpperAt(2.5), 2.5 / 3.0, 1e-12);
}

TEST(FunnelTest, RejectsTooFewPoints) {
  EXPECT_FALSE(FunnelBounds(Groups({{0.5, 0.5}, {0.5, 0.5}}), 1).ok());
}

TEST(FunnelTest, LowerNeverExceedsUpperOnRandomInstances) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 3;
    std::vector<std::vector<double>> probs;
    for (int g = 0; g < n; ++g) probs.push_back(RandomSimplex(1 + (trial + g) % 6, rng));
    absl::StatusOr<FunnelCurve> c =
        FunnelBounds(Groups(probs, RandomSimplex(n, rng)), 51);
    ASSERT_TRUE(c.ok());
    for (std::size_t k = 0; k < c->u_grid.size(); ++k) {
      EXPECT_LE(c->lower[k], c->upper[k] + 1e-12);
    }
  }
}

TEST(PermutationTest, DetectsSharedMultiset) {
  EXPECT_TRUE(CheckPermutationEqual(Cat({0.2, 0.3, 0.5}),
                                    Cat({0.5, 0.2, 0.3}), 1e-9));
  EXPECT_FALSE(CheckPermutationEqual(Cat({0.5, 0.5}), Cat({0.6, 0.4}), 1e-9));
  EXPECT_FALSE(CheckPermutationEqual(Cat({0.5, 0.5}), Cat({1.0}), 1e-9));
}

TEST(PermutationTest, UniformTiesGiveIdOrderedMap) {
  std::optional<Permutation> sigma = CheckPermutationEqual(
      Cat({0, 1, 2, 3}, {0.25, 0.25, 0.25, 0.25}),
      Cat({10, 11, 12, 13}, {0.25, 0.25, 0.25, 0.25}), 1e-9);
  ASSERT_TRUE(sigma);
  for (int k = 0; k < 4; ++k) {
    EXPECT_EQ(sigma->Apply(Symbol{k})->id, 10 + k);
  }
}

TEST(PermutationTest, MapsByRank) {
  std::optional<Permutation> sigma = CheckPermutationEqual(
      Cat({0, 1}, {0.3, 0.7}), Cat({2, 3}, {0.7, 0.3}), 1e-9);
  ASSERT_TRUE(sigma);
  EXPECT_EQ(sigma->Apply(Symbol{1})->id, 2);
  EXPECT_EQ(sigma->Apply(Symbol{0})->id, 3);
  EXPECT_FALSE(sigma->Apply(Symbol{9}));
}

TEST(PermutationTest, SymmetricAndInvertibleOnRandomInstances) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const int k = 1 + trial % 7;
    std::vector<double> probs = RandomSimplex(k, rng);
    std::vector<double> shuffled = probs;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    if (trial % 3 == 0 && k > 1) std::swap(shuffled[0], shuffled[k - 1]);
    const Categorical p = Cat(probs);
    std::vector<std::int64_t> q_ids(k);
    for (int i = 0; i < k; ++i) q_ids[i] = 100 + i;
    const Categorical q = Cat(q_ids, shuffled);
    std::optional<Permutation> pq = CheckPermutationEqual(p, q, 1e-12);
    std::optional<Permutation> qp = CheckPermutationEqual(q, p, 1e-12);
    ASSERT_EQ(pq.has_value(), qp.has_value());
    ASSERT_TRUE(pq);
    absl::StatusOr<Permutation> round = pq->Then(pq->Inverse());
    ASSERT_TRUE(round.ok());
    for (Symbol s : p.support()) {
      EXPECT_EQ(round->Apply(s), s);
      EXPECT_NEAR(p.ProbabilityOf(s), q.ProbabilityOf(*pq->Apply(s)), 1e-12);
    }
  }
  // A perturbed multiset is rejected in both directions.
  const Categorical a = Cat({0.5, 0.3, 0.2});
  const Categorical b = Cat({0.5, 0.29, 0.21});
  EXPECT_FALSE(CheckPermutationEqual(a, b, 1e-3));
  EXPECT_FALSE(CheckPermutationEqual(b, a, 1e-3));
  EXPECT_TRUE(CheckPermutationEqual(a, b, 0.02));
}

TEST(PermutationTest, CreateRejectsDuplicates) {
  EXPECT_FALSE(Permutation::Create({{Symbol{0}, Symbol{1}},
                                    {Symbol{0}, Symbol{2}}})
                   .ok());
  EXPECT_FALSE(Permutation::Create({{Symbol{0}, Symbol{1}},
                                    {Symbol{2}, Symbol{1}}})
                   .ok());
}

TEST(PicTest, IndependenceGivesZeroPics) {
  std::vector<ConceptGroup> groups = {{0, Cat({0, 1}, {0.3, 0.7})},
                                      {1, Cat({0, 1}, {0.3, 0.7})}};
  absl::StatusOr<GroupedData> g =
      GroupedData::Create(groups, {0.4, 0.6}, AssumptionCheck::kDiagnostic);
  ASSERT_TRUE(g.ok());
  absl::StatusOr<PicSpectrum> s = ComputePicSpectrum(*g);
  ASSERT_TRUE(s.ok());
  EXPECT_TRUE(s->assumptions_violated);
  EXPECT_NEAR(s->singular_values[0], 1.0, 1e-9);
  for (double pic : s->pics) EXPECT_LE(pic, 1e-9);
}

TEST(PicTest, DisjointTwoGroupsFullyDetermineConcept) {
  // Hand SVD: the normalized joint is block diagonal with unit singular values.
  const GroupedData g = Groups({{0.5, 0.5}, {0.25, 0.75}});
  absl::StatusOr<PicSpectrum> s = ComputePicSpectrum(g);
  ASSERT_TRUE(s.ok());
  ASSERT_EQ(s->singular_values.size(), 2u);
  EXPECT_NEAR(s->singular_values[0], 1.0, 1e-9);
  EXPECT_NEAR(s->singular_values[1], 1.0, 1e-9);
  ASSERT_EQ(s->pics.size(), 1u);
  EXPECT_NEAR(s->pics[0], 1.0, 1e-9);
  EXPECT_NEAR(s->lambda_d, 1.0, 1e-9);
}

TEST(PicTest, RejectsZeroPrior) {
  EXPECT_EQ(ComputePicSpectrum(Groups({{0.5, 0.5}, {0.5, 0.5}}, {1.0, 0.0}))
                .status()
                .code(),
            absl::StatusCode::kInvalidArgument);
}

TEST(PicTest, SpectrumPropertiesOnRandomInstances) {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 4;
    const int k = 2 + trial % 3;
    std::vector<ConceptGroup> groups;
    for (int g = 0; g < n; ++g) {
      // Overlapping supports exercise the general (non-block) case.
      std::vector<std::int64_t> ids;
      for (int i = 0; i < k; ++i) ids.push_back(g + i);
      groups.push_back({g, Cat(ids, RandomSimplex(k, rng))});
    }
    absl::StatusOr<GroupedData> g = GroupedData::Create(
        groups, RandomSimplex(n, rng), AssumptionCheck::kDiagnostic);
    ASSERT_TRUE(g.ok());
    absl::StatusOr<PicSpectrum> s = ComputePicSpectrum(*g);
    ASSERT_TRUE(s.ok());
    EXPECT_NEAR(s->singular_values[0], 1.0, 1e-9);
    for (std::size_t i = 0; i < s->pics.size(); ++i) {
      EXPECT_GE(s->pics[i], 0.0);
      EXPECT_LE(s->pics[i], 1.0);
      if (i > 0) EXPECT_LE(s->pics[i], s->pics[i - 1] + 1e-12);
    }
  }
}

TEST(FeasibilityTest, SupportClause) {
  absl::StatusOr<Feasibility> f = ErasureFeasible(
      Groups({{0.25, 0.25, 0.25, 0.25}, {0.25, 0.25, 0.25, 0.25}}));
  ASSERT_TRUE(f.ok());
  EXPECT_TRUE(f->feasible);
  EXPECT_THAT(f->reason, HasSubstr("exceeds"));
}

TEST(FeasibilityTest, PerfectCorrelationWithoutExtraSupportIsInfeasible) {
  std::vector<ConceptGroup> groups = {{0, Cat({0}, {1.0})},
                                      {1, Cat({1}, {1.0})}};
  absl::StatusOr<GroupedData> g =
      GroupedData::Create(groups, {0.5, 0.5}, AssumptionCheck::kDiagnostic);
  ASSERT_TRUE(g.ok());
  absl::StatusOr<Feasibility> f = ErasureFeasible(*g);
  ASSERT_TRUE(f.ok());
  EXPECT_FALSE(f->feasible);
  EXPECT_THAT(f->reason, HasSubstr("infeasible"));
}

TEST(FeasibilityTest, IndependenceClause) {
  std::vector<ConceptGroup> groups = {{0, Cat({0, 1}, {0.3, 0.7})},
                                      {1, Cat({0, 1}, {0.3, 0.7})}};
  absl::StatusOr<GroupedData> g =
      GroupedData::Create(groups, {0.5, 0.5}, AssumptionCheck::kDiagnostic);
  ASSERT_TRUE(g.ok());
  absl::StatusOr<Feasibility> f = ErasureFeasible(*g);
  ASSERT_TRUE(f.ok());
  EXPECT_TRUE(f->feasible);
  EXPECT_THAT(f->reason, HasSubstr("principal inertia"));
  EXPECT_THAT(f->reason, ::testing::Not(HasSubstr("exceeds")));
}

}  // namespace
}  // namespace pefkit
