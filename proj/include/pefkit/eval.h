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

// Plug-in information estimates from samples, total variation checks, and
// the privacy/utility tradeoff tables.

#ifndef PEFKIT_EVAL_H_
#define PEFKIT_EVAL_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "pefkit/dist_core.h"
#include "pefkit/erasure.h"

namespace pefkit {

// Contingency table of two discrete variables. Rows and columns list the
// observed values in ascending id order.
class JointCounts {
 public:
  static absl::StatusOr<JointCounts> FromPairs(
      std::span<const std::pair<std::int64_t, std::int64_t>> pairs);
  // counts is row-major with rows.size() * cols.size() entries.
  static absl::StatusOr<JointCounts> Create(std::vector<Symbol> rows,
                                            std::vector<Symbol> cols,
                                            std::vector<std::int64_t> counts);

  const std::vector<Symbol>& rows() const { return rows_; }
  const std::vector<Symbol>& cols() const { return cols_; }
  std::int64_t count(std::size_t r, std::size_t c) const {
    return counts_[r * cols_.size() + c];
  }
  std::int64_t n() const { return n_; }

 private:
  JointCounts() = default;

  std::vector<Symbol> rows_;
  std::vector<Symbol> cols_;
  std::vector<std::int64_t> counts_;
  std::int64_t n_ = 0;
};

// Mutual information of the empirical joint, in bits, floored at zero. The
// Miller-Madow option then subtracts (r-1)(c-1) / (2 n ln 2) and may go
// negative.
double PluginMi(const JointCounts& j, bool miller_madow = false);

// Half the L1 distance over the union of supports.
double TvDistance(const Categorical& p, const Categorical& q);

enum class PointMode { kAnalytic, kPlugin };

std::string_view PointModeName(PointMode mode);

struct TradeoffPoint {
  std::string method;
  PointMode mode = PointMode::kAnalytic;
  double utility_bits = 0;   // I(Z;X)
  double privacy_bits = 0;   // I(Z;A)
};

struct GroupTv {
  ConceptId concept_id = 0;
  double tv = 0;
};

struct Evaluation {
  TradeoffPoint analytic;
  TradeoffPoint plugin;
  // TV between the empirical P(Z | A = a_i) and the pooled empirical P(Z).
  std::vector<GroupTv> group_tv;
};

// `erased[n]` must be the image of `original[n]`; a length or concept
// mismatch is OutOfRange.
absl::StatusOr<Evaluation> EvaluateRun(const GroupedData& true_dists,
                                       const ErasureFunction& f,
                                       std::span<const ErasedSample> erased,
                                       std::span<const Sample> original,
                                       std::string method = "pef");

// lower(u) - tol <= privacy <= I(A;X) + tol and utility <= H(X) + tol.
bool InsideFunnel(const FunnelCurve& curve, const TradeoffPoint& point,
                  double tol = 1e-9);

inline constexpr char kFunnelCsv[] = "funnel.csv";
inline constexpr char kTradeoffCsv[] = "tradeoff.csv";

// Writes funnel.csv (u,lower,upper) and tradeoff.csv
// (method,mode,utility_bits,privacy_bits) into `dir`. Reported values are
// clamped at zero.
absl::Status EmitTradeoffCsv(std::span<const TradeoffPoint> points,
                             const FunnelCurve& curve,
                             const std::filesystem::path& dir);

struct FunnelRow {
  double u = 0;
  double lower = 0;
  double upper = 0;
};

absl::StatusOr<std::vector<FunnelRow>> ReadFunnelCsv(
    const std::filesystem::path& path);
absl::StatusOr<std::vector<TradeoffPoint>> ReadTradeoffCsv(
    const std::filesystem::path& path);

}  // namespace pefkit

#endif  // PEFKIT_EVAL_H_
