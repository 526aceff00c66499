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

#include "pefkit/eval.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"

namespace pefkit {
namespace {

absl::StatusOr<Categorical> Empirical(const std::map<std::int64_t, std::int64_t>& counts) {
  std::int64_t n = 0;
  for (const auto& [id, c] : counts) n += c;
  std::vector<Symbol> support;
  std::vector<double> probs;
  for (const auto& [id, c] : counts) {
    support.push_back(Symbol{id});
    probs.push_back(static_cast<double>(c) / static_cast<double>(n));
  }
  return Categorical::Create(std::move(support), std::move(probs));
}

absl::StatusOr<std::vector<std::vector<std::string>>> ReadCsv(
    const std::filesystem::path& path, std::span<const std::string_view> header) {
  std::ifstream in(path);
  if (!in) {
    return absl::NotFoundError(absl::StrCat("cannot open ", path.string()));
  }
  std::string line;
  if (!std::getline(in, line)) {
    return absl::DataLossError(absl::StrCat(path.string(), " is empty"));
  }
  std::vector<std::string> got = absl::StrSplit(absl::StripTrailingAsciiWhitespace(line), ',');
  if (!std::equal(got.begin(), got.end(), header.begin(), header.end())) {
    return absl::DataLossError(
        absl::StrCat(path.string(), ": unexpected header '", line, "'"));
  }
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (absl::StripTrailingAsciiWhitespace(line).empty()) continue;
    std::vector<std::string> fields =
        absl::StrSplit(absl::StripTrailingAsciiWhitespace(line), ',');
    if (fields.size() != header.size()) {
      return absl::DataLossError(
          absl::StrCat(path.string(), ": malformed row '", line, "'"));
    }
    rows.push_back(std::move(fields));
  }
  return rows;
}

absl::StatusOr<double> ParseDouble(absl::string_view s) {
  double v = 0;
  if (!absl::SimpleAtod(s, &v)) {
    return absl::DataLossError(absl::StrCat("not a number: '", s, "'"));
  }
  return v;
}

}  // namespace

absl::StatusOr<JointCounts> JointCounts::Create(
    std::vector<Symbol> rows, std::vector<Symbol> cols,
    std::vector<std::int64_t> counts) {
  if (counts.size() != rows.size() * cols.size()) {
    return absl::InvalidArgumentError("count matrix has the wrong size");
  }
  JointCounts j;
  for (std::int64_t c : counts) {
    if (c < 0) return absl::InvalidArgumentError("negative count");
    j.n_ += c;
  }
  if (j.n_ <= 0) return absl::InvalidArgumentError("empty contingency table");
  j.rows_ = std::move(rows);
  j.cols_ = std::move(cols);
  j.counts_ = std::move(counts);
  return j;
}

absl::StatusOr<JointCounts> JointCounts::FromPairs(
    std::span<const std::pair<std::int64_t, std::int64_t>> pairs) {
  std::map<std::int64_t, std::size_t> row_index;
  std::map<std::int64_t, std::size_t> col_index;
  for (const auto& [r, c] : pairs) {
    row_index.emplace(r, 0);
    col_index.emplace(c, 0);
  }
  std::vector<Symbol> rows;
  std::vector<Symbol> cols;
  for (auto& [id, idx] : row_index) {
    idx = rows.size();
    rows.push_back(Symbol{id});
  }
  for (auto& [id, idx] : col_index) {
    idx = cols.size();
    cols.push_back(Symbol{id});
  }
  std::vector<std::int64_t> counts(rows.size() * cols.size(), 0);
  for (const auto& [r, c] : pairs) {
    ++counts[row_index[r] * cols.size() + col_index[c]];
  }
  return Create(std::move(rows), std::move(cols), std::move(counts));
}

double PluginMi(const JointCounts& j, bool miller_madow) {
  const std::size_t nr = j.rows().size();
  const std::size_t nc = j.cols().size();
  std::vector<double> row_sum(nr, 0.0);
  std::vector<double> col_sum(nc, 0.0);
  for (std::size_t r = 0; r < nr; ++r) {
    for (std::size_t c = 0; c < nc; ++c) {
      row_sum[r] += j.count(r, c);
      col_sum[c] += j.count(r, c);
    }
  }
  const double n = static_cast<double>(j.n());
  double mi = 0;
  for (std::size_t r = 0; r < nr; ++r) {
    for (std::size_t c = 0; c < nc; ++c) {
      const double k = j.count(r, c);
      if (k == 0) continue;
      mi += (k / n) * std::log2(k * n / (row_sum[r] * col_sum[c]));
    }
  }
  mi = std::max(mi, 0.0);
  if (miller_madow) {
    mi -= static_cast<double>((nr - 1) * (nc - 1)) / (2 * n * std::log(2.0));
  }
  return mi;
}

double TvDistance(const Categorical& p, const Categorical& q) {
  std::map<std::int64_t, double> diff;
  for (std::size_t k = 0; k < p.size(); ++k) diff[p.support()[k].id] += p.probs()[k];
  for (std::size_t k = 0; k < q.size(); ++k) diff[q.support()[k].id] -= q.probs()[k];
  double total = 0;
  for (const auto& [id, d] : diff) total += std::abs(d);
  return total / 2;
}

std::string_view PointModeName(PointMode mode) {
  return mode == PointMode::kAnalytic ? "analytic" : "plugin";
}

absl::StatusOr<Evaluation> EvaluateRun(const GroupedData& true_dists,
                                       const ErasureFunction& f,
                                       std::span<const ErasedSample> erased,
                                       std::span<const Sample> original,
                                       std::string method) {
  if (erased.size() != original.size()) {
    return absl::OutOfRangeError(absl::StrFormat(
        "erased has %d rows but original has %d", erased.size(),
        original.size()));
  }
  if (erased.empty()) return absl::InvalidArgumentError("no samples");
  for (std::size_t n = 0; n < erased.size(); ++n) {
    if (erased[n].concept_id != original[n].concept_id) {
      return absl::OutOfRangeError(
          absl::StrCat("row ", n, ": concept ", erased[n].concept_id,
                       " in erased data but ", original[n].concept_id,
                       " in original data"));
    }
  }

  absl::StatusOr<ErasureAnalysis> analysis = AnalyzeErasure(true_dists, f);
  if (!analysis.ok()) return analysis.status();

  std::vector<std::pair<std::int64_t, std::int64_t>> za;
  std::vector<std::pair<std::int64_t, std::int64_t>> zx;
  za.reserve(erased.size());
  zx.reserve(erased.size());
  std::map<ConceptId, std::map<std::int64_t, std::int64_t>> per_group;
  std::map<std::int64_t, std::int64_t> pooled;
  for (std::size_t n = 0; n < erased.size(); ++n) {
    za.emplace_back(erased[n].z.id, erased[n].concept_id);
    zx.emplace_back(erased[n].z.id, original[n].x.id);
    ++per_group[erased[n].concept_id][erased[n].z.id];
    ++pooled[erased[n].z.id];
  }
  absl::StatusOr<JointCounts> za_counts = JointCounts::FromPairs(za);
  if (!za_counts.ok()) return za_counts.status();
  absl::StatusOr<JointCounts> zx_counts = JointCounts::FromPairs(zx);
  if (!zx_counts.ok()) return zx_counts.status();

  Evaluation out;
  out.analytic = TradeoffPoint{method, PointMode::kAnalytic, analysis->i_zx,
                               analysis->i_za};
  out.plugin = TradeoffPoint{method, PointMode::kPlugin, PluginMi(*zx_counts),
                             PluginMi(*za_counts)};
  absl::StatusOr<Categorical> pooled_dist = Empirical(pooled);
  if (!pooled_dist.ok()) return pooled_dist.status();
  for (const auto& [concept_id, counts] : per_group) {
    absl::StatusOr<Categorical> dist = Empirical(counts);
    if (!dist.ok()) return dist.status();
    out.group_tv.push_back(GroupTv{concept_id, TvDistance(*dist, *pooled_dist)});
  }
  return out;
}

bool InsideFunnel(const FunnelCurve& curve, const TradeoffPoint& point,
                  double tol) {
  if (point.utility_bits < -tol || point.utility_bits > curve.h_x + tol) {
    return false;
  }
  const double u = std::clamp(point.utility_bits, 0.0, curve.h_x);
  return point.privacy_bits >= curve.LowerAt(u) - tol &&
         point.privacy_bits <= curve.i_ax + tol;
}

absl::Status EmitTradeoffCsv(std::span<const TradeoffPoint> points,
                             const FunnelCurve& curve,
                             const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    return absl::UnavailableError(
        absl::StrCat("cannot create ", dir.string(), ": ", ec.message()));
  }
  {
    std::ofstream out(dir / kFunnelCsv);
    if (!out) {
      return absl::UnavailableError(
          absl::StrCat("cannot write ", (dir / kFunnelCsv).string()));
    }
    out << "u,lower,upper\n";
    for (std::size_t k = 0; k < curve.u_grid.size(); ++k) {
      out << absl::StrFormat("%.17g,%.17g,%.17g\n", curve.u_grid[k],
                             curve.lower[k], curve.upper[k]);
    }
    if (!out) return absl::UnavailableError("funnel.csv write failed");
  }
  std::ofstream out(dir / kTradeoffCsv);
  if (!out) {
    return absl::UnavailableError(
        absl::StrCat("cannot write ", (dir / kTradeoffCsv).string()));
  }
  out << "method,mode,utility_bits,privacy_bits\n";
  for (const TradeoffPoint& p : points) {
    out << absl::StrFormat("%s,%s,%.17g,%.17g\n", p.method,
                           std::string(PointModeName(p.mode)), std::max(p.utility_bits, 0.0),
                           std::max(p.privacy_bits, 0.0));
  }
  if (!out) return absl::UnavailableError("tradeoff.csv write failed");
  return absl::OkStatus();
}

absl::StatusOr<std::vector<FunnelRow>> ReadFunnelCsv(
    const std::filesystem::path& path) {
  static constexpr std::string_view kHeader[] = {"u", "lower", "upper"};
  absl::StatusOr<std::vector<std::vector<std::string>>> rows =
      ReadCsv(path, kHeader);
  if (!rows.ok()) return rows.status();
  std::vector<FunnelRow> out;
  for (const auto& fields : *rows) {
    FunnelRow row;
    for (auto [field, target] :
         {std::pair{0, &row.u}, std::pair{1, &row.lower}, std::pair{2, &row.upper}}) {
      absl::StatusOr<double> v = ParseDouble(fields[field]);
      if (!v.ok()) return v.status();
      *target = *v;
    }
    out.push_back(row);
  }
  return out;
}

absl::StatusOr<std::vector<TradeoffPoint>> ReadTradeoffCsv(
    const std::filesystem::path& path) {
  static constexpr std::string_view kHeader[] = {"method", "mode",
                                                 "utility_bits", "privacy_bits"};
  absl::StatusOr<std::vector<std::vector<std::string>>> rows =
      ReadCsv(path, kHeader);
  if (!rows.ok()) return rows.status();
  std::vector<TradeoffPoint> out;
  for (const auto& fields : *rows) {
    TradeoffPoint p;
    p.method = fields[0];
    if (fields[1] == "analytic") {
      p.mode = PointMode::kAnalytic;
    } else if (fields[1] == "plugin") {
      p.mode = PointMode::kPlugin;
    } else {
      return absl::DataLossError(absl::StrCat("unknown mode '", fields[1], "'"));
    }
    absl::StatusOr<double> u = ParseDouble(fields[2]);
    if (!u.ok()) return u.status();
    absl::StatusOr<double> priv = ParseDouble(fields[3]);
    if (!priv.ok()) return priv.status();
    p.utility_bits = *u;
    p.privacy_bits = *priv;
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace pefkit
