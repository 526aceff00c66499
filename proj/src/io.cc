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

#include "pefkit/io.h"

#include <fstream>
#include <utility>

#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"

namespace pefkit {
namespace {

absl::Status Malformed(absl::string_view what, absl::string_view detail) {
  return absl::DataLossError(absl::StrCat("malformed ", what, ": ", detail));
}

std::vector<std::int64_t> Ids(const std::vector<Symbol>& symbols) {
  std::vector<std::int64_t> ids;
  ids.reserve(symbols.size());
  for (Symbol s : symbols) ids.push_back(s.id);
  return ids;
}

absl::StatusOr<std::vector<std::pair<std::int64_t, std::int64_t>>> ReadIdPairs(
    const std::filesystem::path& path, absl::string_view first) {
  std::ifstream in(path);
  if (!in) {
    return absl::NotFoundError(absl::StrCat("cannot open ", path.string()));
  }
  const std::string header = absl::StrCat(first, ",concept");
  std::string line;
  if (!std::getline(in, line) ||
      absl::StripTrailingAsciiWhitespace(line) != header) {
    return Malformed(path.string(), absl::StrCat("expected header ", header));
  }
  std::vector<std::pair<std::int64_t, std::int64_t>> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const absl::string_view trimmed = absl::StripTrailingAsciiWhitespace(line);
    if (trimmed.empty()) continue;
    std::vector<absl::string_view> fields = absl::StrSplit(trimmed, ',');
    std::int64_t a = 0;
    std::int64_t b = 0;
    if (fields.size() != 2 || !absl::SimpleAtoi(fields[0], &a) ||
        !absl::SimpleAtoi(fields[1], &b)) {
      return Malformed(path.string(), absl::StrCat("line ", line_no));
    }
    out.emplace_back(a, b);
  }
  return out;
}

template <typename Row>
absl::Status WriteIdPairs(const std::filesystem::path& path,
                          absl::string_view first, std::span<const Row> rows,
                          auto project) {
  std::string text = absl::StrCat(first, ",concept\n");
  for (const Row& row : rows) {
    const auto [a, b] = project(row);
    absl::StrAppend(&text, a, ",", b, "\n");
  }
  return WriteTextFile(path, text);
}

}  // namespace

Json ToJson(const Categorical& p) {
  return Json{{"support", p.ids()}, {"probs", p.probs()}};
}

Json ToJson(const GroupedData& g) {
  Json groups = Json::array();
  for (const ConceptGroup& group : g.groups()) {
    groups.push_back(Json{{"concept", group.concept_id},
                          {"dist", ToJson(group.dist)}});
  }
  return Json{{"priors", g.priors()}, {"groups", std::move(groups)}};
}

Json ToJson(const Coupling& c) {
  Json mass = Json::array();
  for (Eigen::Index r = 0; r < c.mass().rows(); ++r) {
    std::vector<double> row(c.mass().cols());
    for (Eigen::Index k = 0; k < c.mass().cols(); ++k) row[k] = c.mass()(r, k);
    mass.push_back(std::move(row));
  }
  return Json{{"rows", Ids(c.row_support())},
              {"cols", Ids(c.col_support())},
              {"mass", std::move(mass)},
              {"entropy_bits", CouplingEntropy(c)}};
}

Json ToJson(const ErasureFunction& f) {
  Json groups = Json::array();
  if (f.is_deterministic()) {
    const DeterministicErasure& d = f.deterministic();
    for (const GroupPermutation& g : d.groups) {
      Json map = Json::array();
      for (const auto& [x, z] : g.map.pairs()) map.push_back({x.id, z.id});
      groups.push_back(Json{{"concept", g.concept_id}, {"map", std::move(map)}});
    }
    return Json{{"type", "deterministic"},
                {"output_support", Ids(d.output_support)},
                {"q", ToJson(d.q)},
                {"groups", std::move(groups)}};
  }
  const StochasticErasure& s = f.stochastic();
  for (const GroupConditionals& g : s.groups) {
    Json rows = Json::array();
    for (const ConditionalRow& row : g.rows) {
      rows.push_back(Json{{"x", row.x.id}, {"z_given_x", ToJson(row.z_given_x)}});
    }
    groups.push_back(Json{{"concept", g.concept_id}, {"rows", std::move(rows)}});
  }
  return Json{{"type", "stochastic"},
              {"q", ToJson(s.q)},
              {"groups", std::move(groups)}};
}

Json ToJson(const ErasureReport& r) {
  Json j{{"branch", BranchName(r.branch)},
         {"i_za_analytic", r.i_za_analytic},
         {"i_zx_analytic", r.i_zx_analytic},
         {"h_x_given_a", r.h_x_given_a},
         {"j_value", r.j_value},
         {"tolerance", r.tolerance},
         {"q_source", QSourceName(r.q_source)}};
  j["bo_j_value"] = r.bo_j_value ? Json(*r.bo_j_value) : Json(nullptr);
  return j;
}

Json ToJson(const PicSpectrum& s) {
  return Json{{"singular_values", s.singular_values},
              {"pics", s.pics},
              {"lambda_d", s.lambda_d},
              {"maximal_correlation_squared", s.MaximalCorrelationSquared()},
              {"chi_squared", s.ChiSquared()},
              {"assumptions_violated", s.assumptions_violated}};
}

Json ToJson(const TradeoffPoint& p) {
  return Json{{"method", p.method},
              {"mode", PointModeName(p.mode)},
              {"utility_bits", p.utility_bits},
              {"privacy_bits", p.privacy_bits}};
}

absl::StatusOr<Categorical> CategoricalFromJson(const Json& j) {
  try {
    const auto ids = j.at("support").get<std::vector<std::int64_t>>();
    const auto probs = j.at("probs").get<std::vector<double>>();
    absl::StatusOr<Categorical> p = Categorical::FromIds(ids, probs);
    if (!p.ok()) return p.status();
    return p;
  } catch (const Json::exception& e) {
    return Malformed("distribution", e.what());
  }
}

absl::StatusOr<GroupedData> GroupedDataFromJson(const Json& j,
                                                AssumptionCheck check) {
  try {
    std::vector<ConceptGroup> groups;
    for (const Json& g : j.at("groups")) {
      absl::StatusOr<Categorical> dist = CategoricalFromJson(g.at("dist"));
      if (!dist.ok()) return dist.status();
      groups.push_back(
          ConceptGroup{g.at("concept").get<ConceptId>(), *std::move(dist)});
    }
    std::vector<double> priors;
    if (j.contains("priors")) {
      priors = j.at("priors").get<std::vector<double>>();
    } else {
      priors.assign(groups.size(), groups.empty() ? 0.0 : 1.0 / groups.size());
    }
    return GroupedData::Create(std::move(groups), std::move(priors), check);
  } catch (const Json::exception& e) {
    return Malformed("grouped distributions", e.what());
  }
}

absl::StatusOr<ErasureFunction> ErasureFunctionFromJson(const Json& j) {
  try {
    absl::StatusOr<Categorical> q = CategoricalFromJson(j.at("q"));
    if (!q.ok()) return q.status();
    const std::string type = j.at("type").get<std::string>();
    if (type == "deterministic") {
      DeterministicErasure d{.output_support = {}, .q = *q, .groups = {}};
      for (std::int64_t id :
           j.at("output_support").get<std::vector<std::int64_t>>()) {
        d.output_support.push_back(Symbol{id});
      }
      for (const Json& g : j.at("groups")) {
        std::vector<std::pair<Symbol, Symbol>> pairs;
        for (const Json& pair : g.at("map")) {
          pairs.emplace_back(Symbol{pair.at(0).get<std::int64_t>()},
                             Symbol{pair.at(1).get<std::int64_t>()});
        }
        absl::StatusOr<Permutation> map = Permutation::Create(std::move(pairs));
        if (!map.ok()) return map.status();
        d.groups.push_back(
            GroupPermutation{g.at("concept").get<ConceptId>(), *std::move(map)});
      }
      return ErasureFunction(std::move(d));
    }
    if (type == "stochastic") {
      StochasticErasure s{.q = *q, .groups = {}};
      for (const Json& g : j.at("groups")) {
        GroupConditionals conditionals{g.at("concept").get<ConceptId>(), {}};
        for (const Json& row : g.at("rows")) {
          absl::StatusOr<Categorical> dist =
              CategoricalFromJson(row.at("z_given_x"));
          if (!dist.ok()) return dist.status();
          conditionals.rows.push_back(ConditionalRow{
              Symbol{row.at("x").get<std::int64_t>()}, *std::move(dist)});
        }
        s.groups.push_back(std::move(conditionals));
      }
      return ErasureFunction(std::move(s));
    }
    return Malformed("erasure function", absl::StrCat("unknown type ", type));
  } catch (const Json::exception& e) {
    return Malformed("erasure function", e.what());
  }
}

absl::StatusOr<Json> ReadJsonFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    return absl::NotFoundError(absl::StrCat("cannot open ", path.string()));
  }
  Json j = Json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) return Malformed(path.string(), "invalid JSON");
  return j;
}

absl::Status WriteJsonFile(const std::filesystem::path& path, const Json& j) {
  return WriteTextFile(path, j.dump(2) + "\n");
}

absl::Status WriteTextFile(const std::filesystem::path& path,
                           const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) {
      return absl::UnavailableError(absl::StrCat(
          "cannot create ", path.parent_path().string(), ": ", ec.message()));
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    return absl::UnavailableError(absl::StrCat("cannot write ", path.string()));
  }
  out << text;
  out.close();
  if (!out) {
    return absl::UnavailableError(absl::StrCat("write failed: ", path.string()));
  }
  return absl::OkStatus();
}

absl::StatusOr<std::vector<Sample>> ReadSamplesCsv(
    const std::filesystem::path& path) {
  absl::StatusOr<std::vector<std::pair<std::int64_t, std::int64_t>>> pairs =
      ReadIdPairs(path, "x");
  if (!pairs.ok()) return pairs.status();
  std::vector<Sample> out;
  out.reserve(pairs->size());
  for (const auto& [x, c] : *pairs) out.push_back(Sample{Symbol{x}, c});
  return out;
}

absl::Status WriteSamplesCsv(const std::filesystem::path& path,
                             std::span<const Sample> samples) {
  return WriteIdPairs(path, "x", samples, [](const Sample& s) {
    return std::pair{s.x.id, s.concept_id};
  });
}

absl::StatusOr<std::vector<ErasedSample>> ReadErasedCsv(
    const std::filesystem::path& path) {
  absl::StatusOr<std::vector<std::pair<std::int64_t, std::int64_t>>> pairs =
      ReadIdPairs(path, "z");
  if (!pairs.ok()) return pairs.status();
  std::vector<ErasedSample> out;
  out.reserve(pairs->size());
  for (const auto& [z, c] : *pairs) out.push_back(ErasedSample{Symbol{z}, c});
  return out;
}

absl::Status WriteErasedCsv(const std::filesystem::path& path,
                            std::span<const ErasedSample> erased) {
  return WriteIdPairs(path, "z", erased, [](const ErasedSample& s) {
    return std::pair{s.z.id, s.concept_id};
  });
}

absl::Status WriteCouplingCsv(const std::filesystem::path& path,
                              const Coupling& c) {
  std::string text = "row";
  for (Symbol col : c.col_support()) absl::StrAppend(&text, ",", col.id);
  text += "\n";
  for (Eigen::Index r = 0; r < c.mass().rows(); ++r) {
    absl::StrAppend(&text, c.row_support()[r].id);
    for (Eigen::Index k = 0; k < c.mass().cols(); ++k) {
      absl::StrAppendFormat(&text, ",%.17g", c.mass()(r, k));
    }
    text += "\n";
  }
  return WriteTextFile(path, text);
}

}  // namespace pefkit
