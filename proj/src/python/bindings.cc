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

// Python bindings. Distributions cross the boundary as plain lists; structured
// results come back as JSON text that the pure-Python layer decodes. Status
// errors become ValueError.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pefkit/coupling.h"
#include "pefkit/dist_core.h"
#include "pefkit/erasure.h"
#include "pefkit/eval.h"
#include "pefkit/io.h"
#include "pefkit/qopt.h"
#include "pefkit/synth.h"

namespace py = pybind11;

namespace pefkit {
namespace {

using IdPairs = std::vector<std::pair<std::int64_t, std::int64_t>>;

template <typename T>
T Unwrap(absl::StatusOr<T> value) {
  if (!value.ok()) throw py::value_error(value.status().ToString());
  return *std::move(value);
}

Categorical MakeCategorical(const std::vector<double>& probs,
                            std::optional<std::vector<std::int64_t>> ids) {
  if (!ids) {
    ids.emplace();
    for (std::size_t k = 0; k < probs.size(); ++k) ids->push_back(k);
  }
  return Unwrap(Categorical::FromIds(*ids, probs));
}

// Group g defaults to ids offset by the sizes of the groups before it, so the
// supports are disjoint; concept ids are 0..n-1.
GroupedData MakeGroups(const std::vector<std::vector<double>>& probs,
                       std::optional<std::vector<double>> priors,
                       std::optional<std::vector<std::vector<std::int64_t>>> ids,
                       AssumptionCheck check = AssumptionCheck::kEnforce) {
  if (ids && ids->size() != probs.size()) {
    throw py::value_error("ids and probs differ in length");
  }
  std::vector<ConceptGroup> groups;
  std::int64_t next = 0;
  for (std::size_t g = 0; g < probs.size(); ++g) {
    std::vector<std::int64_t> group_ids;
    if (ids) {
      group_ids = (*ids)[g];
    } else {
      for (std::size_t k = 0; k < probs[g].size(); ++k) group_ids.push_back(next++);
    }
    groups.push_back(ConceptGroup{static_cast<ConceptId>(g),
                                  MakeCategorical(probs[g], group_ids)});
  }
  if (!priors) priors.emplace(probs.size(), 1.0 / probs.size());
  return Unwrap(GroupedData::Create(std::move(groups), *priors, check));
}

std::string CouplingJson(const Coupling& c) { return ToJson(c).dump(); }

PipelineOptions MakeOptions(std::optional<double> tol, bool use_bo,
                            int bo_budget, std::uint64_t bo_seed,
                            std::optional<int> out_size, bool oracle) {
  PipelineOptions options;
  options.tol = tol;
  options.use_bo = use_bo;
  options.bo.budget = bo_budget;
  options.bo.seed = bo_seed;
  options.out_size = out_size;
  options.hmin = oracle ? HminMethod::kOracle : HminMethod::kGreedy;
  return options;
}

std::string PipelineJson(const PipelineResult& result,
                         std::span<const Sample> samples,
                         std::uint64_t apply_seed) {
  std::vector<ErasedSample> erased =
      Unwrap(result.function.Apply(samples, apply_seed));
  Json out;
  out["report"] = ToJson(result.report);
  out["function"] = ToJson(result.function);
  Json rows = Json::array();
  for (const ErasedSample& e : erased) rows.push_back({e.z.id, e.concept_id});
  out["erased"] = std::move(rows);
  return out.dump();
}

std::vector<Sample> ToSamples(const IdPairs& pairs) {
  std::vector<Sample> samples;
  samples.reserve(pairs.size());
  for (const auto& [x, c] : pairs) samples.push_back(Sample{Symbol{x}, c});
  return samples;
}

}  // namespace
}  // namespace pefkit

PYBIND11_MODULE(_pefkit, m) {
  using namespace pefkit;
  m.doc() = "Perfect concept erasure over finite supports (native core).";

  m.def("entropy", [](const std::vector<double>& p) { return Entropy(p); },
        py::arg("probs"), "Shannon entropy in bits.");

  m.def(
      "greedy_mec",
      [](const std::vector<double>& p, const std::vector<double>& q) {
        return CouplingJson(
            GreedyMec(MakeCategorical(p, std::nullopt),
                      MakeCategorical(q, std::nullopt)));
      },
      py::arg("p"), py::arg("q"));

  m.def(
      "mec_oracle",
      [](const std::vector<double>& p, const std::vector<double>& q,
         int max_cells) {
        return CouplingJson(Unwrap(MecOracle(MakeCategorical(p, std::nullopt),
                                             MakeCategorical(q, std::nullopt),
                                             max_cells)));
      },
      py::arg("p"), py::arg("q"), py::arg("max_cells") = kDefaultOracleCells);

  m.def(
      "check_permutation_equal",
      [](const std::vector<double>& p, const std::vector<double>& q,
         double tol) {
        return CheckPermutationEqual(MakeCategorical(p, std::nullopt),
                                     MakeCategorical(q, std::nullopt), tol)
            .has_value();
      },
      py::arg("p"), py::arg("q"), py::arg("tol") = 1e-9);

  m.def(
      "funnel_bounds",
      [](const std::vector<std::vector<double>>& groups,
         std::optional<std::vector<double>> priors, int n_points) {
        FunnelCurve c =
            Unwrap(FunnelBounds(MakeGroups(groups, priors, std::nullopt), n_points));
        return Json{{"u", c.u_grid},
                    {"lower", c.lower},
                    {"upper", c.upper},
                    {"h_x", c.h_x},
                    {"h_x_given_a", c.h_x_given_a},
                    {"i_ax", c.i_ax}}
            .dump();
      },
      py::arg("groups"), py::arg("priors") = std::nullopt,
      py::arg("n_points") = 101);

  m.def(
      "pic_spectrum",
      [](const std::vector<std::vector<double>>& groups,
         std::optional<std::vector<double>> priors,
         std::optional<std::vector<std::vector<std::int64_t>>> ids) {
        GroupedData g =
            MakeGroups(groups, priors, ids, AssumptionCheck::kDiagnostic);
        Json j = ToJson(Unwrap(ComputePicSpectrum(g)));
        Feasibility f = Unwrap(ErasureFeasible(g));
        j["feasible"] = f.feasible;
        j["reason"] = f.reason;
        return j.dump();
      },
      py::arg("groups"), py::arg("priors") = std::nullopt,
      py::arg("ids") = std::nullopt);

  m.def(
      "objective_j",
      [](const std::vector<double>& q,
         const std::vector<std::vector<double>>& groups,
         std::optional<std::vector<double>> priors, bool oracle) {
        GroupedData g = MakeGroups(groups, priors, std::nullopt);
        Categorical qc = Unwrap(Categorical::Create(
            OutputSupport(g, static_cast<int>(q.size())), q));
        return Unwrap(ObjectiveJ(
            qc, g, oracle ? HminMethod::kOracle : HminMethod::kGreedy));
      },
      py::arg("q"), py::arg("groups"), py::arg("priors") = std::nullopt,
      py::arg("oracle") = false);

  m.def(
      "generate",
      [](const std::string& setting, int groups, int support, int samples,
         std::uint64_t seed, double alpha) {
        SynthConfig cfg{.n_groups = groups,
                        .support_per_group = support,
                        .n_samples_per_group = samples,
                        .setting = Unwrap(ParseSynthSetting(setting)),
                        .seed = seed,
                        .dirichlet_alpha = alpha};
        SynthData data = Unwrap(Generate(cfg));
        Json rows = Json::array();
        for (const Sample& s : data.samples) rows.push_back({s.x.id, s.concept_id});
        return Json{{"truth", ToJson(data.true_dists)}, {"samples", std::move(rows)}}
            .dump();
      },
      py::arg("setting"), py::arg("groups") = 2, py::arg("support") = 100,
      py::arg("samples") = 10000, py::arg("seed") = 0, py::arg("alpha") = 1.0);

  m.def(
      "erase_samples",
      [](const IdPairs& pairs, std::optional<double> tol, bool use_bo,
         int bo_budget, std::uint64_t bo_seed, std::optional<int> out_size,
         bool oracle, std::uint64_t apply_seed) {
        std::vector<Sample> samples = ToSamples(pairs);
        PipelineResult result = Unwrap(RunAlgorithm1(
            samples,
            MakeOptions(tol, use_bo, bo_budget, bo_seed, out_size, oracle)));
        return PipelineJson(result, samples, apply_seed);
      },
      py::arg("samples"), py::arg("tol") = std::nullopt,
      py::arg("use_bo") = false, py::arg("bo_budget") = 100,
      py::arg("bo_seed") = 0, py::arg("out_size") = std::nullopt,
      py::arg("oracle") = false, py::arg("apply_seed") = 0);

  m.def(
      "erase_distributions",
      [](const std::string& truth_json, const IdPairs& pairs,
         std::optional<double> tol, bool use_bo, int bo_budget,
         std::uint64_t bo_seed, std::optional<int> out_size, bool oracle,
         std::uint64_t apply_seed) {
        Json parsed = Json::parse(truth_json, nullptr, false);
        if (parsed.is_discarded()) throw py::value_error("invalid truth JSON");
        GroupedData g = Unwrap(GroupedDataFromJson(parsed));
        PipelineResult result = Unwrap(RunAlgorithm1(
            g, MakeOptions(tol, use_bo, bo_budget, bo_seed, out_size, oracle)));
        return PipelineJson(result, ToSamples(pairs), apply_seed);
      },
      py::arg("truth"), py::arg("samples"), py::arg("tol") = std::nullopt,
      py::arg("use_bo") = false, py::arg("bo_budget") = 100,
      py::arg("bo_seed") = 0, py::arg("out_size") = std::nullopt,
      py::arg("oracle") = false, py::arg("apply_seed") = 0);

  m.def(
      "plugin_mi",
      [](const IdPairs& pairs, bool miller_madow) {
        return PluginMi(Unwrap(JointCounts::FromPairs(pairs)), miller_madow);
      },
      py::arg("pairs"), py::arg("miller_madow") = false);

  m.def(
      "tv_distance",
      [](const std::vector<double>& p, const std::vector<double>& q) {
        return TvDistance(MakeCategorical(p, std::nullopt),
                          MakeCategorical(q, std::nullopt));
      },
      py::arg("p"), py::arg("q"));
}
