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

// pef: command-line front end.
//
//   pef generate --setting equal_uniform --groups 2 --support 100
//   pef erase    --samples samples.csv [--truth truth.json] [--use-bo]
//   pef evaluate --truth truth.json --samples samples.csv
//                --erased erased.csv --function function.json
//   pef funnel   --truth truth.json
//   pef mec      --p p.json --q q.json [--oracle]
//   pef pic      --truth truth.json
//
// Exit codes: 0 ok, 2 configuration, 3 data constraint, 4 alignment, 5 I/O.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_format.h"
#include "pefkit/coupling.h"
#include "pefkit/dist_core.h"
#include "pefkit/erasure.h"
#include "pefkit/eval.h"
#include "pefkit/io.h"
#include "pefkit/qopt.h"
#include "pefkit/random.h"
#include "pefkit/synth.h"

namespace pefkit {
namespace {

namespace fs = std::filesystem;

enum ExitCode {
  kOk = 0,
  kInternal = 1,
  kConfig = 2,
  kDataConstraint = 3,
  kAlignment = 4,
  kIo = 5,
};

int ExitCodeFor(const absl::Status& status) {
  switch (status.code()) {
    case absl::StatusCode::kOk:
      return kOk;
    case absl::StatusCode::kInvalidArgument:
      return kConfig;
    case absl::StatusCode::kFailedPrecondition:
      return kDataConstraint;
    case absl::StatusCode::kOutOfRange:
      return kAlignment;
    case absl::StatusCode::kNotFound:
    case absl::StatusCode::kUnavailable:
    case absl::StatusCode::kDataLoss:
    case absl::StatusCode::kPermissionDenied:
      return kIo;
    default:
      return kInternal;
  }
}

struct GlobalFlags {
  std::uint64_t seed = 0;
  std::optional<double> tol;
  std::string out_dir = ".";
  std::string format = "csv";
};

struct GenerateFlags {
  std::string setting;
  int groups = 2;
  int support = 100;
  int samples = 10000;
  double alpha = 1.0;
};

struct EraseFlags {
  std::string samples;
  std::string truth;
  bool use_bo = false;
  int bo_budget = 100;
  std::optional<std::uint64_t> bo_seed;
  double bo_kappa = 2.5;
  int bo_candidates = 1024;
  std::optional<int> out_size;
  std::string hmin = "greedy";
};

struct EvaluateFlags {
  std::string truth;
  std::string samples;
  std::string erased;
  std::string function;
  std::string method = "pef";
  int points = 101;
  bool miller_madow = false;
};

struct FunnelFlags {
  std::string truth;
  int points = 101;
};

struct MecFlags {
  std::string p;
  std::string q;
  bool oracle = false;
};

struct PicFlags {
  std::string truth;
};

Json GlobalJson(std::string_view subcommand, const GlobalFlags& g) {
  Json j;
  j["subcommand"] = subcommand;
  j["seed"] = g.seed;
  j["tol"] = g.tol ? Json(*g.tol) : Json(nullptr);
  j["out_dir"] = g.out_dir;
  j["format"] = g.format;
  return j;
}

absl::Status WriteConfig(const GlobalFlags& g, const Json& config) {
  return WriteJsonFile(fs::path(g.out_dir) / "config.json", config);
}

absl::StatusOr<HminMethod> ParseHmin(const std::string& name) {
  if (name == "greedy") return HminMethod::kGreedy;
  if (name == "oracle") return HminMethod::kOracle;
  return absl::InvalidArgumentError("--hmin must be greedy or oracle");
}

absl::Status RunGenerate(const GlobalFlags& g, const GenerateFlags& f) {
  absl::StatusOr<SynthSetting> setting = ParseSynthSetting(f.setting);
  if (!setting.ok()) return setting.status();
  SynthConfig cfg{.n_groups = f.groups,
                  .support_per_group = f.support,
                  .n_samples_per_group = f.samples,
                  .setting = *setting,
                  .seed = DeriveSeed(g.seed, "generate"),
                  .dirichlet_alpha = f.alpha};
  absl::StatusOr<SynthData> data = Generate(cfg);
  if (!data.ok()) return data.status();

  Json config = GlobalJson("generate", g);
  config["setting"] = f.setting;
  config["groups"] = f.groups;
  config["support"] = f.support;
  config["samples"] = f.samples;
  config["alpha"] = f.alpha;
  config["derived_seed"] = cfg.seed;
  if (absl::Status s = WriteConfig(g, config); !s.ok()) return s;

  const fs::path dir(g.out_dir);
  if (absl::Status s = WriteSamplesCsv(dir / "samples.csv", data->samples);
      !s.ok()) {
    return s;
  }
  if (absl::Status s = WriteJsonFile(dir / "truth.json", ToJson(data->true_dists));
      !s.ok()) {
    return s;
  }
  std::printf("wrote %zu samples (%d groups x %d symbols, %s)\n",
              data->samples.size(), f.groups, f.support, f.setting.c_str());
  return absl::OkStatus();
}

absl::Status RunErase(const GlobalFlags& g, const EraseFlags& f) {
  absl::StatusOr<HminMethod> hmin = ParseHmin(f.hmin);
  if (!hmin.ok()) return hmin.status();
  PipelineOptions options;
  options.tol = g.tol;
  options.use_bo = f.use_bo;
  options.out_size = f.out_size;
  options.hmin = *hmin;
  options.bo.budget = f.bo_budget;
  options.bo.kappa = f.bo_kappa;
  options.bo.n_acq_candidates = f.bo_candidates;
  options.bo.seed = f.bo_seed.value_or(DeriveSeed(g.seed, "bayes_opt"));
  if (absl::Status s = ValidateBoConfig(options.bo); !s.ok()) return s;

  Json config = GlobalJson("erase", g);
  config["samples"] = f.samples;
  config["truth"] = f.truth.empty() ? Json(nullptr) : Json(f.truth);
  config["use_bo"] = f.use_bo;
  config["bo_budget"] = f.bo_budget;
  config["bo_seed"] = options.bo.seed;
  config["bo_kappa"] = f.bo_kappa;
  config["bo_candidates"] = f.bo_candidates;
  config["out_size"] = f.out_size ? Json(*f.out_size) : Json(nullptr);
  config["hmin"] = f.hmin;
  config["apply_seed"] = DeriveSeed(g.seed, "erase");
  if (absl::Status s = WriteConfig(g, config); !s.ok()) return s;

  absl::StatusOr<std::vector<Sample>> samples = ReadSamplesCsv(f.samples);
  if (!samples.ok()) return samples.status();
  absl::StatusOr<PipelineResult> result = absl::UnknownError("unset");
  if (f.truth.empty()) {
    result = RunAlgorithm1(*samples, options);
  } else {
    absl::StatusOr<Json> truth_json = ReadJsonFile(f.truth);
    if (!truth_json.ok()) return truth_json.status();
    absl::StatusOr<GroupedData> truth = GroupedDataFromJson(*truth_json);
    if (!truth.ok()) return truth.status();
    result = RunAlgorithm1(*truth, options);
  }
  if (!result.ok()) return result.status();

  absl::StatusOr<std::vector<ErasedSample>> erased =
      result->function.Apply(*samples, DeriveSeed(g.seed, "erase"));
  if (!erased.ok()) return erased.status();

  const fs::path dir(g.out_dir);
  if (absl::Status s = WriteErasedCsv(dir / "erased.csv", *erased); !s.ok()) {
    return s;
  }
  if (absl::Status s =
          WriteJsonFile(dir / "function.json", ToJson(result->function));
      !s.ok()) {
    return s;
  }
  Json report = ToJson(result->report);
  report["distributions"] = ToJson(result->distributions);
  if (absl::Status s = WriteJsonFile(dir / "report.json", report); !s.ok()) {
    return s;
  }
  const ErasureReport& r = result->report;
  std::printf("branch %s  I(Z;A) %.6g  I(Z;X) %.6f  H(X|A) %.6f  J %.6f\n",
              std::string(BranchName(r.branch)).c_str(), r.i_za_analytic,
              r.i_zx_analytic, r.h_x_given_a, r.j_value);
  return absl::OkStatus();
}

absl::Status RunEvaluate(const GlobalFlags& g, const EvaluateFlags& f) {
  Json config = GlobalJson("evaluate", g);
  config["truth"] = f.truth;
  config["samples"] = f.samples;
  config["erased"] = f.erased;
  config["function"] = f.function;
  config["method"] = f.method;
  config["points"] = f.points;
  config["miller_madow"] = f.miller_madow;
  if (absl::Status s = WriteConfig(g, config); !s.ok()) return s;

  absl::StatusOr<Json> truth_json = ReadJsonFile(f.truth);
  if (!truth_json.ok()) return truth_json.status();
  absl::StatusOr<GroupedData> truth = GroupedDataFromJson(*truth_json);
  if (!truth.ok()) return truth.status();
  absl::StatusOr<Json> function_json = ReadJsonFile(f.function);
  if (!function_json.ok()) return function_json.status();
  absl::StatusOr<ErasureFunction> function =
      ErasureFunctionFromJson(*function_json);
  if (!function.ok()) return function.status();
  absl::StatusOr<std::vector<Sample>> samples = ReadSamplesCsv(f.samples);
  if (!samples.ok()) return samples.status();
  absl::StatusOr<std::vector<ErasedSample>> erased = ReadErasedCsv(f.erased);
  if (!erased.ok()) return erased.status();

  absl::StatusOr<Evaluation> eval =
      EvaluateRun(*truth, *function, *erased, *samples, f.method);
  if (!eval.ok()) return eval.status();
  if (f.miller_madow) {
    std::vector<std::pair<std::int64_t, std::int64_t>> za;
    std::vector<std::pair<std::int64_t, std::int64_t>> zx;
    for (std::size_t n = 0; n < erased->size(); ++n) {
      za.emplace_back((*erased)[n].z.id, (*erased)[n].concept_id);
      zx.emplace_back((*erased)[n].z.id, (*samples)[n].x.id);
    }
    eval->plugin.privacy_bits = PluginMi(*JointCounts::FromPairs(za), true);
    eval->plugin.utility_bits = PluginMi(*JointCounts::FromPairs(zx), true);
  }
  absl::StatusOr<FunnelCurve> curve = FunnelBounds(*truth, f.points);
  if (!curve.ok()) return curve.status();

  const fs::path dir(g.out_dir);
  const std::vector<TradeoffPoint> points = {eval->analytic, eval->plugin};
  if (absl::Status s = EmitTradeoffCsv(points, *curve, dir); !s.ok()) return s;
  Json report;
  report["analytic"] = ToJson(eval->analytic);
  report["plugin"] = ToJson(eval->plugin);
  report["inside_funnel"] = InsideFunnel(*curve, eval->analytic);
  Json tv = Json::array();
  for (const GroupTv& t : eval->group_tv) {
    tv.push_back(Json{{"concept", t.concept_id}, {"tv", t.tv}});
  }
  report["group_tv"] = std::move(tv);
  if (absl::Status s = WriteJsonFile(dir / "evaluation.json", report);
      !s.ok()) {
    return s;
  }
  std::printf("analytic  I(Z;X) %.6f  I(Z;A) %.6g\nplugin    I(Z;X) %.6f  I(Z;A) %.6g\n",
              eval->analytic.utility_bits, eval->analytic.privacy_bits,
              eval->plugin.utility_bits, eval->plugin.privacy_bits);
  return absl::OkStatus();
}

absl::Status RunFunnel(const GlobalFlags& g, const FunnelFlags& f) {
  Json config = GlobalJson("funnel", g);
  config["truth"] = f.truth;
  config["points"] = f.points;
  if (absl::Status s = WriteConfig(g, config); !s.ok()) return s;

  absl::StatusOr<Json> truth_json = ReadJsonFile(f.truth);
  if (!truth_json.ok()) return truth_json.status();
  absl::StatusOr<GroupedData> truth = GroupedDataFromJson(*truth_json);
  if (!truth.ok()) return truth.status();
  absl::StatusOr<FunnelCurve> curve = FunnelBounds(*truth, f.points);
  if (!curve.ok()) return curve.status();

  const fs::path dir(g.out_dir);
  if (g.format == "json") {
    Json j{{"u", curve->u_grid},
           {"lower", curve->lower},
           {"upper", curve->upper},
           {"h_x", curve->h_x},
           {"h_x_given_a", curve->h_x_given_a},
           {"i_ax", curve->i_ax}};
    if (absl::Status s = WriteJsonFile(dir / "funnel.json", j); !s.ok()) return s;
  } else {
    if (absl::Status s = EmitTradeoffCsv({}, *curve, dir); !s.ok()) return s;
  }
  std::printf("H(X) %.6f  H(X|A) %.6f  I(A;X) %.6f  upper(H(X)) %.6f\n",
              curve->h_x, curve->h_x_given_a, curve->i_ax,
              curve->upper.back());
  return absl::OkStatus();
}

absl::Status RunMec(const GlobalFlags& g, const MecFlags& f) {
  Json config = GlobalJson("mec", g);
  config["p"] = f.p;
  config["q"] = f.q;
  config["oracle"] = f.oracle;
  if (absl::Status s = WriteConfig(g, config); !s.ok()) return s;

  absl::StatusOr<Json> pj = ReadJsonFile(f.p);
  if (!pj.ok()) return pj.status();
  absl::StatusOr<Json> qj = ReadJsonFile(f.q);
  if (!qj.ok()) return qj.status();
  absl::StatusOr<Categorical> p = CategoricalFromJson(*pj);
  if (!p.ok()) return p.status();
  absl::StatusOr<Categorical> q = CategoricalFromJson(*qj);
  if (!q.ok()) return q.status();
  absl::StatusOr<Coupling> coupling = MinEntropyCoupling(
      *p, *q, f.oracle ? HminMethod::kOracle : HminMethod::kGreedy);
  if (!coupling.ok()) return coupling.status();

  const fs::path dir(g.out_dir);
  absl::Status s = g.format == "json"
                       ? WriteJsonFile(dir / "coupling.json", ToJson(*coupling))
                       : WriteCouplingCsv(dir / "coupling.csv", *coupling);
  if (!s.ok()) return s;
  std::printf("entropy_bits %.5f\n", CouplingEntropy(*coupling));
  return absl::OkStatus();
}

absl::Status RunPic(const GlobalFlags& g, const PicFlags& f) {
  Json config = GlobalJson("pic", g);
  config["truth"] = f.truth;
  if (absl::Status s = WriteConfig(g, config); !s.ok()) return s;

  absl::StatusOr<Json> truth_json = ReadJsonFile(f.truth);
  if (!truth_json.ok()) return truth_json.status();
  absl::StatusOr<GroupedData> truth =
      GroupedDataFromJson(*truth_json, AssumptionCheck::kDiagnostic);
  if (!truth.ok()) return truth.status();
  absl::StatusOr<PicSpectrum> spectrum = ComputePicSpectrum(*truth);
  if (!spectrum.ok()) return spectrum.status();
  absl::StatusOr<Feasibility> feasible = ErasureFeasible(*truth);
  if (!feasible.ok()) return feasible.status();

  Json j = ToJson(*spectrum);
  j["feasible"] = feasible->feasible;
  j["reason"] = feasible->reason;
  if (absl::Status s = WriteJsonFile(fs::path(g.out_dir) / "pic.json", j);
      !s.ok()) {
    return s;
  }
  std::printf("lambda_d %.6g  feasible %s (%s)\n", spectrum->lambda_d,
              feasible->feasible ? "yes" : "no", feasible->reason.c_str());
  return absl::OkStatus();
}

int Main(int argc, char** argv) {
  CLI::App app{"Perfect concept erasure over finite representation supports"};
  app.require_subcommand(1);
  // Global flags are accepted before or after the subcommand.
  app.fallthrough();
  GlobalFlags global;
  app.add_option("--seed", global.seed,
                 "Root seed; every random stream is derived from it and the "
                 "subcommand name")
      ->capture_default_str();
  app.add_option("--tol", global.tol,
                 "Permutation-equality tolerance. Default: DKW bound "
                 "2*sqrt(ln(200)/(2*n_min)) for samples, 1e-9 for known "
                 "distributions");
  app.add_option("--out-dir", global.out_dir, "Output directory")
      ->capture_default_str();
  app.add_option("--format", global.format,
                 "Tabular output format for funnel and mec")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();

  GenerateFlags gen;
  CLI::App* generate =
      app.add_subcommand("generate", "Synthetic concept groups and samples");
  generate->add_option("--setting", gen.setting,
                       "equal_uniform, equal_gaussian or unequal")
      ->required();
  generate->add_option("--groups", gen.groups, "Number of concepts")
      ->capture_default_str();
  generate->add_option("--support", gen.support, "Symbols per concept")
      ->capture_default_str();
  generate->add_option("--samples", gen.samples, "Samples per concept")
      ->capture_default_str();
  generate->add_option("--alpha", gen.alpha,
                       "Dirichlet concentration for the unequal setting")
      ->capture_default_str();

  EraseFlags erase;
  CLI::App* erase_cmd = app.add_subcommand(
      "erase", "Build a perfect erasure function and apply it to samples");
  erase_cmd->add_option("--samples", erase.samples, "Sample CSV (x,concept)")
      ->required();
  erase_cmd->add_option("--truth", erase.truth,
                        "Known group distributions (JSON); replaces the "
                        "empirical estimates");
  erase_cmd->add_flag("--use-bo", erase.use_bo,
                      "Search Q with GP-UCB Bayesian optimization as well");
  erase_cmd->add_option("--bo-budget", erase.bo_budget,
                        "Objective evaluations for Bayesian optimization")
      ->capture_default_str();
  erase_cmd->add_option("--bo-seed", erase.bo_seed,
                        "Bayesian optimization seed (default: derived)");
  erase_cmd->add_option("--bo-kappa", erase.bo_kappa, "UCB exploration weight")
      ->capture_default_str();
  erase_cmd->add_option("--bo-candidates", erase.bo_candidates,
                        "Acquisition candidates per round")
      ->capture_default_str();
  erase_cmd->add_option("--out-size", erase.out_size,
                        "Output support size (default: largest group)");
  erase_cmd->add_option("--hmin", erase.hmin,
                        "Coupling used for J and the stochastic map")
      ->check(CLI::IsMember({"greedy", "oracle"}))
      ->capture_default_str();

  EvaluateFlags eval;
  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "Analytic and plug-in privacy/utility of an erasure run");
  evaluate->add_option("--truth", eval.truth, "Group distributions (JSON)")
      ->required();
  evaluate->add_option("--samples", eval.samples, "Original samples CSV")
      ->required();
  evaluate->add_option("--erased", eval.erased, "Erased samples CSV")
      ->required();
  evaluate->add_option("--function", eval.function, "Erasure function JSON")
      ->required();
  evaluate->add_option("--method", eval.method, "Method tag for tradeoff.csv")
      ->capture_default_str();
  evaluate->add_option("--points", eval.points, "Funnel grid size")
      ->capture_default_str();
  evaluate->add_flag("--miller-madow", eval.miller_madow,
                     "Bias-correct the plug-in estimates");

  FunnelFlags funnel;
  CLI::App* funnel_cmd =
      app.add_subcommand("funnel", "Bounds on the erasure funnel");
  funnel_cmd->add_option("--truth", funnel.truth, "Group distributions (JSON)")
      ->required();
  funnel_cmd->add_option("--points", funnel.points, "Grid size")
      ->capture_default_str();

  MecFlags mec;
  CLI::App* mec_cmd =
      app.add_subcommand("mec", "Minimum entropy coupling of two distributions");
  mec_cmd->add_option("--p", mec.p, "Row distribution (JSON)")->required();
  mec_cmd->add_option("--q", mec.q, "Column distribution (JSON)")->required();
  mec_cmd->add_flag("--oracle", mec.oracle,
                    "Exact coupling by vertex enumeration (at most 20 cells)");

  PicFlags pic;
  CLI::App* pic_cmd = app.add_subcommand(
      "pic", "Principal inertia components and erasure feasibility");
  pic_cmd->add_option("--truth", pic.truth, "Group distributions (JSON)")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kConfig;
  }

  absl::Status status;
  if (*generate) {
    status = RunGenerate(global, gen);
  } else if (*erase_cmd) {
    status = RunErase(global, erase);
  } else if (*evaluate) {
    status = RunEvaluate(global, eval);
  } else if (*funnel_cmd) {
    status = RunFunnel(global, funnel);
  } else if (*mec_cmd) {
    status = RunMec(global, mec);
  } else if (*pic_cmd) {
    status = RunPic(global, pic);
  }
  if (!status.ok()) {
    std::fprintf(stderr, "error: %s\n", status.ToString().c_str());
  }
  return ExitCodeFor(status);
}

}  // namespace
}  // namespace pefkit

int main(int argc, char** argv) { return pefkit::Main(argc, argv); }
