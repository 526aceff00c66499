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

#include "pefkit/qopt.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <Eigen/Dense>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "pefkit/random.h"

namespace pefkit {
namespace {

constexpr double kFlushBelow = 1e-12;
constexpr double kLogFloor = -40.0;
constexpr double kGpNoise = 1e-6;

struct Observation {
  Eigen::VectorXd theta;
  double j_value;
};

Eigen::VectorXd ToVector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(),
                                           static_cast<Eigen::Index>(v.size()));
}

std::vector<double> DirichletDraw(std::mt19937_64& rng, int size,
                                  double alpha) {
  std::gamma_distribution<double> gamma(alpha, 1.0);
  std::vector<double> draw(size);
  double total = 0;
  for (double& v : draw) {
    v = gamma(rng);
    total += v;
  }
  if (!(total > 0)) {
    std::fill(draw.begin(), draw.end(), 1.0 / size);
    return draw;
  }
  for (double& v : draw) v /= total;
  return draw;
}

double MedianPairwiseDistance(const std::vector<Observation>& obs) {
  std::vector<double> d;
  for (std::size_t a = 0; a < obs.size(); ++a) {
    for (std::size_t b = a + 1; b < obs.size(); ++b) {
      d.push_back((obs[a].theta - obs[b].theta).norm());
    }
  }
  if (d.empty()) return 0;
  const std::size_t mid = d.size() / 2;
  std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid),
                   d.end());
  double median = d[mid];
  if (d.size() % 2 == 0) {
    const double lower =
        *std::max_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid));
    median = 0.5 * (median + lower);
  }
  return median;
}

// Squared-exponential Gaussian process on standardized targets.
class GaussianProcess {
 public:
  static std::optional<GaussianProcess> Fit(const std::vector<Observation>& obs,
                                            double lengthscale) {
    if (!(lengthscale > 0) || !std::isfinite(lengthscale)) return std::nullopt;
    GaussianProcess gp;
    const Eigen::Index n = static_cast<Eigen::Index>(obs.size());
    const Eigen::Index dim = obs.front().theta.size();
    gp.inputs_.resize(dim, n);
    Eigen::VectorXd y(n);
    for (Eigen::Index k = 0; k < n; ++k) {
      gp.inputs_.col(k) = obs[k].theta;
      y(k) = obs[k].j_value;
    }
    gp.mean_ = y.mean();
    const double var = (y.array() - gp.mean_).square().mean();
    gp.scale_ = var > 0 ? std::sqrt(var) : 1.0;
    y = (y.array() - gp.mean_) / gp.scale_;
    gp.inv_two_l2_ = 1.0 / (2.0 * lengthscale * lengthscale);

    Eigen::MatrixXd k = gp.Kernel(gp.inputs_);
    double jitter = kGpNoise;
    for (int attempt = 0; attempt < 6; ++attempt) {
      Eigen::MatrixXd noisy = k;
      noisy.diagonal().array() += jitter;
      gp.chol_.compute(noisy);
      if (gp.chol_.info() == Eigen::Success) {
        gp.alpha_ = gp.chol_.solve(y);
        gp.noise_ = jitter;
        return gp;
      }
      jitter *= 10;
    }
    return std::nullopt;
  }

  // Upper confidence bound mean + kappa * stddev, in standardized units.
  Eigen::VectorXd Ucb(const Eigen::MatrixXd& candidates, double kappa) const {
    const Eigen::MatrixXd cross = Kernel(candidates);  // n_obs x n_cand
    const Eigen::VectorXd mean = cross.transpose() * alpha_;
    const Eigen::MatrixXd v = chol_.matrixL().solve(cross);
    Eigen::VectorXd ucb(candidates.cols());
    for (Eigen::Index c = 0; c < candidates.cols(); ++c) {
      const double var = std::max(0.0, 1.0 + noise_ - v.col(c).squaredNorm());
      ucb(c) = mean(c) + kappa * std::sqrt(var);
    }
    return ucb;
  }

 private:
  Eigen::MatrixXd Kernel(const Eigen::MatrixXd& points) const {
    Eigen::MatrixXd out(inputs_.cols(), points.cols());
    for (Eigen::Index c = 0; c < points.cols(); ++c) {
      for (Eigen::Index r = 0; r < inputs_.cols(); ++r) {
        out(r, c) = std::exp(-(inputs_.col(r) - points.col(c)).squaredNorm() *
                             inv_two_l2_);
      }
    }
    return out;
  }

  Eigen::MatrixXd inputs_;
  Eigen::LLT<Eigen::MatrixXd> chol_;
  Eigen::VectorXd alpha_;
  double mean_ = 0;
  double scale_ = 1;
  double inv_two_l2_ = 1;
  double noise_ = kGpNoise;
};

}  // namespace

std::string_view QSourceName(QSource source) {
  switch (source) {
    case QSource::kStationary:
      return "stationary";
    case QSource::kBayesOpt:
      return "bayesopt";
    case QSource::kUser:
      return "user";
  }
  return "user";
}

absl::Status ValidateBoConfig(const BoConfig& cfg) {
  if (cfg.budget < 1) {
    return absl::InvalidArgumentError("BO budget must be at least 1");
  }
  if (!(cfg.kappa > 0)) {
    return absl::InvalidArgumentError("BO kappa must be positive");
  }
  if (cfg.n_acq_candidates < 1) {
    return absl::InvalidArgumentError(
        "BO needs at least one acquisition candidate");
  }
  if (cfg.kernel_lengthscale && !(*cfg.kernel_lengthscale > 0)) {
    return absl::InvalidArgumentError("kernel lengthscale must be positive");
  }
  if (cfg.n_initial_random < 0 || !(cfg.dirichlet_alpha > 0)) {
    return absl::InvalidArgumentError(
        "initial design size must be >= 0 and Dirichlet alpha > 0");
  }
  return absl::OkStatus();
}

absl::StatusOr<double> ObjectiveJ(const Categorical& q, const GroupedData& g,
                                  HminMethod method) {
  double j = Entropy(q);
  for (std::size_t i = 0; i < g.num_groups(); ++i) {
    const double prior = g.priors()[i];
    if (!(prior > 0)) continue;
    absl::StatusOr<Coupling> coupling =
        MinEntropyCoupling(g.groups()[i].dist, q, method);
    if (!coupling.ok()) return coupling.status();
    j -= prior * CouplingEntropy(*coupling);
  }
  return j;
}

int DefaultOutSize(const GroupedData& g) {
  std::size_t out = 1;
  for (const ConceptGroup& group : g.groups()) {
    out = std::max(out, group.dist.size());
  }
  return static_cast<int>(out);
}

std::vector<Symbol> OutputSupport(const GroupedData& g, int out_size) {
  return FreshSymbols(g, static_cast<std::size_t>(std::max(out_size, 0)));
}

absl::StatusOr<std::vector<QCandidate>> ScanStationary(const GroupedData& g,
                                                       int out_size,
                                                       HminMethod method) {
  if (out_size < DefaultOutSize(g)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "out_size %d is smaller than the largest group support %d", out_size,
        DefaultOutSize(g)));
  }
  const std::vector<Symbol> out_support = OutputSupport(g, out_size);
  std::vector<QCandidate> candidates;
  for (const ConceptGroup& group : g.groups()) {
    const std::vector<std::size_t> order = DescendingOrder(group.dist);
    std::vector<Symbol> support;
    std::vector<double> probs;
    for (std::size_t k = 0; k < order.size(); ++k) {
      support.push_back(out_support[k]);
      probs.push_back(group.dist.probs()[order[k]]);
    }
    absl::StatusOr<Categorical> q =
        Categorical::Create(std::move(support), std::move(probs));
    if (!q.ok()) return q.status();
    absl::StatusOr<double> j = ObjectiveJ(*q, g, method);
    if (!j.ok()) return j.status();
    candidates.push_back(
        QCandidate{*std::move(q), *j, QSource::kStationary});
  }
  return candidates;
}

std::vector<double> SimplexFromParameters(std::span<const double> theta) {
  std::vector<double> q(theta.size());
  if (theta.empty()) return q;
  const double top = *std::max_element(theta.begin(), theta.end());
  double total = 0;
  for (std::size_t j = 0; j < theta.size(); ++j) {
    q[j] = std::exp(theta[j] - top);
    total += q[j];
  }
  double kept = 0;
  for (double& v : q) {
    v /= total;
    if (v < kFlushBelow) v = 0;
    kept += v;
  }
  for (double& v : q) v /= kept;
  return q;
}

std::vector<double> ParametersFromSimplex(std::span<const double> q) {
  std::vector<double> theta(q.size());
  for (std::size_t j = 0; j < q.size(); ++j) {
    theta[j] = q[j] > 0 ? std::max(std::log(q[j]), kLogFloor) : kLogFloor;
  }
  const double mean =
      std::accumulate(theta.begin(), theta.end(), 0.0) /
      static_cast<double>(std::max<std::size_t>(theta.size(), 1));
  for (double& t : theta) t -= mean;
  return theta;
}

absl::StatusOr<BoResult> BayesOptQ(const GroupedData& g, int out_size,
                                   const BoConfig& cfg, HminMethod method) {
  if (absl::Status status = ValidateBoConfig(cfg); !status.ok()) return status;
  if (out_size < 1) {
    return absl::InvalidArgumentError("out_size must be at least 1");
  }
  const std::vector<Symbol> out_support = OutputSupport(g, out_size);

  std::vector<Observation> observations;
  std::vector<Categorical> evaluated;
  auto evaluate = [&](std::vector<double> theta) -> absl::Status {
    const std::vector<double> probs = SimplexFromParameters(theta);
    absl::StatusOr<Categorical> q = Categorical::Create(out_support, probs);
    if (!q.ok()) return q.status();
    absl::StatusOr<double> j = ObjectiveJ(*q, g, method);
    if (!j.ok()) return j.status();
    observations.push_back(Observation{ToVector(theta), *j});
    evaluated.push_back(*std::move(q));
    return absl::OkStatus();
  };

  // Initial design: the stationary candidates, then Dirichlet draws.
  int n_stationary = 0;
  if (out_size >= DefaultOutSize(g)) {
    absl::StatusOr<std::vector<QCandidate>> stationary =
        ScanStationary(g, out_size, method);
    if (!stationary.ok()) return stationary.status();
    for (const QCandidate& candidate : *stationary) {
      std::vector<double> padded(out_size, 0.0);
      for (std::size_t k = 0; k < candidate.dist.size(); ++k) {
        padded[candidate.dist.support()[k].id - out_support.front().id] =
            candidate.dist.probs()[k];
      }
      if (absl::Status s = evaluate(ParametersFromSimplex(padded)); !s.ok()) {
        return s;
      }
      ++n_stationary;
    }
  }
  const int total_budget = std::max(cfg.budget, n_stationary);
  std::mt19937_64 rng(DeriveSeed(cfg.seed, "bayes_opt_q"));
  const int n_random =
      std::min(cfg.n_initial_random,
               total_budget - static_cast<int>(observations.size()));
  for (int k = 0; k < n_random; ++k) {
    if (absl::Status s = evaluate(ParametersFromSimplex(
            DirichletDraw(rng, out_size, cfg.dirichlet_alpha)));
        !s.ok()) {
      return s;
    }
  }

  bool fallback = false;
  std::normal_distribution<double> normal(0.0, 1.0);
  while (static_cast<int>(observations.size()) < total_budget) {
    const double lengthscale = cfg.kernel_lengthscale
                                   ? *cfg.kernel_lengthscale
                                   : MedianPairwiseDistance(observations);
    std::optional<GaussianProcess> gp;
    if (observations.size() >= 2) gp = GaussianProcess::Fit(observations, lengthscale);
    if (!gp) {
      fallback = true;
      if (absl::Status s = evaluate(ParametersFromSimplex(
              DirichletDraw(rng, out_size, cfg.dirichlet_alpha)));
          !s.ok()) {
        return s;
      }
      continue;
    }

    const auto best_it = std::max_element(
        observations.begin(), observations.end(),
        [](const Observation& a, const Observation& b) {
          return a.j_value < b.j_value;
        });
    // Half global proposals, half perturbations of the incumbent.
    Eigen::MatrixXd candidates(out_size, cfg.n_acq_candidates);
    const int n_global = (cfg.n_acq_candidates + 1) / 2;
    const double local_scale = 0.25 * lengthscale;
    for (int c = 0; c < cfg.n_acq_candidates; ++c) {
      std::vector<double> theta;
      if (c < n_global) {
        theta = ParametersFromSimplex(
            DirichletDraw(rng, out_size, cfg.dirichlet_alpha));
      } else {
        theta.resize(out_size);
        for (int j = 0; j < out_size; ++j) {
          theta[j] = best_it->theta(j) + local_scale * normal(rng);
        }
        theta = ParametersFromSimplex(SimplexFromParameters(theta));
      }
      candidates.col(c) = ToVector(theta);
    }
    const Eigen::VectorXd ucb = gp->Ucb(candidates, cfg.kappa);
    Eigen::Index pick = 0;
    ucb.maxCoeff(&pick);
    const Eigen::VectorXd chosen = candidates.col(pick);
    if (absl::Status s = evaluate(std::vector<double>(
            chosen.data(), chosen.data() + chosen.size()));
        !s.ok()) {
      return s;
    }
  }

  std::vector<double> evaluations;
  std::vector<double> best_so_far;
  std::size_t best_index = 0;
  for (std::size_t k = 0; k < observations.size(); ++k) {
    evaluations.push_back(observations[k].j_value);
    if (observations[k].j_value > observations[best_index].j_value) {
      best_index = k;
    }
    best_so_far.push_back(observations[best_index].j_value);
  }
  const Eigen::VectorXd& theta = observations[best_index].theta;
  const QSource source = static_cast<int>(best_index) < n_stationary
                             ? QSource::kStationary
                             : QSource::kBayesOpt;
  return BoResult{
      .best = QCandidate{evaluated[best_index],
                         observations[best_index].j_value, source},
      .best_parameters =
          std::vector<double>(theta.data(), theta.data() + theta.size()),
      .evaluations = std::move(evaluations),
      .best_so_far = std::move(best_so_far),
      .random_search_fallback = fallback,
  };
}

absl::StatusOr<QSelection> SelectQ(const GroupedData& g, int out_size,
                                   const BoConfig& cfg, bool use_bo,
                                   HminMethod method) {
  absl::StatusOr<std::vector<QCandidate>> stationary =
      ScanStationary(g, out_size, method);
  if (!stationary.ok()) return stationary.status();
  std::size_t best = 0;
  for (std::size_t k = 1; k < stationary->size(); ++k) {
    if ((*stationary)[k].j_value > (*stationary)[best].j_value) best = k;
  }
  QCandidate selected = (*stationary)[best];
  std::optional<BoResult> bo;
  if (use_bo) {
    absl::StatusOr<BoResult> result = BayesOptQ(g, out_size, cfg, method);
    if (!result.ok()) return result.status();
    if (result->best.j_value > selected.j_value) selected = result->best;
    bo = *std::move(result);
  }
  return QSelection{std::move(selected), *std::move(stationary),
                    std::move(bo)};
}

}  // namespace pefkit
