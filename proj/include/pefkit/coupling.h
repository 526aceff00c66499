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

// Couplings between two categorical distributions and minimum entropy
// coupling (MEC) solvers.

#ifndef PEFKIT_COUPLING_H_
#define PEFKIT_COUPLING_H_

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "absl/status/statusor.h"
#include "pefkit/dist_core.h"

namespace pefkit {

inline constexpr double kCouplingTolerance = 1e-8;
// Residual mass below this is treated as exhausted by the greedy solver.
inline constexpr double kGreedyExhausted = 1e-12;

// A joint distribution matrix; rows follow `row_support`, columns
// `col_support`.
class Coupling {
 public:
  // Entries must be non-negative and sum to 1 within kCouplingTolerance.
  static absl::StatusOr<Coupling> Create(std::vector<Symbol> row_support,
                                         std::vector<Symbol> col_support,
                                         Eigen::MatrixXd mass);

  const std::vector<Symbol>& row_support() const { return row_support_; }
  const std::vector<Symbol>& col_support() const { return col_support_; }
  const Eigen::MatrixXd& mass() const { return mass_; }

  std::vector<double> RowMarginal() const;
  std::vector<double> ColumnMarginal() const;

  // Largest deviation of the marginals from p and q, matched by symbol.
  double MarginalError(const Categorical& p, const Categorical& q) const;

  Coupling Transposed() const;

 private:
  friend Coupling GreedyMec(const Categorical& p, const Categorical& q);
  friend absl::StatusOr<Coupling> MecOracle(const Categorical& p,
                                            const Categorical& q,
                                            int max_cells);

  Coupling(std::vector<Symbol> rows, std::vector<Symbol> cols,
           Eigen::MatrixXd mass)
      : row_support_(std::move(rows)),
        col_support_(std::move(cols)),
        mass_(std::move(mass)) {}

  std::vector<Symbol> row_support_;
  std::vector<Symbol> col_support_;
  Eigen::MatrixXd mass_;
};

// Joint entropy in bits.
double CouplingEntropy(const Coupling& c);

// Greedy approximate MEC: repeatedly couple the largest residual masses of p
// and q (ties by ascending symbol id). At most |p| + |q| - 1 cells are filled.
Coupling GreedyMec(const Categorical& p, const Categorical& q);

inline constexpr int kDefaultOracleCells = 20;

// Exact MEC by enumerating every vertex (basic feasible solution) of the
// transportation polytope. Entropy is concave, so the minimum sits at a
// vertex. Fails with OutOfRange when |p| * |q| > max_cells.
absl::StatusOr<Coupling> MecOracle(const Categorical& p, const Categorical& q,
                                   int max_cells = kDefaultOracleCells);

enum class HminMethod { kGreedy, kOracle };

absl::StatusOr<Coupling> MinEntropyCoupling(const Categorical& p,
                                            const Categorical& q,
                                            HminMethod method);

// Row k divided by p_k: the conditional P(col | row = x_k). Requires the row
// marginals of `c` to match p within kCouplingTolerance.
absl::StatusOr<std::vector<Categorical>> ConditionalRows(const Coupling& c,
                                                         const Categorical& p);

// Joint search over per-group couplings Gamma_i (|X_i| x out_size) sharing a
// common column marginal, maximizing
//   (1/|A|) sum_i H(colsum Gamma_i) - sum_i p(a_i) H(Gamma_i)
// by projected gradient ascent. Only practical at small scale.
struct PgdProblem {
  std::vector<Categorical> group_dists;
  std::vector<double> priors;
  int out_size = 2;
  double step_size = 0.01;
  int max_iters = 1000;
  double projection_tol = 1e-8;
  // Independent random starts; the best final objective wins.
  int restarts = 1;
  // Also start from the greedy couplings of every group onto each sorted
  // P_k that fits in out_size.
  bool greedy_starts = true;
};

struct PgdResult {
  std::vector<Coupling> couplings;
  // Shared column marginal (zero columns trimmed).
  Categorical q;
  double objective = 0;
  // Objective after every accepted step of the winning start.
  std::vector<double> trace;
  // Max violation of row/column/non-negativity constraints at return.
  double max_residual = 0;
  int iterations = 0;
  bool converged = false;
  bool size_warning = false;
};

absl::StatusOr<PgdResult> PgdSolve(const PgdProblem& problem,
                                   std::uint64_t rng_seed);

}  // namespace pefkit

#endif  // PEFKIT_COUPLING_H_
