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

#include "pefkit/coupling.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <random>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "pefkit/random.h"

namespace pefkit {
namespace {

// Index of the largest residual above kGreedyExhausted, ties by lowest id.
std::optional<std::size_t> LargestResidual(const std::vector<double>& residual,
                                           const std::vector<Symbol>& ids) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < residual.size(); ++i) {
    if (residual[i] <= kGreedyExhausted) continue;
    if (!best || residual[i] > residual[*best] ||
        (residual[i] == residual[*best] && ids[i].id < ids[*best].id)) {
      best = i;
    }
  }
  return best;
}

double MatrixEntropy(const Eigen::MatrixXd& m) {
  return Entropy(std::span<const double>(m.data(), m.size()));
}

// Depth-first enumeration of spanning trees of the complete bipartite graph
// K_{rows, cols}; each tree is a basis of the transportation problem.
class VertexEnumerator {
 public:
  VertexEnumerator(const std::vector<double>& p, const std::vector<double>& q)
      : p_(p),
        q_(q),
        rows_(static_cast<int>(p.size())),
        cols_(static_cast<int>(q.size())),
        basis_size_(rows_ + cols_ - 1) {}

  Eigen::MatrixXd Run() {
    std::vector<int> parent(rows_ + cols_);
    std::iota(parent.begin(), parent.end(), 0);
    Search(0, parent);
    return best_;
  }

 private:
  static int Find(std::vector<int>& parent, int v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  }

  void Search(int cell, std::vector<int>& parent) {
    const int total = rows_ * cols_;
    if (static_cast<int>(chosen_.size()) == basis_size_) {
      Evaluate();
      return;
    }
    if (total - cell < basis_size_ - static_cast<int>(chosen_.size())) return;

    const int r = cell / cols_;
    const int c = cell % cols_;
    const int root_r = Find(parent, r);
    const int root_c = Find(parent, rows_ + c);
    if (root_r != root_c) {
      std::vector<int> merged = parent;
      merged[root_r] = root_c;
      chosen_.push_back(cell);
      Search(cell + 1, merged);
      chosen_.pop_back();
    }
    Search(cell + 1, parent);
  }

  // Solves the basis by peeling leaves and keeps it if feasible and better.
  void Evaluate() {
    std::vector<double> row_left = p_;
    std::vector<double> col_left = q_;
    std::vector<int> degree(rows_ + cols_, 0);
    for (int cell : chosen_) {
      ++degree[cell / cols_];
      ++degree[rows_ + cell % cols_];
    }
    std::vector<bool> done(chosen_.size(), false);
    Eigen::MatrixXd mass = Eigen::MatrixXd::Zero(rows_, cols_);
    for (std::size_t solved = 0; solved < chosen_.size(); ++solved) {
      bool progressed = false;
      for (std::size_t e = 0; e < chosen_.size() && !progressed; ++e) {
        if (done[e]) continue;
        const int r = chosen_[e] / cols_;
        const int c = chosen_[e] % cols_;
        double value;
        if (degree[r] == 1) {
          value = row_left[r];
        } else if (degree[rows_ + c] == 1) {
          value = col_left[c];
        } else {
          continue;
        }
        if (value < -1e-12) return;
        value = std::max(0.0, value);
        mass(r, c) = value;
        row_left[r] -= value;
        col_left[c] -= value;
        --degree[r];
        --degree[rows_ + c];
        done[e] = true;
        progressed = true;
      }
      if (!progressed) return;
    }
    for (double left : row_left) {
      if (std::abs(left) > 1e-9) return;
    }
    for (double left : col_left) {
      if (std::abs(left) > 1e-9) return;
    }
    const double h = MatrixEntropy(mass);
    if (h < best_entropy_) {
      best_entropy_ = h;
      best_ = std::move(mass);
    }
  }

  const std::vector<double>& p_;
  const std::vector<double>& q_;
  const int rows_;
  const int cols_;
  const int basis_size_;
  std::vector<int> chosen_;
  double best_entropy_ = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd best_;
};

}  // namespace

absl::StatusOr<Coupling> Coupling::Create(std::vector<Symbol> row_support,
                                          std::vector<Symbol> col_support,
                                          Eigen::MatrixXd mass) {
  if (mass.rows() != static_cast<Eigen::Index>(row_support.size()) ||
      mass.cols() != static_cast<Eigen::Index>(col_support.size())) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "mass is %dx%d but supports are %dx%d", mass.rows(), mass.cols(),
        row_support.size(), col_support.size()));
  }
  for (Eigen::Index i = 0; i < mass.size(); ++i) {
    const double v = mass.data()[i];
    if (!std::isfinite(v) || v < 0) {
      return absl::InvalidArgumentError(
          absl::StrCat("coupling entry must be non-negative, got ", v));
    }
  }
  if (std::abs(mass.sum() - 1.0) > kCouplingTolerance) {
    return absl::InvalidArgumentError(
        absl::StrFormat("coupling mass sums to %.12g", mass.sum()));
  }
  return Coupling(std::move(row_support), std::move(col_support),
                  std::move(mass));
}

std::vector<double> Coupling::RowMarginal() const {
  Eigen::VectorXd sums = mass_.rowwise().sum();
  return std::vector<double>(sums.data(), sums.data() + sums.size());
}

std::vector<double> Coupling::ColumnMarginal() const {
  Eigen::RowVectorXd sums = mass_.colwise().sum();
  return std::vector<double>(sums.data(), sums.data() + sums.size());
}

double Coupling::MarginalError(const Categorical& p,
                               const Categorical& q) const {
  double worst = 0;
  const std::vector<double> rows = RowMarginal();
  const std::vector<double> cols = ColumnMarginal();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    worst = std::max(worst, std::abs(rows[i] - p.ProbabilityOf(row_support_[i])));
  }
  for (std::size_t j = 0; j < cols.size(); ++j) {
    worst = std::max(worst, std::abs(cols[j] - q.ProbabilityOf(col_support_[j])));
  }
  // Mass on symbols the coupling does not index at all.
  double p_covered = 0;
  for (Symbol s : row_support_) p_covered += p.ProbabilityOf(s);
  double q_covered = 0;
  for (Symbol s : col_support_) q_covered += q.ProbabilityOf(s);
  worst = std::max({worst, std::abs(1.0 - p_covered), std::abs(1.0 - q_covered)});
  return worst;
}

Coupling Coupling::Transposed() const {
  return Coupling(col_support_, row_support_, mass_.transpose());
}

double CouplingEntropy(const Coupling& c) { return MatrixEntropy(c.mass()); }

Coupling GreedyMec(const Categorical& p, const Categorical& q) {
  std::vector<double> row_left = p.probs();
  std::vector<double> col_left = q.probs();
  Eigen::MatrixXd mass = Eigen::MatrixXd::Zero(
      static_cast<Eigen::Index>(p.size()), static_cast<Eigen::Index>(q.size()));
  while (true) {
    std::optional<std::size_t> i = LargestResidual(row_left, p.support());
    std::optional<std::size_t> j = LargestResidual(col_left, q.support());
    if (!i || !j) break;
    const double m = std::min(row_left[*i], col_left[*j]);
    mass(static_cast<Eigen::Index>(*i), static_cast<Eigen::Index>(*j)) += m;
    row_left[*i] -= m;
    col_left[*j] -= m;
  }
  return Coupling(p.support(), q.support(), std::move(mass));
}

absl::StatusOr<Coupling> MecOracle(const Categorical& p, const Categorical& q,
                                   int max_cells) {
  const std::size_t cells = p.size() * q.size();
  if (cells > static_cast<std::size_t>(max_cells)) {
    return absl::OutOfRangeError(absl::StrFormat(
        "exact MEC limited to %d cells, instance has %d", max_cells, cells));
  }
  VertexEnumerator enumerator(p.probs(), q.probs());
  Eigen::MatrixXd best = enumerator.Run();
  if (best.size() == 0) {
    return absl::InternalError("no feasible vertex found");
  }
  return Coupling(p.support(), q.support(), std::move(best));
}

absl::StatusOr<Coupling> MinEntropyCoupling(const Categorical& p,
                                            const Categorical& q,
                                            HminMethod method) {
  if (method == HminMethod::kOracle) return MecOracle(p, q);
  return GreedyMec(p, q);
}

absl::StatusOr<std::vector<Categorical>> ConditionalRows(
    const Coupling& c, const Categorical& p) {
  if (c.row_support().size() != p.size()) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "coupling has %d rows, distribution has %d symbols",
        c.row_support().size(), p.size()));
  }
  const std::vector<double> rows = c.RowMarginal();
  std::vector<Categorical> out;
  out.reserve(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const Symbol x = c.row_support()[k];
    const double px = p.ProbabilityOf(x);
    if (!(px > 0)) {
      return absl::InvalidArgumentError(
          absl::StrCat("row symbol ", x.id, " has zero mass"));
    }
    if (std::abs(rows[k] - px) > kCouplingTolerance) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "row %d sums to %.12g but p(x) = %.12g", x.id, rows[k], px));
    }
    std::vector<double> conditional(c.col_support().size());
    for (std::size_t j = 0; j < conditional.size(); ++j) {
      conditional[j] = c.mass()(static_cast<Eigen::Index>(k),
                                static_cast<Eigen::Index>(j)) /
                       px;
    }
    absl::StatusOr<Categorical> row =
        Categorical::Create(c.col_support(), std::move(conditional));
    if (!row.ok()) return row.status();
    out.push_back(*std::move(row));
  }
  return out;
}

namespace {

constexpr double kLogFloor = 1e-15;
constexpr int kMaxDykstraSweeps = 20000;

// Flattened per-group couplings and the affine constraints tying them
// together: fixed row sums and a common column marginal.
class PgdSolver {
 public:
  explicit PgdSolver(const PgdProblem& problem)
      : problem_(problem),
        groups_(problem.group_dists.size()),
        cols_(problem.out_size) {
    offsets_.push_back(0);
    for (const Categorical& dist : problem.group_dists) {
      offsets_.push_back(offsets_.back() +
                         static_cast<Eigen::Index>(dist.size()) * cols_);
    }
    BuildConstraints();
  }

  Eigen::Index num_vars() const { return offsets_.back(); }

  double Objective(const Eigen::VectorXd& x) const {
    double value = 0;
    for (std::size_t i = 0; i < groups_; ++i) {
      const Eigen::Map<const Eigen::MatrixXd> g = Block(x, i);
      Eigen::RowVectorXd col = g.colwise().sum();
      value += Entropy(std::span<const double>(col.data(), col.size())) /
               static_cast<double>(groups_);
      value -= problem_.priors[i] *
               Entropy(std::span<const double>(g.data(), g.size()));
    }
    return value;
  }

  Eigen::VectorXd Gradient(const Eigen::VectorXd& x) const {
    Eigen::VectorXd grad(x.size());
    const double inv_ln2 = 1.0 / std::log(2.0);
    for (std::size_t i = 0; i < groups_; ++i) {
      const Eigen::Map<const Eigen::MatrixXd> g = Block(x, i);
      Eigen::RowVectorXd col = g.colwise().sum();
      Eigen::Map<Eigen::MatrixXd> out(grad.data() + offsets_[i], g.rows(),
                                      g.cols());
      for (Eigen::Index c = 0; c < g.cols(); ++c) {
        const double col_term = -(std::log2(std::max(col(c), kLogFloor)) +
                                  inv_ln2) /
                                static_cast<double>(groups_);
        for (Eigen::Index r = 0; r < g.rows(); ++r) {
          out(r, c) = col_term +
                      problem_.priors[i] *
                          (std::log2(std::max(g(r, c), kLogFloor)) + inv_ln2);
        }
      }
    }
    return grad;
  }

  // Dykstra alternating projection onto {A x = b} and {x >= 0}.
  Eigen::VectorXd Project(const Eigen::VectorXd& y, double tol) const {
    Eigen::VectorXd x = y;
    Eigen::VectorXd q_inc = Eigen::VectorXd::Zero(y.size());
    for (int sweep = 0; sweep < kMaxDykstraSweeps; ++sweep) {
      // The affine increment lies in range(A^T) and is annihilated by the
      // affine projection, so only the orthant increment is tracked.
      Eigen::VectorXd u = ProjectAffine(x);
      Eigen::VectorXd shifted = u + q_inc;
      x = shifted.cwiseMax(0.0);
      q_inc = shifted - x;
      if (AffineResidual(x) <= tol) break;
    }
    return x;
  }

  double AffineResidual(const Eigen::VectorXd& x) const {
    return (constraints_ * x - rhs_).cwiseAbs().maxCoeff();
  }

  double Residual(const Eigen::VectorXd& x) const {
    return std::max(AffineResidual(x), std::max(0.0, -x.minCoeff()));
  }

  Eigen::VectorXd RandomStart(std::mt19937_64& rng) const {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Eigen::VectorXd x(num_vars());
    for (Eigen::Index k = 0; k < x.size(); ++k) x(k) = unit(rng);
    // Scale rows to roughly the right mass before projecting.
    for (std::size_t i = 0; i < groups_; ++i) {
      Eigen::Map<Eigen::MatrixXd> g(x.data() + offsets_[i],
                                    problem_.group_dists[i].size(), cols_);
      for (Eigen::Index r = 0; r < g.rows(); ++r) {
        g.row(r) *= problem_.group_dists[i].probs()[r] / g.row(r).sum();
      }
    }
    return Project(x, problem_.projection_tol);
  }

  // Greedy couplings of every group onto P_k sorted in decreasing order and
  // placed on the first |X_k| output columns.
  std::optional<Eigen::VectorXd> GreedyStart(std::size_t k) const {
    const Categorical& target = problem_.group_dists[k];
    if (static_cast<Eigen::Index>(target.size()) > cols_) return std::nullopt;
    std::vector<Symbol> columns;
    std::vector<double> sorted;
    for (std::size_t idx : DescendingOrder(target)) {
      columns.push_back(Symbol{static_cast<std::int64_t>(columns.size())});
      sorted.push_back(target.probs()[idx]);
    }
    absl::StatusOr<Categorical> q = Categorical::Create(columns, sorted);
    if (!q.ok()) return std::nullopt;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(num_vars());
    for (std::size_t i = 0; i < groups_; ++i) {
      const Coupling c = GreedyMec(problem_.group_dists[i], *q);
      Eigen::Map<Eigen::MatrixXd> block(
          x.data() + offsets_[i],
          static_cast<Eigen::Index>(problem_.group_dists[i].size()), cols_);
      for (std::size_t j = 0; j < c.col_support().size(); ++j) {
        block.col(c.col_support()[j].id) =
            c.mass().col(static_cast<Eigen::Index>(j));
      }
    }
    return x;
  }

  Eigen::Map<const Eigen::MatrixXd> Block(const Eigen::VectorXd& x,
                                          std::size_t i) const {
    return Eigen::Map<const Eigen::MatrixXd>(
        x.data() + offsets_[i],
        static_cast<Eigen::Index>(problem_.group_dists[i].size()), cols_);
  }

 private:
  void BuildConstraints() {
    Eigen::Index n_rows = 0;
    for (const Categorical& dist : problem_.group_dists) {
      n_rows += static_cast<Eigen::Index>(dist.size());
    }
    n_rows += static_cast<Eigen::Index>(groups_ - 1) * cols_;
    constraints_ = Eigen::MatrixXd::Zero(n_rows, num_vars());
    rhs_ = Eigen::VectorXd::Zero(n_rows);
    // Column-major blocks: entry (r, c) of group i lives at
    // offsets_[i] + c * rows_i + r.
    Eigen::Index row = 0;
    for (std::size_t i = 0; i < groups_; ++i) {
      const Eigen::Index rows_i =
          static_cast<Eigen::Index>(problem_.group_dists[i].size());
      for (Eigen::Index r = 0; r < rows_i; ++r, ++row) {
        for (Eigen::Index c = 0; c < cols_; ++c) {
          constraints_(row, offsets_[i] + c * rows_i + r) = 1.0;
        }
        rhs_(row) = problem_.group_dists[i].probs()[r];
      }
    }
    const Eigen::Index rows_0 =
        static_cast<Eigen::Index>(problem_.group_dists[0].size());
    for (std::size_t i = 1; i < groups_; ++i) {
      const Eigen::Index rows_i =
          static_cast<Eigen::Index>(problem_.group_dists[i].size());
      for (Eigen::Index c = 0; c < cols_; ++c, ++row) {
        for (Eigen::Index r = 0; r < rows_i; ++r) {
          constraints_(row, offsets_[i] + c * rows_i + r) = 1.0;
        }
        for (Eigen::Index r = 0; r < rows_0; ++r) {
          constraints_(row, offsets_[0] + c * rows_0 + r) = -1.0;
        }
      }
    }
    // The constraint rows are linearly dependent (total mass appears once per
    // group), hence the pseudo-inverse.
    Eigen::MatrixXd gram = constraints_ * constraints_.transpose();
    gram_pinv_ = gram.completeOrthogonalDecomposition().pseudoInverse();
  }

  Eigen::VectorXd ProjectAffine(const Eigen::VectorXd& x) const {
    return x - constraints_.transpose() *
                   (gram_pinv_ * (constraints_ * x - rhs_));
  }

  const PgdProblem& problem_;
  const std::size_t groups_;
  const Eigen::Index cols_;
  std::vector<Eigen::Index> offsets_;
  Eigen::MatrixXd constraints_;
  Eigen::VectorXd rhs_;
  Eigen::MatrixXd gram_pinv_;
};

struct Ascent {
  Eigen::VectorXd x;
  double objective = 0;
  std::vector<double> trace;
  int iterations = 0;
  bool converged = false;
};

Ascent Climb(const PgdSolver& solver, const PgdProblem& problem,
             Eigen::VectorXd start) {
  Ascent run;
  run.x = std::move(start);
  run.objective = solver.Objective(run.x);
  run.trace.push_back(run.objective);
  double step = problem.step_size;
  constexpr double kMinStep = 1e-12;
  constexpr double kStall = 1e-12;
  int stalled = 0;
  for (run.iterations = 0; run.iterations < problem.max_iters;
       ++run.iterations) {
    const Eigen::VectorXd grad = solver.Gradient(run.x);
    const Eigen::VectorXd candidate =
        solver.Project(run.x + step * grad, problem.projection_tol);
    const double value = solver.Objective(candidate);
    if (value >= run.objective) {
      const double gain = value - run.objective;
      const double moved = (candidate - run.x).cwiseAbs().maxCoeff();
      run.x = candidate;
      run.objective = value;
      run.trace.push_back(value);
      step = std::min(step * 1.5, problem.step_size * 100);
      stalled = (gain <= kStall && moved <= 1e-10) ? stalled + 1 : 0;
      if (stalled >= 5) {
        run.converged = true;
        break;
      }
    } else {
      step *= 0.5;
      if (step < kMinStep) {
        run.converged = true;
        break;
      }
    }
  }
  return run;
}

}  // namespace

absl::StatusOr<PgdResult> PgdSolve(const PgdProblem& problem,
                                   std::uint64_t rng_seed) {
  if (problem.group_dists.empty()) {
    return absl::InvalidArgumentError("no group distributions");
  }
  if (problem.priors.size() != problem.group_dists.size()) {
    return absl::InvalidArgumentError("priors and groups differ in length");
  }
  if (problem.out_size < 1) {
    return absl::InvalidArgumentError("out_size must be at least 1");
  }
  if (!(problem.step_size > 0)) {
    return absl::InvalidArgumentError("step_size must be positive");
  }
  if (problem.max_iters < 1 || problem.restarts < 1 ||
      !(problem.projection_tol > 0)) {
    return absl::InvalidArgumentError(
        "max_iters, restarts and projection_tol must be positive");
  }
  constexpr int kSoftLimit = 16;
  bool size_warning = problem.out_size > kSoftLimit;
  std::int64_t max_id = -1;
  for (const Categorical& dist : problem.group_dists) {
    size_warning |= dist.size() > static_cast<std::size_t>(kSoftLimit);
    for (Symbol s : dist.support()) max_id = std::max(max_id, s.id);
  }

  PgdSolver solver(problem);
  std::optional<Ascent> best;
  for (int start = 0; start < problem.restarts; ++start) {
    std::mt19937_64 rng(DeriveSeed(rng_seed, static_cast<std::uint64_t>(start)));
    Ascent run = Climb(solver, problem, solver.RandomStart(rng));
    if (!best || run.objective > best->objective) best = std::move(run);
  }
  if (problem.greedy_starts) {
    for (std::size_t k = 0; k < problem.group_dists.size(); ++k) {
      std::optional<Eigen::VectorXd> start = solver.GreedyStart(k);
      if (!start) continue;
      Ascent run = Climb(solver, problem, *std::move(start));
      if (run.objective > best->objective) best = std::move(run);
    }
  }

  // Tighten feasibility of the winner before building couplings.
  Eigen::VectorXd x = solver.Project(
      best->x, std::min(problem.projection_tol, 1e-12));
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    if (x(k) < 1e-15) x(k) = 0;
  }

  std::vector<Symbol> out_support;
  for (int j = 0; j < problem.out_size; ++j) {
    out_support.push_back(Symbol{max_id + 1 + j});
  }
  Eigen::VectorXd shared = Eigen::VectorXd::Zero(problem.out_size);
  std::vector<Coupling> couplings;
  for (std::size_t i = 0; i < problem.group_dists.size(); ++i) {
    Eigen::MatrixXd block = solver.Block(x, i);
    shared += block.colwise().sum().transpose() /
              static_cast<double>(problem.group_dists.size());
    absl::StatusOr<Coupling> coupling = Coupling::Create(
        problem.group_dists[i].support(), out_support, std::move(block));
    if (!coupling.ok()) return coupling.status();
    couplings.push_back(*std::move(coupling));
  }
  absl::StatusOr<Categorical> q = Categorical::Create(
      out_support, std::vector<double>(shared.data(),
                                       shared.data() + shared.size()));
  if (!q.ok()) return q.status();
  return PgdResult{
      .couplings = std::move(couplings),
      .q = *std::move(q),
      .objective = solver.Objective(x),
      .trace = std::move(best->trace),
      .max_residual = solver.Residual(x),
      .iterations = best->iterations,
      .converged = best->converged,
      .size_warning = size_warning,
  };
}

}  // namespace pefkit
