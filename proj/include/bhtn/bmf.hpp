#pragma once

// Boolean matrix factorization X ~ A B by alternating minimization. With A
// fixed, every column of B is an independent single-column problem
// argmin_y d(X_i, A y); the A step is the same problem on the transposes.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "bhtn/bool_core.hpp"
#include "bhtn/hubo.hpp"
#include "bhtn/solvers.hpp"
#include "bhtn/util.hpp"

namespace bhtn {

enum class InitMethod { random_bernoulli, column_sample };

struct BmfConfig {
  std::size_t rank = 1;
  std::size_t max_iters = 20;
  SolverConfig solver;
  InitMethod init = InitMethod::column_sample;
  double init_density = 0.5;
  std::uint64_t seed = 0;
  std::size_t stall_patience = 3;
  std::size_t jobs = 1;  // threads for column subproblems
  std::size_t max_row_weight = kDefaultMaxRowWeight;

  void validate() const {
    if (rank < 1) throw std::invalid_argument("BmfConfig: rank must be >= 1");
    if (max_iters < 1) throw std::invalid_argument("BmfConfig: max_iters must be >= 1");
    if (init_density < 0.0 || init_density > 1.0) {
      throw std::invalid_argument("BmfConfig: init_density must lie in [0, 1]");
    }
    solver.validate();
  }
};

struct BmfResult {
  BitMatrix a;  // n x r
  BitMatrix b;  // r x m
  std::size_t distance = 0;
  std::size_t iters = 0;
  Millis solver_time{0.0};
  std::size_t reads = 0;
  std::vector<std::size_t> history;  // best distance so far after each iteration
  std::vector<std::size_t> iterate_distances;  // distance of each iteration's own (A, B)
};

/// Solves column subproblems for one factorization, memoizing by polynomial.
/// Each distinct polynomial is solved once with seed derive_seed(seed, key), so
/// the answer depends only on the problem, never on column order or threads.
class ColumnSolver {
 public:
  explicit ColumnSolver(const BmfConfig& cfg) : cfg_(cfg) {}

  /// Returns B (a.cols() x x.cols()) with B_i minimizing d(X_i, A B_i).
  BitMatrix update(const BitMatrix& x, const BitMatrix& a) {
    if (x.rows() != a.rows()) {
      throw DimensionError("update_factor: X has " + std::to_string(x.rows()) +
                           " rows but A has " + std::to_string(a.rows()));
    }
    const BitMatrix xt = x.transposed();  // columns of X as packed rows

    // Distinct columns, in order of first appearance.
    std::map<std::vector<std::uint64_t>, std::size_t> column_slot;
    std::vector<std::size_t> slot_of(x.cols());
    std::vector<std::size_t> first_col;
    for (std::size_t i = 0; i < x.cols(); ++i) {
      auto words = xt.row_words(i);
      auto [it, inserted] =
          column_slot.try_emplace(std::vector<std::uint64_t>(words.begin(), words.end()), first_col.size());
      if (inserted) first_col.push_back(i);
      slot_of[i] = it->second;
    }

    std::vector<std::string> keys(first_col.size());
    std::vector<HuboPoly> polys(first_col.size());
    std::vector<std::size_t> pending;  // slots whose polynomial is not cached yet
    std::map<std::string, std::size_t> pending_key;
    for (std::size_t s = 0; s < first_col.size(); ++s) {
      polys[s] = build_column_hubo(a, xt.row(first_col[s]), cfg_.max_row_weight);
      keys[s] = polys[s].canonical_key();
      if (!cache_.contains(keys[s]) && pending_key.try_emplace(keys[s], s).second) {
        pending.push_back(s);
      }
    }

    std::vector<SolveReport> reports(pending.size());
    parallel_for(pending.size(), cfg_.jobs, [&](std::size_t k) {
      const std::size_t s = pending[k];
      SolverConfig sc = cfg_.solver;
      sc.seed = derive_seed(cfg_.seed, {cfg_.solver.seed, fnv1a(keys[s])});
      reports[k] = minimize_column(polys[s], sc);
    });
    for (std::size_t k = 0; k < pending.size(); ++k) {
      solver_time_ += reports[k].wall_time;
      reads_ += reports[k].reads_used;
      cache_.emplace(keys[pending[k]], std::move(reports[k].best));
    }
    solves_ += pending.size();

    BitMatrix b(a.cols(), x.cols());
    for (std::size_t i = 0; i < x.cols(); ++i) b.set_col(i, cache_.at(keys[slot_of[i]]));
    return b;
  }

  Millis solver_time() const { return solver_time_; }
  std::size_t reads() const { return reads_; }
  std::size_t solves() const { return solves_; }

 private:
  BmfConfig cfg_;
  std::unordered_map<std::string, Assignment> cache_;
  Millis solver_time_{0.0};
  std::size_t reads_ = 0;
  std::size_t solves_ = 0;
};

/// One half-step: argmin over B of d(X, A B), column by column.
inline BitMatrix update_factor(const BitMatrix& x, const BitMatrix& a, const BmfConfig& cfg) {
  cfg.validate();
  ColumnSolver solver(cfg);
  return solver.update(x, a);
}

namespace detail {

inline BitMatrix initial_factor(const BitMatrix& x, const BmfConfig& cfg) {
  Rng rng(derive_seed(cfg.seed, {0x1a17}));
  BitMatrix a(x.rows(), cfg.rank);
  std::size_t next = 0;
  if (cfg.init == InitMethod::column_sample) {
    const BitMatrix xt = x.transposed();
    std::vector<BitVector> candidates;
    for (std::size_t i = 0; i < x.cols(); ++i) {
      BitVector c = xt.row(i);
      if (c.all_zero()) continue;
      if (std::find(candidates.begin(), candidates.end(), c) == candidates.end()) {
        candidates.push_back(std::move(c));
      }
    }
    // Partial Fisher-Yates: the first min(rank, |candidates|) become columns of A.
    for (; next < cfg.rank && next < candidates.size(); ++next) {
      const auto pick = next + uniform_below(rng, candidates.size() - next);
      std::swap(candidates[next], candidates[pick]);
      a.set_col(next, candidates[next]);
    }
  }
  for (std::size_t l = next; l < cfg.rank; ++l)
    for (std::size_t i = 0; i < x.rows(); ++i) a.set(i, l, bernoulli(rng, cfg.init_density));
  return a;
}

}  // namespace detail

/// Alternates B <- argmin d(X, A B) and A <- argmin d(X, A B) until the
/// distance reaches zero, stalls for cfg.stall_patience iterations, or
/// cfg.max_iters is hit. Returns the best pair seen.
inline BmfResult factorize(const BitMatrix& x, const BmfConfig& cfg) {
  cfg.validate();
  ColumnSolver solver(cfg);
  const BitMatrix xt = x.transposed();

  BmfResult best;
  best.distance = std::numeric_limits<std::size_t>::max();
  BitMatrix a = detail::initial_factor(x, cfg);
  std::size_t stall = 0;
  for (std::size_t it = 0; it < cfg.max_iters; ++it) {
    const BitMatrix b = solver.update(x, a);
    a = solver.update(xt, b.transposed()).transposed();
    const std::size_t d = hamming(x, bool_matmul(a, b));
    best.iterate_distances.push_back(d);
    best.iters = it + 1;
    if (d < best.distance) {
      best.distance = d;
      best.a = a;
      best.b = b;
      stall = 0;
    } else {
      ++stall;
    }
    best.history.push_back(best.distance);
    if (best.distance == 0 || stall >= cfg.stall_patience) break;
  }
  best.solver_time = solver.solver_time();
  best.reads = solver.reads();
  return best;
}

}  // namespace bhtn
