#pragma once

// Local minimizers for pseudo-Boolean objectives: exhaustive enumeration of a
// HUBO and a single-flip Metropolis annealer for QUBO models.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bhtn/hubo.hpp"
#include "bhtn/util.hpp"

namespace bhtn {

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Backend { exact, sa, remote };

inline const char* backend_name(Backend b) {
  switch (b) {
    case Backend::exact: return "exact";
    case Backend::sa: return "sa";
    case Backend::remote: return "remote";
  }
  return "?";
}

inline Backend parse_backend(const std::string& s) {
  if (s == "exact") return Backend::exact;
  if (s == "sa") return Backend::sa;
  if (s == "remote") return Backend::remote;
  throw std::invalid_argument("unknown solver backend '" + s + "'");
}

struct SolverConfig {
  Backend backend = Backend::sa;
  std::size_t num_reads = 100;  // independent anneals per call
  std::size_t sweeps = 1000;    // Metropolis sweeps per anneal
  std::pair<double, double> beta_range{0.1, 10.0};
  std::uint64_t seed = 0;
  std::optional<Millis> time_limit;
  std::optional<std::string> remote_endpoint;
  std::size_t max_retries = 3;
  Millis retry_backoff{100.0};  // doubled after every failed attempt

  void validate() const {
    if (num_reads < 1) throw std::invalid_argument("SolverConfig: num_reads must be >= 1");
    if (sweeps < 1) throw std::invalid_argument("SolverConfig: sweeps must be >= 1");
    if (!(beta_range.first > 0.0) || !(beta_range.first < beta_range.second)) {
      throw std::invalid_argument("SolverConfig: need 0 < beta initial < beta final");
    }
    if (backend == Backend::remote && (!remote_endpoint || remote_endpoint->empty())) {
      throw std::invalid_argument("SolverConfig: remote backend requires an endpoint");
    }
  }
};

struct SolveReport {
  Assignment best;  // original variables only
  double energy = 0.0;
  Millis wall_time{0.0};
  std::size_t reads_used = 0;
  std::string backend;
};

/// Largest variable count solve_exact accepts.
inline constexpr std::size_t kMaxExactVars = 20;

/// Global minimum by enumeration. Assignments are visited as integers with
/// y_0 as the least significant bit; the first (lowest) minimizer wins.
inline SolveReport solve_exact(const HuboPoly& p) {
  Stopwatch clock;
  const std::size_t n = p.num_vars();
  if (n > kMaxExactVars) {
    throw SolverError("solve_exact: " + std::to_string(n) + " variables exceed the limit of " +
                      std::to_string(kMaxExactVars));
  }
  std::vector<std::pair<std::uint32_t, double>> masks;
  masks.reserve(p.terms().size());
  for (const auto& [vars, coef] : p.terms()) {
    std::uint32_t m = 0;
    for (auto v : vars) m |= std::uint32_t{1} << v;
    masks.emplace_back(m, coef);
  }
  std::uint32_t best_mask = 0;
  double best = 0.0;
  const std::uint32_t end = std::uint32_t{1} << n;
  for (std::uint32_t y = 0; y < end; ++y) {
    double value = 0.0;
    for (const auto& [m, coef] : masks)
      if ((y & m) == m) value += coef;
    if (y == 0 || value < best) {
      best = value;
      best_mask = y;
    }
  }
  SolveReport r;
  r.best = Assignment(n);
  for (std::size_t l = 0; l < n; ++l) r.best.set(l, (best_mask >> l) & 1U);
  r.energy = best;
  r.reads_used = 1;
  r.backend = backend_name(Backend::exact);
  r.wall_time = clock.elapsed();
  return r;
}

/// One distinct sample state; `count` is how many reads ended in it.
struct Sample {
  std::vector<std::uint8_t> bits;
  double energy = 0.0;
  std::size_t count = 0;
  friend bool operator==(const Sample&, const Sample&) = default;
};

inline std::vector<double> beta_schedule(const SolverConfig& cfg) {
  std::vector<double> betas(cfg.sweeps);
  const auto [b0, b1] = cfg.beta_range;
  if (cfg.sweeps == 1) {
    betas[0] = b1;
    return betas;
  }
  const double ratio = std::log(b1 / b0) / static_cast<double>(cfg.sweeps - 1);
  for (std::size_t k = 0; k < cfg.sweeps; ++k) betas[k] = b0 * std::exp(ratio * static_cast<double>(k));
  return betas;
}

inline Assignment to_assignment(std::span<const std::uint8_t> bits) {
  return Assignment::from_bytes(bits);
}

/// Runs cfg.num_reads independent annealing chains and returns the lowest
/// state seen in each chain, merged by bit pattern in order of first
/// occurrence. Read k is seeded from derive_seed(cfg.seed, {k}).
inline std::vector<Sample> sample_qubo(const QuboModel& q, const SolverConfig& cfg) {
  cfg.validate();
  const std::size_t n = q.num_vars;

  struct Edge {
    std::uint32_t to;
    double w;
  };
  std::vector<std::vector<Edge>> adj(n);
  for (const auto& [ij, w] : q.quadratic) {
    adj[ij.first].push_back({ij.second, w});
    adj[ij.second].push_back({ij.first, w});
  }
  const auto betas = beta_schedule(cfg);

  std::vector<Sample> out;
  std::map<std::vector<std::uint8_t>, std::size_t> index;
  Stopwatch clock;

  std::vector<std::uint8_t> x(n), best_x(n);
  std::vector<double> field(n);
  for (std::size_t read = 0; read < cfg.num_reads; ++read) {
    if (read > 0 && cfg.time_limit && clock.elapsed() > *cfg.time_limit) break;
    Rng rng(derive_seed(cfg.seed, {read}));
    for (auto& b : x) b = static_cast<std::uint8_t>(rng() >> 63);
    for (std::size_t i = 0; i < n; ++i) {
      double h = q.linear[i];
      for (const auto& e : adj[i])
        if (x[e.to]) h += e.w;
      field[i] = h;
    }
    double energy = q.offset;
    for (std::size_t i = 0; i < n; ++i)
      if (x[i]) energy += q.linear[i];
    for (const auto& [ij, w] : q.quadratic)
      if (x[ij.first] && x[ij.second]) energy += w;
    double best_energy = energy;
    best_x = x;

    for (double beta : betas) {
      for (std::size_t i = 0; i < n; ++i) {
        const double delta = x[i] ? -field[i] : field[i];
        if (delta > 0.0 && uniform01(rng) >= std::exp(-beta * delta)) continue;
        x[i] ^= 1U;
        const double sign = x[i] ? 1.0 : -1.0;
        for (const auto& e : adj[i]) field[e.to] += sign * e.w;
        energy += delta;
        if (energy < best_energy) {
          best_energy = energy;
          best_x = x;
        }
      }
    }

    auto [it, inserted] = index.try_emplace(best_x, out.size());
    if (inserted) {
      out.push_back({best_x, eval_qubo(q, to_assignment(best_x)), 1});
    } else {
      ++out[it->second].count;
    }
  }
  return out;
}

/// Completes auxiliaries of each sample, re-evaluates, and keeps the lowest
/// energy (first sample on ties). The assignment is projected onto the
/// original variables.
inline SolveReport select_best(const QuboModel& q, const std::vector<Sample>& samples) {
  if (samples.empty()) throw SolverError("select_best: no samples");
  SolveReport r;
  std::size_t reads = 0;
  bool have = false;
  Assignment best_full;
  for (const auto& s : samples) {
    if (s.bits.size() != q.num_vars) throw SolverError("select_best: sample length mismatch");
    Assignment x = to_assignment(s.bits);
    complete_auxiliaries(q, x);
    const double e = eval_qubo(q, x);
    if (!have || e < r.energy) {
      r.energy = e;
      best_full = std::move(x);
      have = true;
    }
    reads += s.count;
  }
  r.best = Assignment(q.num_original);
  for (std::size_t i = 0; i < q.num_original; ++i) r.best.set(i, best_full[i]);
  r.reads_used = reads;
  return r;
}

inline SolveReport solve_sa(const QuboModel& q, const SolverConfig& cfg) {
  Stopwatch clock;
  SolveReport r = select_best(q, sample_qubo(q, cfg));
  r.backend = backend_name(Backend::sa);
  r.wall_time = clock.elapsed();
  return r;
}

}  // namespace bhtn
