#pragma once

// Parameter sweeps over rank, size or order with the other two fixed, on
// synthetic tensors with and without bit-flip noise.

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "bhtn/gen.hpp"
#include "bhtn/htn.hpp"
#include "bhtn/util.hpp"

namespace bhtn {

enum class SweepAxis { rank, size, order };
enum class NoiseMode { clean, noisy, both };

inline SweepAxis parse_axis(const std::string& s) {
  if (s == "rank") return SweepAxis::rank;
  if (s == "size") return SweepAxis::size;
  if (s == "order") return SweepAxis::order;
  throw std::invalid_argument("unknown sweep axis '" + s + "'");
}

inline const char* axis_name(SweepAxis a) {
  switch (a) {
    case SweepAxis::rank: return "rank";
    case SweepAxis::size: return "size";
    case SweepAxis::order: return "order";
  }
  return "?";
}

inline NoiseMode parse_noise_mode(const std::string& s) {
  if (s == "clean") return NoiseMode::clean;
  if (s == "noisy") return NoiseMode::noisy;
  if (s == "both") return NoiseMode::both;
  throw std::invalid_argument("unknown noise mode '" + s + "'");
}

struct SweepSpec {
  SweepAxis vary = SweepAxis::rank;
  std::vector<std::size_t> values;
  std::size_t order = 4;
  std::size_t size = 8;
  std::size_t rank = 4;
  std::size_t trials = 10;
  NoiseMode noise = NoiseMode::both;
  double noise_prob = 0.01;
  BmfConfig bmf;  // solver settings live in bmf.solver; rank and seed are set per trial
  std::uint64_t seed = 0;

  void validate() const {
    if (values.empty()) throw std::invalid_argument("SweepSpec: values must not be empty");
    if (trials < 1) throw std::invalid_argument("SweepSpec: trials must be >= 1");
    if (noise_prob < 0.0 || noise_prob >= 1.0) {
      throw std::invalid_argument("SweepSpec: noise_prob must lie in [0, 1)");
    }
  }
};

struct TrialRecord {
  std::size_t value_index = 0;
  std::size_t trial = 0;
  std::size_t order = 0;
  std::size_t size = 0;
  std::size_t rank = 0;
  bool noisy = false;
  std::uint64_t seed = 0;
  double error_vs_input = 0.0;
  double error_vs_clean = 0.0;
  Millis solver_time{0.0};
  Millis total_time{0.0};
  std::size_t iters = 0;
  std::size_t reads = 0;
  std::optional<std::string> failure;
};

namespace detail {

inline std::vector<bool> noise_conditions(NoiseMode m) {
  switch (m) {
    case NoiseMode::clean: return {false};
    case NoiseMode::noisy: return {true};
    case NoiseMode::both: return {false, true};
  }
  return {};
}

/// Runs one generated problem under each noise condition.
inline std::vector<TrialRecord> run_trial(const SweepSpec& spec, std::size_t value_index,
                                          std::size_t trial) {
  const std::size_t v = spec.values[value_index];
  TrialRecord base;
  base.value_index = value_index;
  base.trial = trial;
  base.order = spec.vary == SweepAxis::order ? v : spec.order;
  base.size = spec.vary == SweepAxis::size ? v : spec.size;
  base.rank = spec.vary == SweepAxis::rank ? v : spec.rank;
  base.seed = derive_seed(spec.seed, {value_index, trial});

  std::vector<TrialRecord> out;
  std::optional<GeneratedProblem> problem;
  std::string gen_failure;
  try {
    problem = generate({base.order, base.size, base.rank, std::nullopt, 0.0, base.seed});
  } catch (const std::exception& e) {
    gen_failure = e.what();
  }
  for (bool noisy : noise_conditions(spec.noise)) {
    TrialRecord rec = base;
    rec.noisy = noisy;
    try {
      if (!problem) throw std::runtime_error(gen_failure);
      Stopwatch clock;
      const BitTensor& clean = problem->tensor;
      const BitTensor input =
          noisy ? add_noise(clean, spec.noise_prob, derive_seed(base.seed, {0x9015e})) : clean;
      HtnConfig cfg;
      cfg.rank = base.rank;
      cfg.bmf = spec.bmf;
      cfg.seed = derive_seed(base.seed, {0xdec0});
      const Decomposition dec = decompose(input, cfg);
      const BitTensor rec_t = reconstruct(dec.tree);
      rec.error_vs_input = error_rate(input, rec_t);
      rec.error_vs_clean = error_rate(clean, rec_t);
      rec.solver_time = dec.stats.solver_time;
      rec.iters = dec.stats.iters;
      rec.reads = dec.stats.reads;
      rec.total_time = clock.elapsed();
    } catch (const std::exception& e) {
      rec.failure = e.what();
      rec.error_vs_input = rec.error_vs_clean = std::numeric_limits<double>::quiet_NaN();
    }
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace detail

/// Records come back ordered by (value, trial, clean before noisy) regardless
/// of how many threads ran them.
inline std::vector<TrialRecord> run_sweep(const SweepSpec& spec, std::size_t jobs = 1) {
  spec.validate();
  const std::size_t tasks = spec.values.size() * spec.trials;
  std::vector<std::vector<TrialRecord>> per_task(tasks);
  SweepSpec serial = spec;
  serial.bmf.jobs = 1;
  parallel_for(tasks, jobs, [&](std::size_t k) {
    per_task[k] = detail::run_trial(serial, k / spec.trials, k % spec.trials);
  });
  std::vector<TrialRecord> out;
  for (auto& recs : per_task)
    for (auto& r : recs) out.push_back(std::move(r));
  return out;
}

struct SummaryRow {
  std::size_t value = 0;
  bool noisy = false;
  std::size_t count = 0;
  double mean_error = 0.0;  // error vs input
  double sd_error = 0.0;
  double mean_error_clean = 0.0;
  double sd_error_clean = 0.0;
  double mean_solver_ms = 0.0;
  double sd_solver_ms = 0.0;
};

namespace detail {

inline std::pair<double, double> mean_sd(const std::vector<double>& xs) {
  if (xs.empty()) return {std::numeric_limits<double>::quiet_NaN(), 0.0};
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  return {mean, std::sqrt(var / static_cast<double>(xs.size()))};
}

inline std::size_t swept_value(const TrialRecord& r, SweepAxis axis) {
  switch (axis) {
    case SweepAxis::rank: return r.rank;
    case SweepAxis::size: return r.size;
    case SweepAxis::order: return r.order;
  }
  return 0;
}

}  // namespace detail

/// Mean and (population) standard deviation per swept value and noise
/// condition; failed trials are skipped. Rows are ordered by value, clean first.
inline std::vector<SummaryRow> summarize(const std::vector<TrialRecord>& records, SweepAxis axis) {
  std::map<std::pair<std::size_t, bool>, std::vector<const TrialRecord*>> groups;
  for (const auto& r : records)
    if (!r.failure) groups[{detail::swept_value(r, axis), r.noisy}].push_back(&r);
  std::vector<SummaryRow> out;
  for (const auto& [key, recs] : groups) {
    std::vector<double> err, err_clean, solver;
    for (const auto* r : recs) {
      err.push_back(r->error_vs_input);
      err_clean.push_back(r->error_vs_clean);
      solver.push_back(r->solver_time.count());
    }
    SummaryRow row;
    row.value = key.first;
    row.noisy = key.second;
    row.count = recs.size();
    std::tie(row.mean_error, row.sd_error) = detail::mean_sd(err);
    std::tie(row.mean_error_clean, row.sd_error_clean) = detail::mean_sd(err_clean);
    std::tie(row.mean_solver_ms, row.sd_solver_ms) = detail::mean_sd(solver);
    out.push_back(row);
  }
  return out;
}

inline constexpr const char* kCsvHeader =
    "order,size,rank,noise,seed,error_vs_input,error_vs_clean,solver_ms,total_ms,iters";

inline void write_csv(std::ostream& os, const std::vector<TrialRecord>& records) {
  os << kCsvHeader << '\n';
  for (const auto& r : records) {
    std::ostringstream line;
    line << r.order << ',' << r.size << ',' << r.rank << ',' << (r.noisy ? 1 : 0) << ',' << r.seed
         << ',' << std::setprecision(12) << r.error_vs_input << ',' << r.error_vs_clean << ','
         << std::fixed << std::setprecision(3) << r.solver_time.count() << ','
         << r.total_time.count() << ',' << r.iters;
    os << line.str() << '\n';
  }
}

/// Two-panel scatter (solver time, error rate) against the swept value with
/// lines through the per-value means; clean runs blue, noisy red.
inline void write_svg(std::ostream& os, const std::vector<TrialRecord>& records, SweepAxis axis) {
  constexpr double W = 420, H = 300, M = 50;
  const auto rows = summarize(records, axis);
  double xmin = std::numeric_limits<double>::max(), xmax = std::numeric_limits<double>::lowest();
  double tmax = 1e-9, emax = 1e-9;
  for (const auto& r : records) {
    if (r.failure) continue;
    const double x = static_cast<double>(detail::swept_value(r, axis));
    xmin = std::min(xmin, x);
    xmax = std::max(xmax, x);
    tmax = std::max(tmax, r.solver_time.count());
    emax = std::max(emax, r.error_vs_input);
  }
  if (xmin > xmax) xmin = 0, xmax = 1;
  if (xmin == xmax) xmin -= 1, xmax += 1;

  os << R"(<svg xmlns="http://www.w3.org/2000/svg" width=")" << 2 * W << R"(" height=")" << H
     << R"(" font-family="sans-serif" font-size="11">)" << '\n';
  auto panel = [&](double x0, double ymax, const char* ylabel, auto value_of, auto mean_of) {
    auto px = [&](double x) { return x0 + M + (x - xmin) / (xmax - xmin) * (W - 2 * M); };
    auto py = [&](double y) { return H - M - y / ymax * (H - 2 * M); };
    os << "<rect x=\"" << x0 + M << "\" y=\"" << M << "\" width=\"" << W - 2 * M << "\" height=\""
       << H - 2 * M << "\" fill=\"none\" stroke=\"#444\"/>\n";
    os << "<text x=\"" << x0 + W / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">"
       << axis_name(axis) << "</text>\n";
    os << "<text x=\"" << x0 + 14 << "\" y=\"" << H / 2 << "\" transform=\"rotate(-90 " << x0 + 14
       << ' ' << H / 2 << ")\" text-anchor=\"middle\">" << ylabel << " (max " << ymax << ")</text>\n";
    for (const auto& r : records) {
      if (r.failure) continue;
      os << "<circle cx=\"" << px(static_cast<double>(detail::swept_value(r, axis))) << "\" cy=\""
         << py(value_of(r)) << "\" r=\"2.5\" fill=\"" << (r.noisy ? "#c33" : "#36c")
         << "\" fill-opacity=\"0.6\"/>\n";
    }
    for (bool noisy : {false, true}) {
      std::string pts;
      for (const auto& row : rows) {
        if (row.noisy != noisy) continue;
        pts += std::to_string(px(static_cast<double>(row.value))) + "," +
               std::to_string(py(mean_of(row))) + " ";
      }
      if (!pts.empty()) {
        os << "<polyline points=\"" << pts << "\" fill=\"none\" stroke=\""
           << (noisy ? "#c33" : "#36c") << "\" stroke-width=\"1.5\"/>\n";
      }
    }
  };
  panel(0, tmax, "solver ms", [](const TrialRecord& r) { return r.solver_time.count(); },
        [](const SummaryRow& s) { return s.mean_solver_ms; });
  panel(W, emax, "error rate", [](const TrialRecord& r) { return r.error_vs_input; },
        [](const SummaryRow& s) { return s.mean_error; });
  os << "</svg>\n";
}

}  // namespace bhtn
