#pragma once

#include "bhtn/hubo.hpp"
#include "bhtn/remote.hpp"
#include "bhtn/sampling.hpp"

namespace bhtn {

/// Minimizes one column objective with the configured backend. The exact
/// backend enumerates the HUBO directly; the others solve its quadratization
/// at default_strength. The reported energy is always the HUBO value of the
/// returned assignment.
inline SolveReport minimize_column(const HuboPoly& p, const SolverConfig& cfg) {
  cfg.validate();
  Stopwatch clock;
  SolveReport r;
  switch (cfg.backend) {
    case Backend::exact:
      r = solve_exact(p);
      break;
    case Backend::sa:
      r = solve_sa(hubo_to_qubo(p, default_strength(p)), cfg);
      break;
    case Backend::remote:
      r = solve_remote(hubo_to_qubo(p, default_strength(p)), cfg);
      break;
  }
  r.energy = eval_hubo(p, r.best);
  r.wall_time = clock.elapsed();
  return r;
}

}  // namespace bhtn
