// Generate a small tensor with a known rank-2 network, decompose it with the
// exact column solver, and contract the result back.

#include <iostream>

#include "bhtn/bhtn.hpp"

int main() {
  using namespace bhtn;

  const GeneratedProblem problem = generate({.order = 4, .size = 4, .rank = 2, .seed = 1});

  HtnConfig cfg;
  cfg.rank = 2;
  cfg.bmf.solver.backend = Backend::exact;
  cfg.seed = 1;
  const Decomposition dec = decompose(problem.tensor, cfg);
  const BitTensor approx = reconstruct(dec.tree);

  std::cout << "shape " << shape_string(problem.tensor.shape()) << "\n"
            << "error rate " << error_rate(problem.tensor, approx) << "\n"
            << "leaves " << dec.tree.leaf_count() << ", factorizations " << dec.stats.factorizations
            << "\n";
}
