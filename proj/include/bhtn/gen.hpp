#pragma once

// Synthetic tensors with a known exact network: every leaf and core of a
// tree shaped like decompose's output is filled with Bernoulli(p) bits and the
// tree is contracted.

#include <optional>
#include <stdexcept>
#include <string>

#include "bhtn/htn.hpp"
#include "bhtn/util.hpp"

namespace bhtn {

class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kMaxResampleAttempts = 1000;

struct GenSpec {
  std::size_t order = 4;
  std::size_t size = 4;
  std::size_t rank = 2;
  std::optional<double> p = std::nullopt;  // drawn from {0.1, ..., 0.9} per attempt when unset
  double noise_prob = 0.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (order < 2) throw std::invalid_argument("GenSpec: order must be >= 2");
    if (size < 2) throw std::invalid_argument("GenSpec: size must be >= 2");
    if (rank < 1) throw std::invalid_argument("GenSpec: rank must be >= 1");
    if (p && (*p < 0.0 || *p > 1.0)) throw std::invalid_argument("GenSpec: p must lie in [0, 1]");
    if (noise_prob < 0.0 || noise_prob >= 1.0) {
      throw std::invalid_argument("GenSpec: noise_prob must lie in [0, 1)");
    }
  }
};

struct GeneratedProblem {
  BitTensor tensor;
  HtnTree ground_truth;
  double p = 0.0;
  std::size_t attempts = 0;
};

namespace detail {

inline std::shared_ptr<const HtnNode> random_node(std::span<const std::size_t> dims, std::size_t q,
                                                  ModeRange modes, std::size_t rank, double p,
                                                  Rng& rng) {
  auto node = std::make_shared<HtnNode>();
  node->modes = modes;
  if (dims.size() == 1) {
    node->leaf = BitMatrix(dims[0], q);
    for (std::size_t i = 0; i < dims[0]; ++i)
      for (std::size_t j = 0; j < q; ++j) node->leaf.set(i, j, bernoulli(rng, p));
    return node;
  }
  const SplitPlan plan = plan_split(dims, q, rank, rank);
  node->core = BitTensor({q, plan.r_left, plan.r_right});
  for (std::size_t i = 0; i < node->core.size(); ++i) node->core.set_linear(i, bernoulli(rng, p));
  const ModeRange left{modes.first, modes.first + plan.split - 1};
  node->left = random_node(dims.subspan(0, plan.split), plan.r_left, left, rank, p, rng);
  node->right = random_node(dims.subspan(plan.split), plan.r_right, {left.last + 1, modes.last},
                            rank, p, rng);
  return node;
}

inline bool is_constant(const BitTensor& t) {
  const auto ones = t.data().popcount();
  return ones == 0 || ones == t.size();
}

}  // namespace detail

/// Random network with the given uniform rank and its contraction. Attempts
/// whose tensor is all zeros or all ones are discarded.
inline GeneratedProblem generate(const GenSpec& spec) {
  spec.validate();
  const Shape shape(spec.order, spec.size);
  for (std::size_t attempt = 0; attempt < kMaxResampleAttempts; ++attempt) {
    Rng rng(derive_seed(spec.seed, {0x6e0, attempt}));
    const double p = spec.p ? *spec.p : static_cast<double>(1 + uniform_below(rng, 9)) / 10.0;
    HtnTree tree;
    tree.shape = shape;
    tree.root = detail::random_node(shape, 1, {0, spec.order - 1}, spec.rank, p, rng);
    BitTensor t = reconstruct(tree);
    if (detail::is_constant(t)) continue;
    return {std::move(t), std::move(tree), p, attempt + 1};
  }
  throw GenerationError("generate: every one of " + std::to_string(kMaxResampleAttempts) +
                        " attempts produced a constant tensor");
}

/// Flips each entry independently with probability prob. Results that are
/// all zeros or all ones are redrawn.
inline BitTensor add_noise(const BitTensor& t, double prob, std::uint64_t seed) {
  if (prob < 0.0 || prob >= 1.0) throw std::invalid_argument("add_noise: prob must lie in [0, 1)");
  if (prob == 0.0) return t;
  for (std::size_t attempt = 0; attempt < kMaxResampleAttempts; ++attempt) {
    Rng rng(derive_seed(seed, {0x401e, attempt}));
    BitTensor out = t;
    for (std::size_t i = 0; i < out.size(); ++i)
      if (bernoulli(rng, prob)) out.flip_linear(i);
    if (!detail::is_constant(out)) return out;
  }
  throw GenerationError("add_noise: every attempt produced a constant tensor");
}

}  // namespace bhtn
