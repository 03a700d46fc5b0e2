#pragma once

// Boolean hierarchical Tucker networks.
//
// A tensor T(n_1, ..., n_s, q) is matricized with rows (n_1..n_k), k = ceil(s/2),
// and columns (n_{k+1}..n_s, q), then split M ~ M' M'' by Boolean matrix
// factorization at rank r_left. The connecting mode q of M'' is moved to the
// rows, and a second factorization M'' ~ C R at rank r_right yields the core
// C reshaped to (q, r_left, r_right). M' (as a tensor (n_1..n_k, r_left)) and
// R^T (as (n_{k+1}..n_s, r_right)) are decomposed recursively; a single data
// mode becomes a leaf matrix n x q. The input gets a dummy q = 1 at the root.

#include <compare>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "bhtn/bmf.hpp"
#include "bhtn/bool_core.hpp"
#include "bhtn/io.hpp"
#include "bhtn/util.hpp"

namespace bhtn {

/// Inclusive range of original tensor modes covered by a subtree; also names
/// the edge from that subtree to its parent.
struct ModeRange {
  std::size_t first = 0;
  std::size_t last = 0;
  auto operator<=>(const ModeRange&) const = default;
};

struct HtnNode {
  ModeRange modes;
  BitMatrix leaf;  // leaves: n x (edge rank)
  BitTensor core;  // internal nodes: (q, r_left, r_right)
  std::shared_ptr<const HtnNode> left;
  std::shared_ptr<const HtnNode> right;

  bool is_leaf() const { return left == nullptr; }
  /// Rank of the edge to the parent (1 at the root).
  std::size_t edge_rank() const { return is_leaf() ? leaf.cols() : core.shape()[0]; }
};

struct HtnTree {
  std::shared_ptr<const HtnNode> root;
  Shape shape;

  /// Rank of every non-root edge, keyed by the child's mode range.
  std::map<ModeRange, std::size_t> ranks() const {
    std::map<ModeRange, std::size_t> out;
    auto walk = [&](auto&& self, const HtnNode& n) -> void {
      if (n.is_leaf()) return;
      out[n.left->modes] = n.left->edge_rank();
      out[n.right->modes] = n.right->edge_rank();
      self(self, *n.left);
      self(self, *n.right);
    };
    if (root) walk(walk, *root);
    return out;
  }

  std::size_t leaf_count() const {
    auto count = [](auto&& self, const HtnNode& n) -> std::size_t {
      return n.is_leaf() ? 1 : self(self, *n.left) + self(self, *n.right);
    };
    return root ? count(count, *root) : 0;
  }
};

/// Which edge ranks a split uses after clamping to the matricization size.
struct SplitPlan {
  std::size_t split = 0;  // number of leading data modes on the left
  std::size_t r_left = 0;
  std::size_t r_right = 0;
  bool clamped_left = false;
  bool clamped_right = false;
};

inline SplitPlan plan_split(std::span<const std::size_t> dims, std::size_t q,
                            std::size_t want_left, std::size_t want_right) {
  const std::size_t s = dims.size();
  if (s < 2) throw DimensionError("plan_split: need at least two data modes");
  SplitPlan p;
  p.split = (s + 1) / 2;
  const std::size_t rows = shape_size(dims.subspan(0, p.split));
  const std::size_t right = shape_size(dims.subspan(p.split));
  p.r_left = std::min({want_left, rows, right * q});
  p.clamped_left = p.r_left < want_left;
  p.r_right = std::min({want_right, q * p.r_left, right});
  p.clamped_right = p.r_right < want_right;
  return p;
}

struct HtnConfig {
  std::size_t rank = 2;
  std::map<ModeRange, std::size_t> rank_overrides;  // per edge, keyed by child modes
  BmfConfig bmf;
  std::uint64_t seed = 0;

  std::size_t rank_for(ModeRange edge) const {
    auto it = rank_overrides.find(edge);
    return it == rank_overrides.end() ? rank : it->second;
  }

  void validate() const {
    if (rank < 1) throw std::invalid_argument("HtnConfig: rank must be >= 1");
    for (const auto& [edge, r] : rank_overrides) {
      if (r < 1) throw std::invalid_argument("HtnConfig: edge ranks must be >= 1");
    }
    BmfConfig probe = bmf;
    probe.rank = 1;
    probe.validate();
  }
};

struct DecomposeStats {
  Millis solver_time{0.0};
  Millis total_time{0.0};
  std::size_t iters = 0;  // alternating iterations over all factorizations
  std::size_t reads = 0;
  std::size_t factorizations = 0;
  std::vector<std::string> warnings;
};

struct Decomposition {
  HtnTree tree;
  DecomposeStats stats;
};

namespace detail {

inline std::string range_string(ModeRange r) {
  return "[" + std::to_string(r.first) + "," + std::to_string(r.last) + "]";
}

inline std::shared_ptr<const HtnNode> decompose_node(const BitTensor& t, ModeRange modes,
                                                     const HtnConfig& cfg, DecomposeStats& stats) {
  const Shape& shape = t.shape();
  const std::size_t s = shape.size() - 1;
  const std::size_t q = shape.back();
  auto node = std::make_shared<HtnNode>();
  node->modes = modes;
  if (s == 1) {
    node->leaf = to_matrix(t, shape[0]);
    return node;
  }

  const std::span<const std::size_t> dims(shape.data(), s);
  const ModeRange left_modes{modes.first, modes.first + (s + 1) / 2 - 1};
  const ModeRange right_modes{left_modes.last + 1, modes.last};
  const SplitPlan plan = plan_split(dims, q, cfg.rank_for(left_modes), cfg.rank_for(right_modes));
  if (plan.clamped_left) {
    stats.warnings.push_back("rank of edge " + range_string(left_modes) + " clamped to " +
                             std::to_string(plan.r_left));
  }
  if (plan.clamped_right) {
    stats.warnings.push_back("rank of edge " + range_string(right_modes) + " clamped to " +
                             std::to_string(plan.r_right));
  }

  auto run = [&](const BitMatrix& m, std::size_t rank, std::uint64_t which) {
    BmfConfig bc = cfg.bmf;
    bc.rank = rank;
    bc.seed = derive_seed(cfg.seed, {modes.first, modes.last, which});
    BmfResult r = factorize(m, bc);
    stats.solver_time += r.solver_time;
    stats.iters += r.iters;
    stats.reads += r.reads;
    ++stats.factorizations;
    return r;
  };

  // M ~ M' M''
  const BmfResult outer = run(matricize_split(t, plan.split), plan.r_left, 1);
  // M'' with q moved to the rows ~ core * R
  const auto right_dims = dims.subspan(plan.split);
  const BmfResult inner =
      run(move_q_to_rows(outer.b, right_dims, q, plan.r_left), plan.r_right, 2);

  node->core = to_tensor(inner.a, {q, plan.r_left, plan.r_right});

  Shape left_shape(dims.begin(), dims.begin() + static_cast<std::ptrdiff_t>(plan.split));
  left_shape.push_back(plan.r_left);
  Shape right_shape(right_dims.begin(), right_dims.end());
  right_shape.push_back(plan.r_right);

  node->left = decompose_node(to_tensor(outer.a, std::move(left_shape)), left_modes, cfg, stats);
  node->right =
      decompose_node(to_tensor(inner.b.transposed(), std::move(right_shape)), right_modes, cfg, stats);
  return node;
}

inline BitTensor reconstruct_node(const HtnNode& n) {
  if (n.is_leaf()) return to_tensor(n.leaf, {n.leaf.rows(), n.leaf.cols()});
  return tensor_contract(n.core, reconstruct_node(*n.left), reconstruct_node(*n.right));
}

}  // namespace detail

/// Builds the network for t (order >= 2) with the configured edge ranks.
inline Decomposition decompose(const BitTensor& t, const HtnConfig& cfg) {
  cfg.validate();
  if (t.order() < 2) throw DimensionError("decompose: tensor order must be at least 2");
  Stopwatch clock;
  Decomposition out;
  Shape with_dummy = t.shape();
  with_dummy.push_back(1);
  out.tree.shape = t.shape();
  out.tree.root = detail::decompose_node(reshape(t, with_dummy), {0, t.order() - 1}, cfg, out.stats);
  out.stats.total_time = clock.elapsed();
  return out;
}

/// Throws DimensionError when the tree's ranks or leaf sizes are inconsistent.
inline void validate(const HtnTree& tree) {
  if (!tree.root) throw DimensionError("HtnTree: empty tree");
  std::size_t next_mode = 0;
  auto check = [&](auto&& self, const HtnNode& n, std::size_t parent_rank) -> void {
    if (n.edge_rank() != parent_rank) {
      throw DimensionError("HtnTree: node " + detail::range_string(n.modes) + " has edge rank " +
                           std::to_string(n.edge_rank()) + ", parent expects " +
                           std::to_string(parent_rank));
    }
    if (n.is_leaf()) {
      if (next_mode >= tree.shape.size() || n.leaf.rows() != tree.shape[next_mode]) {
        throw DimensionError("HtnTree: leaf " + std::to_string(next_mode) +
                             " does not match the tensor shape " + shape_string(tree.shape));
      }
      ++next_mode;
      return;
    }
    if (!n.right || n.core.order() != 3) throw DimensionError("HtnTree: malformed internal node");
    self(self, *n.left, n.core.shape()[1]);
    self(self, *n.right, n.core.shape()[2]);
  };
  check(check, *tree.root, 1);
  if (next_mode != tree.shape.size()) {
    throw DimensionError("HtnTree: " + std::to_string(next_mode) + " leaves for an order-" +
                         std::to_string(tree.shape.size()) + " tensor");
  }
}

/// Contracts the network back into a tensor of tree.shape.
inline BitTensor reconstruct(const HtnTree& tree) {
  validate(tree);
  return reshape(detail::reconstruct_node(*tree.root), tree.shape);
}

inline double error_rate(const BitTensor& t, const BitTensor& t_hat) {
  return static_cast<double>(hamming(t, t_hat)) / static_cast<double>(t.size());
}

// ---------------------------------------------------------------------------
// JSON: {"shape":[...], "ranks":[{"modes":[a,b],"rank":r},...], "root":node}
// internal node: {"modes":[a,b], "q":q, "r_left":r1, "r_right":r2, "core":<tensor>,
//                 "left":node, "right":node}
// leaf:          {"modes":[i,i], "rank":r, "leaf":<matrix>}

namespace detail {

inline json node_to_json(const HtnNode& n) {
  json j = {{"modes", {n.modes.first, n.modes.last}}};
  if (n.is_leaf()) {
    j["rank"] = n.leaf.cols();
    j["leaf"] = matrix_to_json(n.leaf);
    return j;
  }
  j["q"] = n.core.shape()[0];
  j["r_left"] = n.core.shape()[1];
  j["r_right"] = n.core.shape()[2];
  j["core"] = tensor_to_json(n.core);
  j["left"] = node_to_json(*n.left);
  j["right"] = node_to_json(*n.right);
  return j;
}

inline std::shared_ptr<const HtnNode> node_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("tree node must be an object");
  auto node = std::make_shared<HtnNode>();
  if (j.contains("modes")) {
    const auto& m = j["modes"];
    if (!m.is_array() || m.size() != 2 || !m[0].is_number_unsigned() || !m[1].is_number_unsigned()) {
      throw ParseError("tree node \"modes\" must be [first,last]");
    }
    node->modes = {m[0].get<std::size_t>(), m[1].get<std::size_t>()};
  }
  if (j.contains("leaf")) {
    node->leaf = matrix_from_json(j["leaf"]);
    return node;
  }
  if (!j.contains("core") || !j.contains("left") || !j.contains("right")) {
    throw ParseError("tree node needs either \"leaf\" or \"core\"/\"left\"/\"right\"");
  }
  node->core = tensor_from_json(j["core"]);
  if (node->core.order() != 3) throw ParseError("core tensor must be order 3");
  node->left = node_from_json(j["left"]);
  node->right = node_from_json(j["right"]);
  return node;
}

}  // namespace detail

inline json tree_to_json(const HtnTree& tree) {
  json ranks = json::array();
  for (const auto& [edge, r] : tree.ranks()) ranks.push_back({{"modes", {edge.first, edge.last}}, {"rank", r}});
  return {{"shape", tree.shape}, {"ranks", ranks}, {"root", detail::node_to_json(*tree.root)}};
}

inline HtnTree tree_from_json(const json& j) {
  if (!j.is_object() || !j.contains("shape") || !j.contains("root")) {
    throw ParseError("tree JSON needs \"shape\" and \"root\"");
  }
  HtnTree tree;
  tree.shape = detail::parse_shape(j["shape"]);
  try {
    tree.root = detail::node_from_json(j["root"]);
    validate(tree);
  } catch (const DimensionError& e) {
    throw ParseError(e.what());
  }
  return tree;
}

}  // namespace bhtn
