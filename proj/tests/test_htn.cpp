#include <functional>

#include "catch_amalgamated.hpp"
#include "oracles.hpp"

using namespace bhtn;

namespace {

HtnConfig exact_cfg(std::size_t rank, std::uint64_t seed) {
  HtnConfig c;
  c.rank = rank;
  c.bmf.solver.backend = Backend::exact;
  c.seed = seed;
  return c;
}

std::size_t count_cores(const HtnNode& n) {
  return n.is_leaf() ? 0 : 1 + count_cores(*n.left) + count_cores(*n.right);
}

std::vector<std::size_t> leaf_rows(const HtnNode& n) {
  if (n.is_leaf()) return {n.leaf.rows()};
  auto l = leaf_rows(*n.left);
  const auto r = leaf_rows(*n.right);
  l.insert(l.end(), r.begin(), r.end());
  return l;
}

std::shared_ptr<HtnNode> leaf(BitMatrix m, std::size_t mode) {
  auto n = std::make_shared<HtnNode>();
  n->modes = {mode, mode};
  n->leaf = std::move(m);
  return n;
}

}  // namespace

TEST_CASE("plan_split clamps ranks to the matricization") {
  const std::vector<std::size_t> dims{4, 4, 4, 4};
  auto p = plan_split(dims, 1, 3, 3);
  REQUIRE(p.split == 2);
  REQUIRE(p.r_left == 3);
  REQUIRE(p.r_right == 3);
  p = plan_split(dims, 1, 20, 40);
  REQUIRE(p.r_left == 16);
  REQUIRE(p.r_right == 16);
  REQUIRE(p.clamped_left);
  const std::vector<std::size_t> odd{2, 2, 2};
  p = plan_split(odd, 1, 8, 8);
  REQUIRE(p.split == 2);
  REQUIRE(p.r_left == 2);  // right side holds only 2 * q entries
  REQUIRE(p.r_right == 2);
}

TEST_CASE("order-2 tree is one core with two leaves") {
  std::mt19937_64 rng(61);
  const auto t = oracle::random_tensor(rng, {4, 5});
  const Decomposition d = decompose(t, exact_cfg(2, 1));
  const HtnNode& root = *d.tree.root;
  REQUIRE_FALSE(root.is_leaf());
  REQUIRE(root.core.shape() == Shape{1, 2, 2});
  REQUIRE(root.left->is_leaf());
  REQUIRE(root.right->is_leaf());
  REQUIRE(reconstruct(d.tree).shape() == t.shape());
}

TEST_CASE("tree shape and ranks") {
  std::mt19937_64 rng(62);
  for (std::size_t order = 2; order <= 6; ++order) {
    const auto t = oracle::random_tensor(rng, Shape(order, 3));
    const Decomposition d = decompose(t, exact_cfg(2, order));
    REQUIRE(d.tree.leaf_count() == order);
    REQUIRE(count_cores(*d.tree.root) == order - 1);
    REQUIRE(leaf_rows(*d.tree.root) == t.shape());
    for (const auto& [edge, r] : d.tree.ranks()) REQUIRE(r <= 2);
    REQUIRE_NOTHROW(validate(d.tree));
    REQUIRE(d.stats.factorizations == 2 * (order - 1));
  }
}

TEST_CASE("rank overrides and clamping warnings") {
  std::mt19937_64 rng(63);
  const auto t = oracle::random_tensor(rng, {3, 3, 3, 3});
  HtnConfig c = exact_cfg(2, 3);
  c.rank_overrides[{0, 1}] = 3;
  c.rank_overrides[{2, 2}] = 1;
  const Decomposition d = decompose(t, c);
  const auto ranks = d.tree.ranks();
  REQUIRE(ranks.at({0, 1}) == 3);
  REQUIRE(ranks.at({2, 3}) == 2);
  REQUIRE(ranks.at({2, 2}) == 1);
  REQUIRE(d.stats.warnings.empty());

  const Decomposition big = decompose(oracle::random_tensor(rng, {2, 2, 2}), exact_cfg(5, 1));
  REQUIRE_FALSE(big.stats.warnings.empty());
  REQUIRE_NOTHROW(validate(big.tree));
}

TEST_CASE("all-ones tensor at rank 1") {
  BitTensor t({2, 2, 2, 2});
  for (std::size_t i = 0; i < t.size(); ++i) t.set_linear(i, true);
  const Decomposition d = decompose(t, exact_cfg(1, 0));
  REQUIRE(error_rate(t, reconstruct(d.tree)) == 0.0);
}

TEST_CASE("generated tensors are recovered at their rank") {
  int exact = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const GeneratedProblem g = generate({.order = 4, .size = 4, .rank = 2, .seed = seed});
    const Decomposition d = decompose(g.tensor, exact_cfg(2, seed));
    if (error_rate(g.tensor, reconstruct(d.tree)) == 0.0) ++exact;
  }
  INFO("exact " << exact << "/20");
  REQUIRE(exact >= 18);
}

TEST_CASE("reconstruct with identity leaves returns the core") {
  std::mt19937_64 rng(64);
  const auto core = oracle::random_tensor(rng, {1, 3, 4});
  auto root = std::make_shared<HtnNode>();
  root->modes = {0, 1};
  root->core = core;
  root->left = leaf(BitMatrix::identity(3), 0);
  root->right = leaf(BitMatrix::identity(4), 1);
  HtnTree tree{root, {3, 4}};
  REQUIRE(reconstruct(tree) == reshape(core, {3, 4}));
}

TEST_CASE("reconstruct matches brute-force contraction") {
  std::mt19937_64 rng(65);
  std::uniform_int_distribution<std::size_t> d3(1, 3), d2(1, 2);
  for (int trial = 0; trial < 200; ++trial) {
    // Order 3: root(1, ra, rb) over leaf 0 and node(rb, rc, rd) over leaves 1 and 2.
    const std::size_t n0 = d3(rng), n1 = d3(rng), n2 = d3(rng);
    const std::size_t ra = d2(rng), rb = d2(rng), rc = d2(rng), rd = d2(rng);
    auto inner = std::make_shared<HtnNode>();
    inner->modes = {1, 2};
    inner->core = oracle::random_tensor(rng, {rb, rc, rd});
    inner->left = leaf(oracle::random_matrix(rng, n1, rc), 1);
    inner->right = leaf(oracle::random_matrix(rng, n2, rd), 2);
    auto root = std::make_shared<HtnNode>();
    root->modes = {0, 2};
    root->core = oracle::random_tensor(rng, {1, ra, rb});
    root->left = leaf(oracle::random_matrix(rng, n0, ra), 0);
    root->right = inner;
    HtnTree tree{root, {n0, n1, n2}};

    auto as_tensor = [](const BitMatrix& m) { return to_tensor(m, {m.rows(), m.cols()}); };
    const BitTensor right = oracle::contract(inner->core, as_tensor(inner->left->leaf),
                                             as_tensor(inner->right->leaf));
    const BitTensor full = oracle::contract(root->core, as_tensor(root->left->leaf), right);
    REQUIRE(reconstruct(tree) == reshape(full, {n0, n1, n2}));
  }
}

TEST_CASE("error_rate") {
  std::mt19937_64 rng(66);
  const auto t = oracle::random_tensor(rng, {4, 4});
  REQUIRE(error_rate(t, t) == 0.0);
  BitTensor c = t;
  for (std::size_t i = 0; i < c.size(); ++i) c.flip_linear(i);
  REQUIRE(error_rate(t, c) == 1.0);
  BitTensor one = t;
  one.flip_linear(5);
  REQUIRE(error_rate(t, one) == 0.0625);
}

TEST_CASE("decompose is deterministic and self-consistent") {
  const GeneratedProblem g = generate({.order = 5, .size = 3, .rank = 3, .seed = 4});
  HtnConfig c;
  c.rank = 3;
  c.bmf.solver.num_reads = 20;
  c.bmf.solver.sweeps = 200;
  c.seed = 77;
  const Decomposition a = decompose(g.tensor, c);
  c.bmf.jobs = 4;
  const Decomposition b = decompose(g.tensor, c);
  REQUIRE(tree_to_json(a.tree) == tree_to_json(b.tree));
  REQUIRE(reconstruct(a.tree) == reconstruct(b.tree));
}

TEST_CASE("tree JSON round trip and validation") {
  const GeneratedProblem g = generate({.order = 5, .size = 3, .rank = 2, .seed = 9});
  const json j = tree_to_json(g.ground_truth);
  const HtnTree back = tree_from_json(json::parse(j.dump()));
  REQUIRE(reconstruct(back) == g.tensor);
  REQUIRE(tree_to_json(back) == j);
  REQUIRE(j["ranks"].size() == 2 * (5 - 1));

  json bad = j;
  bad["shape"][0] = 4;
  REQUIRE_THROWS_AS(tree_from_json(bad), ParseError);
  json missing = j;
  missing["root"].erase("left");
  REQUIRE_THROWS_AS(tree_from_json(missing), ParseError);
  json wrong_rank = j;
  wrong_rank["root"]["left"] = j["root"]["right"];
  REQUIRE_THROWS_AS(tree_from_json(wrong_rank), ParseError);
}

TEST_CASE("HtnConfig validation") {
  HtnConfig c;
  c.rank = 0;
  REQUIRE_THROWS_AS(decompose(BitTensor({2, 2}), c), std::invalid_argument);
  c.rank = 1;
  REQUIRE_THROWS_AS(decompose(BitTensor({4}), c), DimensionError);
}
