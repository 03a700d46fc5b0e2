#include <numeric>

#include "catch_amalgamated.hpp"
#include "oracles.hpp"

using namespace bhtn;

TEST_CASE("bool_matmul hand cases") {
  const BitMatrix b{{1, 0, 1}, {0, 1, 1}};
  REQUIRE(bool_matmul(BitMatrix::identity(2), b) == b);

  const BitMatrix a{{1, 1}, {0, 1}};
  REQUIRE(bool_matmul(a, BitMatrix{{1, 0}, {0, 1}}) == BitMatrix{{1, 1}, {0, 1}});

  REQUIRE(bool_matmul(BitMatrix::ones(3, 2), BitMatrix(2, 3)) == BitMatrix(3, 3));
  REQUIRE_THROWS_AS(bool_matmul(BitMatrix(2, 3), BitMatrix(2, 3)), DimensionError);
}

TEST_CASE("bool_matmul equals thresholded integer product") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    const auto a = oracle::random_matrix(rng, 4, 4);
    const auto b = oracle::random_matrix(rng, 4, 4);
    REQUIRE(oracle::dense(bool_matmul(a, b)) == oracle::matmul(oracle::dense(a), oracle::dense(b)));
  }
  // Shapes that straddle word boundaries.
  for (std::size_t n : {1u, 63u, 64u, 65u, 130u}) {
    const auto a = oracle::random_matrix(rng, 7, n, 0.1);
    const auto b = oracle::random_matrix(rng, n, 70, 0.1);
    REQUIRE(oracle::dense(bool_matmul(a, b)) == oracle::matmul(oracle::dense(a), oracle::dense(b)));
  }
}

TEST_CASE("bool_matmul is associative with identity as neutral element") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = oracle::random_matrix(rng, 3, 4);
    const auto b = oracle::random_matrix(rng, 4, 5);
    const auto c = oracle::random_matrix(rng, 5, 2);
    REQUIRE(bool_matmul(bool_matmul(a, b), c) == bool_matmul(a, bool_matmul(b, c)));
    REQUIRE(bool_matmul(a, BitMatrix::identity(4)) == a);
    REQUIRE(bool_matmul(BitMatrix::identity(3), a) == a);
  }
}

TEST_CASE("bool_matvec") {
  REQUIRE(bool_matvec(BitMatrix::identity(3), BitVector{1, 0, 1}) == BitVector{1, 0, 1});
  const BitMatrix a{{1, 0}, {1, 1}};
  REQUIRE(bool_matvec(a, BitVector{1, 0}) == BitVector{1, 1});
  REQUIRE(bool_matvec(a, BitVector{0, 0}) == BitVector{0, 0});
  REQUIRE_THROWS_AS(bool_matvec(a, BitVector{1, 0, 1}), DimensionError);
}

TEST_CASE("hamming") {
  REQUIRE(hamming(BitVector{1, 0, 1}, BitVector{1, 0, 1}) == 0);
  REQUIRE(hamming(BitVector{1, 0, 1}, BitVector{0, 0, 1}) == 1);
  REQUIRE(hamming(BitMatrix::ones(2, 2), BitMatrix(2, 2)) == 4);
  REQUIRE_THROWS_AS(hamming(BitVector(3), BitVector(4)), DimensionError);

  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 300; ++trial) {
    const auto x = oracle::random_tensor(rng, {3, 5, 7});
    const auto y = oracle::random_tensor(rng, {3, 5, 7});
    const auto z = oracle::random_tensor(rng, {3, 5, 7});
    REQUIRE(hamming(x, y) == hamming(y, x));
    REQUIRE(hamming(x, x) == 0);
    REQUIRE(hamming(x, z) <= hamming(x, y) + hamming(y, z));
  }
}

TEST_CASE("reshape keeps row-major data") {
  BitTensor t({2, 2, 2});
  t.set({1, 0, 1}, true);
  const BitTensor m = reshape(t, {2, 4});
  REQUIRE(m.at({1, 1}));
  REQUIRE(m.data().popcount() == 1);

  std::mt19937_64 rng(14);
  const auto u = oracle::random_tensor(rng, {2, 3});
  REQUIRE(reshape(u, {6}).data() == u.data());
  REQUIRE(reshape(reshape(u, {3, 2}), {2, 3}) == u);
  REQUIRE_THROWS_AS(reshape(u, {4}), DimensionError);
}

TEST_CASE("permute moves axes and inverts") {
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 50; ++trial) {
    const auto t = oracle::random_tensor(rng, {2, 3, 4});
    const std::vector<std::size_t> axes{2, 0, 1};
    const BitTensor p = permute(t, axes);
    REQUIRE(p.shape() == Shape{4, 2, 3});
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 3; ++j)
        for (std::size_t k = 0; k < 4; ++k) REQUIRE(p.at({k, i, j}) == t.at({i, j, k}));
    const std::vector<std::size_t> inverse{1, 2, 0};
    REQUIRE(permute(p, inverse) == t);
  }
  const std::vector<std::size_t> bad{0, 0, 1};
  REQUIRE_THROWS_AS(permute(BitTensor({2, 2, 2}), bad), DimensionError);
}

TEST_CASE("matricize_split") {
  std::mt19937_64 rng(16);
  const auto t = oracle::random_tensor(rng, {2, 2, 1});
  const BitMatrix m = matricize_split(t, 1);
  REQUIRE(m.rows() == 2);
  REQUIRE(m.cols() == 2);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) REQUIRE(m.get(i, j) == t.at({i, j, 0}));

  const auto u = oracle::random_tensor(rng, {2, 2, 3});
  const BitMatrix mu = matricize_split(u, 1);
  REQUIRE(mu.cols() == 6);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j)
      for (std::size_t c = 0; c < 3; ++c) REQUIRE(mu.get(i, j * 3 + c) == u.at({i, j, c}));

  for (std::size_t order = 3; order <= 6; ++order) {
    const auto v = oracle::random_tensor(rng, Shape(order, 3));
    for (std::size_t k = 1; k + 1 < order; ++k)
      REQUIRE(to_tensor(matricize_split(v, k), v.shape()) == v);
  }
  REQUIRE_THROWS_AS(matricize_split(u, 0), DimensionError);
  REQUIRE_THROWS_AS(matricize_split(u, 2), DimensionError);
}

TEST_CASE("move_q_to_rows") {
  std::mt19937_64 rng(17);
  const auto m = oracle::random_matrix(rng, 3, 4);
  const std::vector<std::size_t> dims4{4};
  REQUIRE(move_q_to_rows(m, dims4, 1, 3) == m);

  // [[a,b,c,d]] with columns (n,q) = (0,0),(0,1),(1,0),(1,1) becomes [[a,c],[b,d]].
  const std::vector<std::size_t> dims2{2};
  for (unsigned bits = 0; bits < 16; ++bits) {
    const int a = bits & 1, b = (bits >> 1) & 1, c = (bits >> 2) & 1, d = (bits >> 3) & 1;
    const BitMatrix in{{a, b, c, d}};
    REQUIRE(move_q_to_rows(in, dims2, 2, 1) == BitMatrix{{a, c}, {b, d}});
  }

  const std::vector<std::size_t> dims{2, 3};
  for (int trial = 0; trial < 50; ++trial) {
    const auto x = oracle::random_matrix(rng, 2, 6 * 3);
    const BitMatrix y = move_q_to_rows(x, dims, 3, 2);
    REQUIRE(y.rows() == 6);
    REQUIRE(move_q_to_cols(y, 3, 2) == x);
    // Same thing through a tensor permutation (r, dims..., q) -> (q, r, dims...).
    const std::vector<std::size_t> axes{3, 0, 1, 2};
    const BitTensor viaperm = permute(to_tensor(x, {2, 2, 3, 3}), axes);
    REQUIRE(to_matrix(viaperm, 6) == y);
  }
  REQUIRE_THROWS_AS(move_q_to_rows(m, dims2, 3, 3), DimensionError);
  REQUIRE_THROWS_AS(move_q_to_rows(m, dims2, 2, 2), DimensionError);
}

TEST_CASE("tensor_contract") {
  std::mt19937_64 rng(18);
  BitTensor one({1, 1, 1});
  one.set_linear(0, true);
  const auto l = oracle::random_tensor(rng, {3, 1});
  const auto r = oracle::random_tensor(rng, {2, 1});
  const BitTensor outer = tensor_contract(one, l, r);
  REQUIRE(outer.shape() == Shape{3, 2, 1});
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 2; ++j)
      REQUIRE(outer.at({i, j, 0}) == (l.at({i, 0}) && r.at({j, 0})));

  const auto zero = tensor_contract(BitTensor({2, 2, 2}), oracle::random_tensor(rng, {3, 2}),
                                    oracle::random_tensor(rng, {3, 2}));
  REQUIRE(zero.data().all_zero());

  std::uniform_int_distribution<std::size_t> dim(1, 3);
  for (int trial = 0; trial < 400; ++trial) {
    const std::size_t q = dim(rng), r1 = dim(rng), r2 = dim(rng);
    Shape ls, rs;
    for (std::size_t m = dim(rng) - 1; m-- > 0;) ls.push_back(dim(rng));
    for (std::size_t m = dim(rng) - 1; m-- > 0;) rs.push_back(dim(rng));
    if (ls.empty()) ls.push_back(dim(rng));
    if (rs.empty()) rs.push_back(dim(rng));
    ls.push_back(r1);
    rs.push_back(r2);
    const auto core = oracle::random_tensor(rng, {q, r1, r2});
    const auto left = oracle::random_tensor(rng, ls);
    const auto right = oracle::random_tensor(rng, rs);
    REQUIRE(tensor_contract(core, left, right) == oracle::contract(core, left, right));
  }
  REQUIRE_THROWS_AS(tensor_contract(BitTensor({1, 2, 2}), BitTensor({3, 2}), BitTensor({3, 3})),
                    DimensionError);
}

TEST_CASE("packed storage edge cases") {
  BitVector v(130);
  v.set(0, true);
  v.set(64, true);
  v.set(129, true);
  REQUIRE(v.popcount() == 3);
  v.flip(64);
  REQUIRE(v.popcount() == 2);
  REQUIRE(BitVector::from_bytes(v.to_bytes()) == v);
  REQUIRE_THROWS_AS(BitMatrix(0, 3), DimensionError);
  REQUIRE_THROWS_AS(BitTensor(Shape{2, 0}), DimensionError);

  std::mt19937_64 rng(19);
  const auto m = oracle::random_matrix(rng, 70, 65);
  REQUIRE(m.transposed().transposed() == m);
  for (std::size_t i = 0; i < 70; ++i)
    for (std::size_t j = 0; j < 65; ++j) REQUIRE(m.transposed().get(j, i) == m.get(i, j));
}
