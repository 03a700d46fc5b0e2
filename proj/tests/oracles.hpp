#pragma once

// Brute-force references. They work on plain nested vectors and never call
// the packed kernels they are used to check.

#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "bhtn/bhtn.hpp"

namespace oracle {

using Dense = std::vector<std::vector<int>>;

inline Dense dense(const bhtn::BitMatrix& m) {
  Dense d(m.rows(), std::vector<int>(m.cols()));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) d[i][j] = m.get(i, j);
  return d;
}

// Integer product, then threshold: (AB)_ij = [sum_l a_il b_lj > 0].
inline Dense matmul(const Dense& a, const Dense& b) {
  Dense c(a.size(), std::vector<int>(b.empty() ? 0 : b[0].size()));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < c[i].size(); ++j) {
      long s = 0;
      for (std::size_t l = 0; l < b.size(); ++l) s += a[i][l] * b[l][j];
      c[i][j] = s > 0;
    }
  return c;
}

inline std::size_t distance(const Dense& a, const Dense& b) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[i].size(); ++j) n += a[i][j] != b[i][j];
  return n;
}

// d(x, A y) by forming A y explicitly.
inline long column_distance(const bhtn::BitMatrix& a, const std::vector<int>& x,
                            const std::vector<int>& y) {
  long d = 0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    int v = 0;
    for (std::size_t l = 0; l < a.cols(); ++l) v |= a.get(i, l) & y[l];
    d += v != x[i];
  }
  return d;
}

inline std::vector<int> bits_of(std::uint64_t mask, std::size_t n) {
  std::vector<int> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = (mask >> i) & 1U;
  return v;
}

inline bhtn::BitVector to_bitvector(const std::vector<int>& v) {
  bhtn::BitVector b(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) b.set(i, v[i] != 0);
  return b;
}

// Direct evaluation of a QUBO from its coefficient tables.
inline double qubo_value(const bhtn::QuboModel& q, const std::vector<int>& x) {
  double e = q.offset;
  for (std::size_t i = 0; i < q.num_vars; ++i) e += q.linear[i] * x[i];
  for (const auto& [ij, c] : q.quadratic) e += c * x[ij.first] * x[ij.second];
  return e;
}

// min over auxiliary bits of the QUBO with the original bits fixed to y.
inline double min_over_aux(const bhtn::QuboModel& q, std::uint64_t y) {
  const std::size_t k = q.num_vars - q.num_original;
  double best = std::numeric_limits<double>::infinity();
  for (std::uint64_t z = 0; z < (std::uint64_t{1} << k); ++z) {
    const auto x = bits_of(y | (z << q.num_original), q.num_vars);
    best = std::min(best, qubo_value(q, x));
  }
  return best;
}

// Minimum of a QUBO by enumeration, visiting masks from the top down.
inline double qubo_min(const bhtn::QuboModel& q) {
  double best = std::numeric_limits<double>::infinity();
  for (std::uint64_t m = std::uint64_t{1} << q.num_vars; m-- > 0;)
    best = std::min(best, qubo_value(q, bits_of(m, q.num_vars)));
  return best;
}

// Index-by-index contraction: out[a..., b..., k] = OR_{i,j} core[k,i,j] & left[a...,i] & right[b...,j].
inline bhtn::BitTensor contract(const bhtn::BitTensor& core, const bhtn::BitTensor& left,
                                const bhtn::BitTensor& right) {
  const std::size_t q = core.shape()[0], r1 = core.shape()[1], r2 = core.shape()[2];
  const std::size_t nl = left.size() / r1, nr = right.size() / r2;
  bhtn::Shape shape(left.shape().begin(), left.shape().end() - 1);
  shape.insert(shape.end(), right.shape().begin(), right.shape().end() - 1);
  shape.push_back(q);
  bhtn::BitTensor out(shape);
  for (std::size_t a = 0; a < nl; ++a)
    for (std::size_t b = 0; b < nr; ++b)
      for (std::size_t k = 0; k < q; ++k) {
        bool v = false;
        for (std::size_t i = 0; i < r1; ++i)
          for (std::size_t j = 0; j < r2; ++j)
            v = v || (core.get_linear((k * r1 + i) * r2 + j) && left.get_linear(a * r1 + i) &&
                      right.get_linear(b * r2 + j));
        out.set_linear((a * nr + b) * q + k, v);
      }
  return out;
}

inline bhtn::BitMatrix random_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c,
                                     double p = 0.5) {
  std::bernoulli_distribution bit(p);
  bhtn::BitMatrix m(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) m.set(i, j, bit(rng));
  return m;
}

inline bhtn::BitTensor random_tensor(std::mt19937_64& rng, bhtn::Shape shape, double p = 0.5) {
  std::bernoulli_distribution bit(p);
  bhtn::BitTensor t(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) t.set_linear(i, bit(rng));
  return t;
}

inline std::vector<int> random_bits(std::mt19937_64& rng, std::size_t n, double p = 0.5) {
  std::bernoulli_distribution bit(p);
  std::vector<int> v(n);
  for (auto& b : v) b = bit(rng);
  return v;
}

}  // namespace oracle
