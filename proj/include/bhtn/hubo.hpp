#pragma once

// Pseudo-Boolean objectives for the single-column factorization subproblem.
//
// For a fixed factor A (n x r) and a target column x, the Hamming distance
// d(x, A y) is a multilinear polynomial in y. Each row j with support S_j
// contributes the Boolean OR of its supported variables,
//   f_j(y) = 1 - prod_{l in S_j} (1 - y_l)
//          = sum_{U subset S_j, U nonempty} (-1)^{|U|+1} prod_{l in U} y_l,
// with sign -1 when x_j = 1 and +1 when x_j = 0, on top of the constant
// popcount(x). HuboPoly holds that expansion exactly; QuboModel is its
// degree-2 reduction with auxiliary product variables.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bhtn/bool_core.hpp"

namespace bhtn {

using Assignment = BitVector;
using VarSet = std::vector<std::uint32_t>;

/// Multilinear polynomial over binary variables. Keys are sorted, duplicate
/// free index sets (the empty set is the constant); zero coefficients are
/// never stored.
class HuboPoly {
 public:
  HuboPoly() = default;
  explicit HuboPoly(std::size_t num_vars) : num_vars_(num_vars) {}

  std::size_t num_vars() const { return num_vars_; }
  const std::map<VarSet, double>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  void add_term(VarSet vars, double coef) {
    std::sort(vars.begin(), vars.end());
    vars.erase(std::unique(vars.begin(), vars.end()), vars.end());  // y*y = y
    if (!vars.empty() && vars.back() >= num_vars_) {
      throw DimensionError("HuboPoly::add_term: variable " + std::to_string(vars.back()) +
                           " out of range for " + std::to_string(num_vars_) + " variables");
    }
    if (coef == 0.0) return;
    auto [it, inserted] = terms_.try_emplace(std::move(vars), coef);
    if (!inserted) {
      it->second += coef;
      if (it->second == 0.0) terms_.erase(it);
    }
  }

  double constant() const {
    auto it = terms_.find(VarSet{});
    return it == terms_.end() ? 0.0 : it->second;
  }

  std::size_t degree() const {
    std::size_t d = 0;
    for (const auto& [vars, _] : terms_) d = std::max(d, vars.size());
    return d;
  }

  /// Exact textual identity of the polynomial; equal keys mean equal polynomials.
  std::string canonical_key() const {
    std::string key = std::to_string(num_vars_) + ';';
    for (const auto& [vars, coef] : terms_) {
      for (auto v : vars) key += std::to_string(v) + ',';
      std::uint64_t bits;
      std::memcpy(&bits, &coef, sizeof bits);
      key += ':' + std::to_string(bits) + ';';
    }
    return key;
  }

  friend bool operator==(const HuboPoly&, const HuboPoly&) = default;

 private:
  std::size_t num_vars_ = 0;
  std::map<VarSet, double> terms_;
};

inline double eval_hubo(const HuboPoly& p, const Assignment& y) {
  if (y.size() != p.num_vars()) {
    throw DimensionError("eval_hubo: assignment has " + std::to_string(y.size()) +
                         " bits, polynomial has " + std::to_string(p.num_vars()) + " variables");
  }
  double value = 0.0;
  for (const auto& [vars, coef] : p.terms()) {
    if (std::all_of(vars.begin(), vars.end(), [&](auto v) { return y[v]; })) value += coef;
  }
  return value;
}

inline std::string to_string(const HuboPoly& p) {
  std::ostringstream os;
  bool first = true;
  for (const auto& [vars, coef] : p.terms()) {
    os << (first ? "" : " + ") << coef;
    for (auto v : vars) os << "*y" << v;
    first = false;
  }
  if (first) os << '0';
  return os.str();
}

/// Largest row support expanded by default; a row of weight w yields 2^w - 1 monomials.
inline constexpr std::size_t kDefaultMaxRowWeight = 20;

/// HUBO whose value at y is hamming(x_col, bool_matvec(a, y)).
inline HuboPoly build_column_hubo(const BitMatrix& a, const BitVector& x_col,
                                  std::size_t max_row_weight = kDefaultMaxRowWeight) {
  if (a.rows() != x_col.size()) {
    throw DimensionError("build_column_hubo: factor has " + std::to_string(a.rows()) +
                         " rows, column has length " + std::to_string(x_col.size()));
  }
  // Rows with the same support only differ in sign; fold them into one weight.
  std::map<VarSet, long> weight;
  for (std::size_t j = 0; j < a.rows(); ++j) {
    VarSet support;
    for (std::size_t l = 0; l < a.cols(); ++l)
      if (a.get(j, l)) support.push_back(static_cast<std::uint32_t>(l));
    if (support.empty()) continue;  // f_j = 0
    if (support.size() > max_row_weight) {
      throw DimensionError("build_column_hubo: row " + std::to_string(j) + " has weight " +
                           std::to_string(support.size()) + " above the expansion cap " +
                           std::to_string(max_row_weight) + " (would generate 2^" +
                           std::to_string(support.size()) + "-1 monomials)");
    }
    weight[std::move(support)] += x_col[j] ? -1 : 1;
  }

  HuboPoly p(a.cols());
  p.add_term({}, static_cast<double>(x_col.popcount()));
  for (const auto& [support, w] : weight) {
    if (w == 0) continue;
    const std::size_t k = support.size();
    VarSet subset;
    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << k); ++mask) {
      subset.clear();
      for (std::size_t b = 0; b < k; ++b)
        if ((mask >> b) & 1U) subset.push_back(support[b]);
      const double sign = (subset.size() % 2 == 1) ? 1.0 : -1.0;
      p.add_term(subset, sign * static_cast<double>(w));
    }
  }
  return p;
}

/// Penalty scale for quadratization: the largest |coefficient|, or 1 when empty.
inline double default_strength(const HuboPoly& p) {
  double s = 0.0;
  for (const auto& [_, coef] : p.terms()) s = std::max(s, std::abs(coef));
  return s > 0.0 ? s : 1.0;
}

/// Auxiliary variable standing for the product of two earlier variables.
struct AuxVar {
  std::uint32_t var;
  std::uint32_t a;
  std::uint32_t b;
  friend bool operator==(const AuxVar&, const AuxVar&) = default;
};

struct QuboModel {
  std::size_t num_vars = 0;
  std::size_t num_original = 0;  // variables [num_original, num_vars) are auxiliaries
  std::vector<double> linear;
  std::map<std::pair<std::uint32_t, std::uint32_t>, double> quadratic;  // keys i < j
  double offset = 0.0;
  std::vector<AuxVar> aux;  // in creation order

  explicit QuboModel(std::size_t n = 0) : num_vars(n), num_original(n), linear(n, 0.0) {}

  void add_quadratic(std::uint32_t i, std::uint32_t j, double coef) {
    if (i == j) {
      linear.at(i) += coef;
      return;
    }
    if (i > j) std::swap(i, j);
    if (j >= num_vars) throw DimensionError("QuboModel: quadratic index out of range");
    auto [it, inserted] = quadratic.try_emplace({i, j}, coef);
    if (!inserted) {
      it->second += coef;
      if (it->second == 0.0) quadratic.erase(it);
    }
  }

  friend bool operator==(const QuboModel&, const QuboModel&) = default;
};

inline double eval_qubo(const QuboModel& q, const Assignment& x) {
  if (x.size() != q.num_vars) {
    throw DimensionError("eval_qubo: assignment has " + std::to_string(x.size()) +
                         " bits, model has " + std::to_string(q.num_vars) + " variables");
  }
  double value = q.offset;
  for (std::size_t i = 0; i < q.num_vars; ++i)
    if (x[i]) value += q.linear[i];
  for (const auto& [ij, coef] : q.quadratic)
    if (x[ij.first] && x[ij.second]) value += coef;
  return value;
}

/// Sets every auxiliary to the product it stands for (penalty-free completion).
inline void complete_auxiliaries(const QuboModel& q, Assignment& x) {
  for (const auto& z : q.aux) x.set(z.var, x[z.a] && x[z.b]);
}

/// Reduces p to degree two. Repeatedly substitutes z = x_i x_j for the pair
/// shared by the most terms of degree >= 3 (lowest pair on ties) and adds
/// strength * (x_i x_j - 2 z x_i - 2 z x_j + 3 z), which vanishes iff z = x_i x_j
/// and is at least `strength` otherwise.
inline QuboModel hubo_to_qubo(const HuboPoly& p, double strength) {
  if (!(strength > 0.0)) {
    throw std::invalid_argument("hubo_to_qubo: strength must be positive, got " +
                                std::to_string(strength));
  }
  std::map<VarSet, double> terms = p.terms();
  std::size_t n = p.num_vars();
  std::vector<AuxVar> aux;

  auto accumulate = [](std::map<VarSet, double>& m, VarSet key, double coef) {
    auto [it, inserted] = m.try_emplace(std::move(key), coef);
    if (!inserted) {
      it->second += coef;
      if (it->second == 0.0) m.erase(it);
    }
  };

  for (;;) {
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> pair_count;
    for (const auto& [vars, _] : terms) {
      if (vars.size() < 3) continue;
      for (std::size_t u = 0; u < vars.size(); ++u)
        for (std::size_t v = u + 1; v < vars.size(); ++v) ++pair_count[{vars[u], vars[v]}];
    }
    if (pair_count.empty()) break;

    auto best = pair_count.begin();
    for (auto it = pair_count.begin(); it != pair_count.end(); ++it)
      if (it->second > best->second) best = it;
    const auto [i, j] = best->first;
    const auto z = static_cast<std::uint32_t>(n++);
    aux.push_back({z, i, j});

    std::map<VarSet, double> next;
    for (auto& [vars, coef] : terms) {
      const bool has_i = std::binary_search(vars.begin(), vars.end(), i);
      const bool has_j = std::binary_search(vars.begin(), vars.end(), j);
      if (vars.size() >= 3 && has_i && has_j) {
        VarSet reduced;
        for (auto v : vars)
          if (v != i && v != j) reduced.push_back(v);
        reduced.push_back(z);  // z is the largest index so far
        accumulate(next, std::move(reduced), coef);
      } else {
        accumulate(next, vars, coef);
      }
    }
    accumulate(next, {i, j}, strength);
    accumulate(next, {i, z}, -2.0 * strength);
    accumulate(next, {j, z}, -2.0 * strength);
    accumulate(next, {z}, 3.0 * strength);
    terms = std::move(next);
  }

  QuboModel q(n);
  q.num_original = p.num_vars();
  q.aux = std::move(aux);
  for (const auto& [vars, coef] : terms) {
    switch (vars.size()) {
      case 0: q.offset += coef; break;
      case 1: q.linear[vars[0]] += coef; break;
      default: q.add_quadratic(vars[0], vars[1], coef); break;
    }
  }
  return q;
}

/// The QUBO read back as a (degree <= 2) polynomial over all of its variables.
inline HuboPoly to_hubo(const QuboModel& q) {
  HuboPoly p(q.num_vars);
  p.add_term({}, q.offset);
  for (std::size_t i = 0; i < q.num_vars; ++i)
    p.add_term({static_cast<std::uint32_t>(i)}, q.linear[i]);
  for (const auto& [ij, coef] : q.quadratic) p.add_term({ij.first, ij.second}, coef);
  return p;
}

}  // namespace bhtn
