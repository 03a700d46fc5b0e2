#pragma once

// Dense Boolean tensors, matrices and vectors over the OR-AND semiring.
//
// Every multi-index is linearized row-major (first index slowest). Under that
// convention reshaping never moves data, and matricizing a tensor by grouping
// leading modes into rows is a pure reinterpretation.

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <numeric>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace bhtn {

/// Raised when operand shapes or sizes are incompatible.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using Shape = std::vector<std::size_t>;

inline std::size_t shape_size(std::span<const std::size_t> shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>{});
}

inline std::string shape_string(std::span<const std::size_t> shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ')';
  return os.str();
}

namespace detail {

constexpr std::size_t kWordBits = 64;

constexpr std::size_t word_count(std::size_t bits) {
  return (bits + kWordBits - 1) / kWordBits;
}

inline void require_positive(std::span<const std::size_t> shape, const char* what) {
  for (auto n : shape) {
    if (n == 0) {
      throw DimensionError(std::string(what) + ": zero-sized dimension in shape " +
                           shape_string(shape));
    }
  }
}

}  // namespace detail

/// Packed bit array; bits past size() are always zero.
class BitVector {
 public:
  BitVector() = default;
  explicit BitVector(std::size_t len) : len_(len), words_(detail::word_count(len), 0) {}
  BitVector(std::initializer_list<int> bits) : BitVector(bits.size()) {
    std::size_t i = 0;
    for (int b : bits) set(i++, b != 0);
  }

  static BitVector from_bytes(std::span<const std::uint8_t> bits) {
    BitVector v(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i) v.set(i, bits[i] != 0);
    return v;
  }

  std::size_t size() const { return len_; }
  bool empty() const { return len_ == 0; }

  bool get(std::size_t i) const {
    return (words_[i / detail::kWordBits] >> (i % detail::kWordBits)) & 1U;
  }
  bool operator[](std::size_t i) const { return get(i); }

  void set(std::size_t i, bool value) {
    const auto mask = std::uint64_t{1} << (i % detail::kWordBits);
    auto& w = words_[i / detail::kWordBits];
    w = value ? (w | mask) : (w & ~mask);
  }
  void flip(std::size_t i) {
    words_[i / detail::kWordBits] ^= std::uint64_t{1} << (i % detail::kWordBits);
  }

  std::size_t popcount() const {
    std::size_t n = 0;
    for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
    return n;
  }
  bool all_zero() const { return popcount() == 0; }
  bool all_one() const { return popcount() == len_; }

  std::span<const std::uint64_t> words() const { return words_; }
  std::span<std::uint64_t> words() { return words_; }

  std::vector<std::uint8_t> to_bytes() const {
    std::vector<std::uint8_t> out(len_);
    for (std::size_t i = 0; i < len_; ++i) out[i] = get(i) ? 1 : 0;
    return out;
  }

  friend bool operator==(const BitVector&, const BitVector&) = default;

 private:
  std::size_t len_ = 0;
  std::vector<std::uint64_t> words_;
};

/// Row-major Boolean matrix. Each row is padded to a whole number of 64-bit
/// words so that row-level OR and popcount work word-at-a-time.
class BitMatrix {
 public:
  BitMatrix() = default;
  BitMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), stride_(detail::word_count(cols)), words_(rows * stride_, 0) {
    if (rows == 0 || cols == 0) {
      throw DimensionError("BitMatrix: dimensions must be positive, got " +
                           std::to_string(rows) + "x" + std::to_string(cols));
    }
  }
  BitMatrix(std::initializer_list<std::initializer_list<int>> rows)
      : BitMatrix(rows.size(), rows.size() ? rows.begin()->size() : 0) {
    std::size_t i = 0;
    for (const auto& row : rows) {
      if (row.size() != cols_) throw DimensionError("BitMatrix: ragged initializer");
      std::size_t j = 0;
      for (int b : row) set(i, j++, b != 0);
      ++i;
    }
  }

  static BitMatrix identity(std::size_t n) {
    BitMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.set(i, i, true);
    return m;
  }
  static BitMatrix ones(std::size_t rows, std::size_t cols) {
    BitMatrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j) m.set(i, j, true);
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return rows_ * cols_; }

  bool get(std::size_t i, std::size_t j) const {
    return (words_[i * stride_ + j / detail::kWordBits] >> (j % detail::kWordBits)) & 1U;
  }
  bool operator()(std::size_t i, std::size_t j) const { return get(i, j); }
  void set(std::size_t i, std::size_t j, bool value) {
    const auto mask = std::uint64_t{1} << (j % detail::kWordBits);
    auto& w = words_[i * stride_ + j / detail::kWordBits];
    w = value ? (w | mask) : (w & ~mask);
  }

  std::span<const std::uint64_t> row_words(std::size_t i) const {
    return {words_.data() + i * stride_, stride_};
  }
  std::span<std::uint64_t> row_words(std::size_t i) {
    return {words_.data() + i * stride_, stride_};
  }

  BitVector row(std::size_t i) const {
    BitVector v(cols_);
    std::copy_n(row_words(i).begin(), stride_, v.words().begin());
    return v;
  }
  BitVector col(std::size_t j) const {
    BitVector v(rows_);
    for (std::size_t i = 0; i < rows_; ++i) v.set(i, get(i, j));
    return v;
  }
  void set_col(std::size_t j, const BitVector& v) {
    if (v.size() != rows_) throw DimensionError("BitMatrix::set_col: length mismatch");
    for (std::size_t i = 0; i < rows_; ++i) set(i, j, v[i]);
  }

  std::size_t popcount() const {
    std::size_t n = 0;
    for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
    return n;
  }

  BitMatrix transposed() const {
    BitMatrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j)
        if (get(i, j)) t.set(j, i, true);
    return t;
  }

  friend bool operator==(const BitMatrix&, const BitMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::size_t stride_ = 0;
  std::vector<std::uint64_t> words_;
};

/// Dense Boolean multiway array with an explicit shape.
class BitTensor {
 public:
  BitTensor() = default;
  explicit BitTensor(Shape shape) : shape_(std::move(shape)), data_(shape_size(shape_)) {
    if (shape_.empty()) throw DimensionError("BitTensor: shape must have at least one mode");
    detail::require_positive(shape_, "BitTensor");
  }
  BitTensor(Shape shape, BitVector data) : shape_(std::move(shape)), data_(std::move(data)) {
    if (shape_.empty()) throw DimensionError("BitTensor: shape must have at least one mode");
    detail::require_positive(shape_, "BitTensor");
    if (data_.size() != shape_size(shape_)) {
      throw DimensionError("BitTensor: data length " + std::to_string(data_.size()) +
                           " does not match shape " + shape_string(shape_));
    }
  }

  const Shape& shape() const { return shape_; }
  std::size_t order() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  const BitVector& data() const { return data_; }

  std::size_t offset(std::span<const std::size_t> index) const {
    if (index.size() != shape_.size()) throw DimensionError("BitTensor: index arity mismatch");
    std::size_t off = 0;
    for (std::size_t m = 0; m < shape_.size(); ++m) {
      if (index[m] >= shape_[m]) throw DimensionError("BitTensor: index out of range");
      off = off * shape_[m] + index[m];
    }
    return off;
  }
  bool at(std::initializer_list<std::size_t> index) const {
    return data_[offset({index.begin(), index.size()})];
  }
  bool at(std::span<const std::size_t> index) const { return data_[offset(index)]; }
  void set(std::initializer_list<std::size_t> index, bool value) {
    data_.set(offset({index.begin(), index.size()}), value);
  }
  void set(std::span<const std::size_t> index, bool value) { data_.set(offset(index), value); }

  bool get_linear(std::size_t i) const { return data_[i]; }
  void set_linear(std::size_t i, bool value) { data_.set(i, value); }
  void flip_linear(std::size_t i) { data_.flip(i); }

  friend bool operator==(const BitTensor&, const BitTensor&) = default;

 private:
  Shape shape_;
  BitVector data_;
};

// ---------------------------------------------------------------------------
// Conversions between views. These never permute data.

inline BitMatrix to_matrix(const BitTensor& t, std::size_t rows) {
  if (rows == 0 || t.size() % rows != 0) {
    throw DimensionError("to_matrix: " + std::to_string(rows) + " rows do not divide " +
                         std::to_string(t.size()) + " entries");
  }
  const std::size_t cols = t.size() / rows;
  BitMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      if (t.get_linear(i * cols + j)) m.set(i, j, true);
  return m;
}

inline BitTensor to_tensor(const BitMatrix& m, Shape shape) {
  if (shape_size(shape) != m.size()) {
    throw DimensionError("to_tensor: shape " + shape_string(shape) + " does not hold a " +
                         std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + " matrix");
  }
  BitTensor t(std::move(shape));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      if (m.get(i, j)) t.set_linear(i * m.cols() + j, true);
  return t;
}

// ---------------------------------------------------------------------------
// Semiring products

/// Boolean matrix product: out[i][j] = OR_l (a[i][l] AND b[l][j]).
inline BitMatrix bool_matmul(const BitMatrix& a, const BitMatrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("bool_matmul: inner dimensions differ (" + std::to_string(a.cols()) +
                         " vs " + std::to_string(b.rows()) + ")");
  }
  BitMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto dst = out.row_words(i);
    for (std::size_t l = 0; l < a.cols(); ++l) {
      if (!a.get(i, l)) continue;
      auto src = b.row_words(l);
      for (std::size_t w = 0; w < dst.size(); ++w) dst[w] |= src[w];
    }
  }
  return out;
}

inline BitVector bool_matvec(const BitMatrix& a, const BitVector& y) {
  if (a.cols() != y.size()) {
    throw DimensionError("bool_matvec: matrix has " + std::to_string(a.cols()) +
                         " columns, vector has length " + std::to_string(y.size()));
  }
  BitVector out(a.rows());
  const auto yw = y.words();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto rw = a.row_words(i);
    bool hit = false;
    for (std::size_t w = 0; w < rw.size() && !hit; ++w) hit = (rw[w] & yw[w]) != 0;
    out.set(i, hit);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Hamming distance

inline std::size_t hamming(const BitVector& x, const BitVector& y) {
  if (x.size() != y.size()) {
    throw DimensionError("hamming: lengths differ (" + std::to_string(x.size()) + " vs " +
                         std::to_string(y.size()) + ")");
  }
  std::size_t n = 0;
  auto xw = x.words();
  auto yw = y.words();
  for (std::size_t w = 0; w < xw.size(); ++w) n += static_cast<std::size_t>(std::popcount(xw[w] ^ yw[w]));
  return n;
}

inline std::size_t hamming(const BitMatrix& x, const BitMatrix& y) {
  if (x.rows() != y.rows() || x.cols() != y.cols()) {
    throw DimensionError("hamming: matrix shapes differ");
  }
  std::size_t n = 0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto xw = x.row_words(i);
    auto yw = y.row_words(i);
    for (std::size_t w = 0; w < xw.size(); ++w) n += static_cast<std::size_t>(std::popcount(xw[w] ^ yw[w]));
  }
  return n;
}

inline std::size_t hamming(const BitTensor& x, const BitTensor& y) {
  if (x.shape() != y.shape()) {
    throw DimensionError("hamming: tensor shapes differ " + shape_string(x.shape()) + " vs " +
                         shape_string(y.shape()));
  }
  return hamming(x.data(), y.data());
}

// ---------------------------------------------------------------------------
// Reshaping and index permutation

inline BitTensor reshape(const BitTensor& t, Shape new_shape) {
  if (shape_size(new_shape) != t.size()) {
    throw DimensionError("reshape: cannot view " + shape_string(t.shape()) + " as " +
                         shape_string(new_shape));
  }
  return BitTensor(std::move(new_shape), t.data());
}

/// Generalized transpose: output mode m is input mode axes[m].
inline BitTensor permute(const BitTensor& t, std::span<const std::size_t> axes) {
  const auto& in_shape = t.shape();
  const std::size_t d = in_shape.size();
  if (axes.size() != d) throw DimensionError("permute: axis count mismatch");
  std::vector<bool> seen(d, false);
  for (auto a : axes) {
    if (a >= d || seen[a]) throw DimensionError("permute: axes are not a permutation");
    seen[a] = true;
  }
  Shape out_shape(d);
  for (std::size_t m = 0; m < d; ++m) out_shape[m] = in_shape[axes[m]];

  // Stride of each output mode measured in the input linearization.
  std::vector<std::size_t> in_stride(d, 1);
  for (std::size_t m = d - 1; m > 0; --m) in_stride[m - 1] = in_stride[m] * in_shape[m];
  std::vector<std::size_t> step(d);
  for (std::size_t m = 0; m < d; ++m) step[m] = in_stride[axes[m]];

  BitTensor out(out_shape);
  std::vector<std::size_t> idx(d, 0);
  std::size_t src = 0;
  for (std::size_t dst = 0; dst < out.size(); ++dst) {
    if (t.get_linear(src)) out.set_linear(dst, true);
    for (std::size_t m = d; m-- > 0;) {
      if (++idx[m] < out_shape[m]) {
        src += step[m];
        break;
      }
      src -= step[m] * (out_shape[m] - 1);
      idx[m] = 0;
    }
  }
  return out;
}

/// Groups modes [0, split) into rows and the remaining modes (including the
/// trailing connecting mode) into columns.
inline BitMatrix matricize_split(const BitTensor& t, std::size_t split) {
  // The last mode is the connecting dimension, so s = order - 1 data modes.
  const std::size_t s = t.order() - 1;
  if (split < 1 || split >= s) {
    throw DimensionError("matricize_split: split point " + std::to_string(split) +
                         " invalid for tensor of shape " + shape_string(t.shape()));
  }
  std::size_t rows = 1;
  for (std::size_t m = 0; m < split; ++m) rows *= t.shape()[m];
  return to_matrix(t, rows);
}

/// Reinterprets m (r rows, columns ordered (col_dims..., q) row-major) as a
/// tensor (r, col_dims..., q) and moves q to the front of the rows:
/// out[(iq * r + ir), jc] = m[ir, jc * q + iq].
inline BitMatrix move_q_to_rows(const BitMatrix& m, std::span<const std::size_t> col_dims,
                                std::size_t q, std::size_t r) {
  const std::size_t inner = shape_size(col_dims);
  if (q == 0 || m.rows() != r || m.cols() != inner * q) {
    throw DimensionError("move_q_to_rows: matrix " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()) + " inconsistent with r=" + std::to_string(r) +
                         ", q=" + std::to_string(q) + ", column dims " + shape_string(col_dims));
  }
  BitMatrix out(q * r, inner);
  for (std::size_t ir = 0; ir < r; ++ir)
    for (std::size_t jc = 0; jc < inner; ++jc)
      for (std::size_t iq = 0; iq < q; ++iq)
        if (m.get(ir, jc * q + iq)) out.set(iq * r + ir, jc, true);
  return out;
}

/// Inverse of move_q_to_rows.
inline BitMatrix move_q_to_cols(const BitMatrix& m, std::size_t q, std::size_t r) {
  if (q == 0 || m.rows() != q * r) throw DimensionError("move_q_to_cols: row count is not q*r");
  const std::size_t inner = m.cols();
  BitMatrix out(r, inner * q);
  for (std::size_t iq = 0; iq < q; ++iq)
    for (std::size_t ir = 0; ir < r; ++ir)
      for (std::size_t jc = 0; jc < inner; ++jc)
        if (m.get(iq * r + ir, jc)) out.set(ir, jc * q + iq, true);
  return out;
}

/// Boolean contraction of an order-3 core (q, r1, r2) with a left tensor
/// (..., r1) and a right tensor (..., r2). Result shape is
/// (left modes..., right modes..., q).
inline BitTensor tensor_contract(const BitTensor& core, const BitTensor& left,
                                 const BitTensor& right) {
  if (core.order() != 3) throw DimensionError("tensor_contract: core must be order 3");
  const std::size_t q = core.shape()[0];
  const std::size_t r1 = core.shape()[1];
  const std::size_t r2 = core.shape()[2];
  if (left.shape().back() != r1 || right.shape().back() != r2) {
    throw DimensionError("tensor_contract: ranks " + shape_string(core.shape()) +
                         " do not match left " + shape_string(left.shape()) + " / right " +
                         shape_string(right.shape()));
  }
  const std::size_t n_left = left.size() / r1;
  const std::size_t n_right = right.size() / r2;

  // core as r1 x (r2 * q), columns (b, c)
  BitMatrix core_mat(r1, r2 * q);
  for (std::size_t c = 0; c < q; ++c)
    for (std::size_t a = 0; a < r1; ++a)
      for (std::size_t b = 0; b < r2; ++b)
        if (core.at({c, a, b})) core_mat.set(a, b * q + c, true);

  const BitMatrix lc = bool_matmul(to_matrix(left, n_left), core_mat);  // (i) x (b, c)

  BitMatrix lc_rows(n_left * q, r2);  // (i, c) x b
  for (std::size_t i = 0; i < n_left; ++i)
    for (std::size_t b = 0; b < r2; ++b)
      for (std::size_t c = 0; c < q; ++c)
        if (lc.get(i, b * q + c)) lc_rows.set(i * q + c, b, true);

  const BitMatrix prod = bool_matmul(lc_rows, to_matrix(right, n_right).transposed());

  Shape out_shape(left.shape().begin(), left.shape().end() - 1);
  out_shape.insert(out_shape.end(), right.shape().begin(), right.shape().end() - 1);
  out_shape.push_back(q);
  BitTensor out(std::move(out_shape));
  for (std::size_t i = 0; i < n_left; ++i)
    for (std::size_t c = 0; c < q; ++c)
      for (std::size_t j = 0; j < n_right; ++j)
        if (prod.get(i * q + c, j)) out.set_linear((i * n_right + j) * q + c, true);
  return out;
}

}  // namespace bhtn
