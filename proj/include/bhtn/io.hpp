#pragma once

// File and wire formats.
//
//   tensor/matrix JSON  {"shape":[...], "data":"<base64>"}; bits are packed
//                       row-major, least significant bit first in each byte.
//   plain text          first line: the shape as whitespace separated sizes;
//                       then one '0'/'1' character per entry in row-major order
//                       (whitespace ignored).
//   QUBO JSON           {"n":N, "offset":c, "linear":{"i":a_i},
//                        "quadratic":{"i,j":a_ij}}

#include <cctype>
#include <fstream>
#include <iterator>
#include <sstream>
#include <stdexcept>
#include <string>

#include <boost/archive/iterators/base64_from_binary.hpp>
#include <boost/archive/iterators/binary_from_base64.hpp>
#include <boost/archive/iterators/transform_width.hpp>
#include <nlohmann/json.hpp>

#include "bhtn/bool_core.hpp"
#include "bhtn/hubo.hpp"

namespace bhtn {

using json = nlohmann::json;

/// Malformed input file or payload.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string base64_encode(const std::string& bytes) {
  using namespace boost::archive::iterators;
  using It = base64_from_binary<transform_width<std::string::const_iterator, 6, 8>>;
  std::string out(It(bytes.begin()), It(bytes.end()));
  out.append((3 - bytes.size() % 3) % 3, '=');
  return out;
}

inline std::string base64_decode(std::string text) {
  using namespace boost::archive::iterators;
  std::erase_if(text, [](unsigned char c) { return std::isspace(c); });
  if (text.size() % 4 != 0) throw ParseError("base64: length is not a multiple of 4");
  std::size_t pad = 0;
  while (pad < 2 && !text.empty() && text[text.size() - 1 - pad] == '=') ++pad;
  for (std::size_t i = 0; i + pad < text.size(); ++i) {
    const unsigned char c = static_cast<unsigned char>(text[i]);
    if (!(std::isalnum(c) || c == '+' || c == '/')) throw ParseError("base64: invalid character");
  }
  std::replace(text.end() - static_cast<std::ptrdiff_t>(pad), text.end(), '=', 'A');
  using It = transform_width<binary_from_base64<std::string::const_iterator>, 8, 6>;
  std::string out(It(text.begin()), It(text.end()));
  out.resize(out.size() - pad);
  return out;
}

inline std::string pack_bits(const BitVector& v) {
  std::string bytes((v.size() + 7) / 8, '\0');
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i]) bytes[i / 8] = static_cast<char>(bytes[i / 8] | (1 << (i % 8)));
  return bytes;
}

inline BitVector unpack_bits(const std::string& bytes, std::size_t len) {
  if (bytes.size() != (len + 7) / 8) {
    throw ParseError("bit payload holds " + std::to_string(bytes.size()) + " bytes, expected " +
                     std::to_string((len + 7) / 8));
  }
  BitVector v(len);
  for (std::size_t i = 0; i < len; ++i)
    if ((static_cast<unsigned char>(bytes[i / 8]) >> (i % 8)) & 1U) v.set(i, true);
  return v;
}

inline Shape parse_shape(const json& j) {
  if (!j.is_array() || j.empty()) throw ParseError("\"shape\" must be a non-empty array");
  Shape shape;
  for (const auto& d : j) {
    if (!d.is_number_unsigned() || d.get<std::size_t>() == 0) {
      throw ParseError("\"shape\" entries must be positive integers");
    }
    shape.push_back(d.get<std::size_t>());
  }
  return shape;
}

}  // namespace detail

inline json tensor_to_json(const BitTensor& t) {
  return {{"shape", t.shape()}, {"data", detail::base64_encode(detail::pack_bits(t.data()))}};
}

inline BitTensor tensor_from_json(const json& j) {
  if (!j.is_object() || !j.contains("shape") || !j.contains("data") || !j["data"].is_string()) {
    throw ParseError("tensor JSON needs \"shape\" and string \"data\"");
  }
  Shape shape = detail::parse_shape(j["shape"]);
  const std::size_t n = shape_size(shape);
  return BitTensor(std::move(shape),
                   detail::unpack_bits(detail::base64_decode(j["data"].get<std::string>()), n));
}

inline json matrix_to_json(const BitMatrix& m) {
  return tensor_to_json(to_tensor(m, {m.rows(), m.cols()}));
}

inline BitMatrix matrix_from_json(const json& j) {
  BitTensor t = tensor_from_json(j);
  if (t.order() != 2) throw ParseError("matrix JSON must have a 2-entry shape");
  return to_matrix(t, t.shape()[0]);
}

inline std::string tensor_to_text(const BitTensor& t) {
  std::string out;
  for (std::size_t i = 0; i < t.order(); ++i) out += (i ? " " : "") + std::to_string(t.shape()[i]);
  out += '\n';
  const std::size_t width = t.shape().back();
  for (std::size_t i = 0; i < t.size(); ++i) {
    out += t.get_linear(i) ? '1' : '0';
    if ((i + 1) % width == 0) out += '\n';
  }
  return out;
}

inline BitTensor tensor_from_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("plain-text tensor: missing shape line");
  std::istringstream shape_in(line);
  Shape shape;
  std::string tok;
  while (shape_in >> tok) {
    std::size_t pos = 0;
    unsigned long long d = 0;
    try {
      d = std::stoull(tok, &pos);
    } catch (const std::exception&) {
      throw ParseError("plain-text tensor: bad shape entry '" + tok + "'");
    }
    if (pos != tok.size() || d == 0) throw ParseError("plain-text tensor: bad shape entry '" + tok + "'");
    shape.push_back(static_cast<std::size_t>(d));
  }
  if (shape.empty()) throw ParseError("plain-text tensor: empty shape line");
  BitTensor t(shape);
  std::size_t i = 0;
  for (char c; in.get(c);) {
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    if (c != '0' && c != '1') throw ParseError(std::string("plain-text tensor: unexpected character '") + c + "'");
    if (i >= t.size()) throw ParseError("plain-text tensor: more entries than the shape holds");
    t.set_linear(i++, c == '1');
  }
  if (i != t.size()) {
    throw ParseError("plain-text tensor: " + std::to_string(i) + " entries, shape needs " +
                     std::to_string(t.size()));
  }
  return t;
}

/// Accepts either format; JSON is recognized by a leading '{'.
inline BitTensor parse_tensor(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    try {
      return tensor_from_json(json::parse(text));
    } catch (const json::exception& e) {
      throw ParseError(std::string("tensor JSON: ") + e.what());
    } catch (const DimensionError& e) {
      throw ParseError(std::string("tensor JSON: ") + e.what());
    }
  }
  return tensor_from_text(text);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << content;
}

// ---------------------------------------------------------------------------
// QUBO wire format

inline json qubo_to_json(const QuboModel& q) {
  json linear = json::object();
  for (std::size_t i = 0; i < q.num_vars; ++i)
    if (q.linear[i] != 0.0) linear[std::to_string(i)] = q.linear[i];
  json quadratic = json::object();
  for (const auto& [ij, coef] : q.quadratic)
    quadratic[std::to_string(ij.first) + "," + std::to_string(ij.second)] = coef;
  return {{"n", q.num_vars}, {"offset", q.offset}, {"linear", linear}, {"quadratic", quadratic}};
}

inline QuboModel qubo_from_json(const json& j) {
  auto index = [](const std::string& s, std::size_t n) {
    std::size_t pos = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(s, &pos);
    } catch (const std::exception&) {
      throw ParseError("QUBO: bad variable index '" + s + "'");
    }
    if (pos != s.size() || v >= n) throw ParseError("QUBO: variable index '" + s + "' out of range");
    return static_cast<std::uint32_t>(v);
  };
  if (!j.is_object() || !j.contains("n") || !j["n"].is_number_unsigned()) {
    throw ParseError("QUBO: missing unsigned \"n\"");
  }
  const std::size_t n = j["n"].get<std::size_t>();
  QuboModel q(n);
  if (j.contains("offset")) {
    if (!j["offset"].is_number()) throw ParseError("QUBO: \"offset\" must be a number");
    q.offset = j["offset"].get<double>();
  }
  if (j.contains("linear")) {
    if (!j["linear"].is_object()) throw ParseError("QUBO: \"linear\" must be an object");
    for (const auto& [k, v] : j["linear"].items()) {
      if (!v.is_number()) throw ParseError("QUBO: non-numeric linear coefficient");
      q.linear[index(k, n)] += v.get<double>();
    }
  }
  if (j.contains("quadratic")) {
    if (!j["quadratic"].is_object()) throw ParseError("QUBO: \"quadratic\" must be an object");
    for (const auto& [k, v] : j["quadratic"].items()) {
      const auto comma = k.find(',');
      if (comma == std::string::npos) throw ParseError("QUBO: quadratic key '" + k + "' is not \"i,j\"");
      const auto a = index(k.substr(0, comma), n);
      const auto b = index(k.substr(comma + 1), n);
      if (a >= b) throw ParseError("QUBO: quadratic key '" + k + "' must have i < j");
      if (!v.is_number()) throw ParseError("QUBO: non-numeric quadratic coefficient");
      q.add_quadratic(a, b, v.get<double>());
    }
  }
  return q;
}

}  // namespace bhtn
