/*
 * Copyright (c) dskip contributors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace dskip {

enum class ValueType { Integer, Real, Text };

inline const char* to_string(ValueType t) {
  switch (t) {
    case ValueType::Integer: return "integer";
    case ValueType::Real: return "real";
    case ValueType::Text: return "text";
  }
  return "?";
}

inline std::optional<ValueType> value_type_from_string(const std::string& s) {
  if (s == "integer") return ValueType::Integer;
  if (s == "real") return ValueType::Real;
  if (s == "text") return ValueType::Text;
  return std::nullopt;
}

/// A typed scalar value: 64-bit integer, finite double, UTF-8 text, or null.
class Literal {
 public:
  Literal() : value_(std::monostate{}) {}
  explicit Literal(std::int64_t v) : value_(v) {}
  explicit Literal(double v) : value_(v) {}
  explicit Literal(std::string v) : value_(std::move(v)) {}
  explicit Literal(const char* v) : value_(std::string(v)) {}

  static Literal null() { return Literal(); }

  bool is_null() const { return std::holds_alternative<std::monostate>(value_); }
  bool is_integer() const { return std::holds_alternative<std::int64_t>(value_); }
  bool is_real() const { return std::holds_alternative<double>(value_); }
  bool is_text() const { return std::holds_alternative<std::string>(value_); }
  bool is_numeric() const { return is_integer() || is_real(); }

  std::int64_t as_integer() const { return std::get<std::int64_t>(value_); }
  double as_real() const { return std::get<double>(value_); }
  const std::string& as_text() const { return std::get<std::string>(value_); }

  /// Numeric value widened to long double (exact for the full int64 range).
  long double numeric() const {
    return is_integer() ? static_cast<long double>(as_integer())
                        : static_cast<long double>(as_real());
  }

  bool operator==(const Literal& other) const { return value_ == other.value_; }

 private:
  std::variant<std::monostate, std::int64_t, double, std::string> value_;
};

/// Three-way comparison. Integer/real pairs are compared exactly via long
/// double; text compares bytewise. Returns nullopt when either side is null
/// or the kinds are not comparable (text vs numeric).
inline std::optional<int> compare_literals(const Literal& a, const Literal& b) {
  if (a.is_null() || b.is_null()) return std::nullopt;
  if (a.is_text() && b.is_text()) {
    int c = a.as_text().compare(b.as_text());
    return c < 0 ? -1 : (c > 0 ? 1 : 0);
  }
  if (a.is_numeric() && b.is_numeric()) {
    if (a.is_integer() && b.is_integer()) {
      auto x = a.as_integer(), y = b.as_integer();
      return x < y ? -1 : (x > y ? 1 : 0);
    }
    long double x = a.numeric(), y = b.numeric();
    if (std::isnan(static_cast<double>(x)) || std::isnan(static_cast<double>(y))) return std::nullopt;
    return x < y ? -1 : (x > y ? 1 : 0);
  }
  return std::nullopt;
}

/// Equality under numeric coercion: integer 5 equals real 5.0. Null equals
/// nothing, not even null.
inline bool literals_equal_coerced(const Literal& a, const Literal& b) {
  auto c = compare_literals(a, b);
  return c.has_value() && *c == 0;
}

/// Converts a non-null literal to the representation a column of `type`
/// stores. Lossless only: a real is accepted into an integer column when it
/// is integral and in range; integers widen to real; text never converts.
inline std::optional<Literal> coerce_to_type(const Literal& lit, ValueType type) {
  if (lit.is_null()) return std::nullopt;
  switch (type) {
    case ValueType::Integer: {
      if (lit.is_integer()) return lit;
      if (lit.is_real()) {
        double d = lit.as_real();
        // 2^63 is exactly representable as a double; int64 max is not.
        if (!(d >= -9223372036854775808.0 && d < 9223372036854775808.0)) return std::nullopt;
        auto i = static_cast<std::int64_t>(d);
        if (static_cast<double>(i) == d) return Literal(i);
        return std::nullopt;
      }
      return std::nullopt;
    }
    case ValueType::Real: {
      if (lit.is_real()) return lit;
      if (lit.is_integer()) return Literal(static_cast<double>(lit.as_integer()));
      return std::nullopt;
    }
    case ValueType::Text:
      if (lit.is_text()) return lit;
      return std::nullopt;
  }
  return std::nullopt;
}

/// Canonical byte encoding used for hashing: a 1-byte type tag followed by a
/// big-endian 8-byte payload for numerics (integers widened to real when the
/// column is real), or the raw UTF-8 bytes for text. Returns nullopt when the
/// value cannot appear in a column of `type`.
inline std::optional<std::vector<std::uint8_t>> encode_canonical(const Literal& lit,
                                                                 ValueType type) {
  auto coerced = coerce_to_type(lit, type);
  if (!coerced) return std::nullopt;
  std::vector<std::uint8_t> out;
  auto put_be64 = [&out](std::uint64_t v) {
    for (int i = 7; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  };
  switch (type) {
    case ValueType::Integer:
      out.push_back('I');
      put_be64(static_cast<std::uint64_t>(coerced->as_integer()));
      break;
    case ValueType::Real: {
      out.push_back('R');
      std::uint64_t bits;
      double d = coerced->as_real();
      if (d == 0.0) d = 0.0;  // -0.0 and 0.0 compare equal and must hash equal
      std::memcpy(&bits, &d, sizeof(bits));
      put_be64(bits);
      break;
    }
    case ValueType::Text: {
      out.push_back('T');
      const std::string& s = coerced->as_text();
      out.insert(out.end(), s.begin(), s.end());
      break;
    }
  }
  return out;
}

/// Shortest round-trip text form. Reals always carry a '.', exponent, or
/// special marker so they re-parse as reals.
inline std::string literal_to_string(const Literal& lit) {
  if (lit.is_null()) return "NULL";
  if (lit.is_integer()) return std::to_string(lit.as_integer());
  if (lit.is_real()) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), lit.as_real());
    std::string s(buf, res.ptr);
    if (s.find_first_of(".eE") == std::string::npos) s += ".0";
    return s;
  }
  // SQL string literal with '' escaping.
  std::string out = "'";
  for (char c : lit.as_text()) {
    if (c == '\'') out += "''";
    else out += c;
  }
  out += "'";
  return out;
}

}  // namespace dskip
