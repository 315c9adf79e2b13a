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

#include <cctype>
#include <charconv>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "dskip/errors.hpp"
#include "dskip/expr.hpp"
#include "dskip/schema.hpp"
#include "dskip/udf.hpp"

namespace dskip {

// Predicate grammar (keywords are case-insensitive, NOT > AND > OR):
//   expr    := expr AND expr | expr OR expr | NOT expr | (expr) | leaf
//   leaf    := col op literal
//            | col BETWEEN literal AND literal
//            | col IN (literal, ...)
//            | col LIKE 'pattern'
//            | UDF(arg, ...) [op literal]
//            | UDF(arg, ...) IN (literal, ...)     -- sugar for OR of equalities
//   op      := < | <= | > | >= | =
//   literal := integer | real | 'text with '' escape'

namespace detail {

enum class TokKind { Ident, Keyword, Number, String, Op, LParen, RParen, Comma, End };

struct Token {
  TokKind kind;
  std::string text;    // identifier/keyword (keywords upper-cased), op text
  Literal literal;     // for Number/String
  std::size_t pos = 0;
};

inline bool is_keyword(const std::string& upper) {
  return upper == "AND" || upper == "OR" || upper == "NOT" || upper == "BETWEEN" ||
         upper == "IN" || upper == "LIKE";
}

inline std::vector<Token> lex_predicate(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto fail = [&](const std::string& msg, std::size_t at) -> void { throw ParseError(msg, at); };
  while (i < text.size()) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    std::size_t start = i;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_')) {
        ++j;
      }
      std::string word(text.substr(i, j - i));
      std::string upper = word;
      for (char& ch : upper) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
      if (is_keyword(upper)) {
        out.push_back({TokKind::Keyword, upper, Literal(), start});
      } else {
        out.push_back({TokKind::Ident, word, Literal(), start});
      }
      i = j;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '-' && i + 1 < text.size() &&
         (std::isdigit(static_cast<unsigned char>(text[i + 1])) || text[i + 1] == '.'))) {
      std::size_t j = i + (c == '-' ? 1 : 0);
      bool is_real = false;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      if (j < text.size() && text[j] == '.') {
        is_real = true;
        ++j;
        while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      }
      if (j < text.size() && (text[j] == 'e' || text[j] == 'E')) {
        is_real = true;
        ++j;
        if (j < text.size() && (text[j] == '+' || text[j] == '-')) ++j;
        if (j >= text.size() || !std::isdigit(static_cast<unsigned char>(text[j]))) {
          fail("malformed exponent", j < text.size() ? j : text.size());
        }
        while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      }
      std::string num(text.substr(i, j - i));
      Literal lit;
      if (!is_real) {
        std::int64_t v = 0;
        auto res = std::from_chars(num.data(), num.data() + num.size(), v);
        if (res.ec == std::errc{} && res.ptr == num.data() + num.size()) {
          lit = Literal(v);
        } else {
          is_real = true;  // out of int64 range
        }
      }
      if (is_real) {
        double v = 0;
        auto res = std::from_chars(num.data(), num.data() + num.size(), v);
        if (res.ec != std::errc{} || res.ptr != num.data() + num.size()) {
          fail("malformed number '" + num + "'", start);
        }
        if (!std::isfinite(v)) fail("real literal must be finite", start);
        lit = Literal(v);
      }
      out.push_back({TokKind::Number, num, lit, start});
      i = j;
      continue;
    }
    if (c == '\'') {
      std::string s;
      std::size_t j = i + 1;
      while (true) {
        if (j >= text.size()) fail("unterminated string literal", start);
        if (text[j] == '\'') {
          if (j + 1 < text.size() && text[j + 1] == '\'') {
            s += '\'';
            j += 2;
            continue;
          }
          ++j;
          break;
        }
        s += text[j];
        ++j;
      }
      out.push_back({TokKind::String, "", Literal(std::move(s)), start});
      i = j;
      continue;
    }
    if (c == '<' || c == '>') {
      std::string op(1, c);
      if (i + 1 < text.size() && text[i + 1] == '=') {
        op += '=';
        ++i;
      }
      out.push_back({TokKind::Op, op, Literal(), start});
      ++i;
      continue;
    }
    if (c == '=') {
      out.push_back({TokKind::Op, "=", Literal(), start});
      ++i;
      continue;
    }
    if (c == '(') {
      out.push_back({TokKind::LParen, "(", Literal(), start});
      ++i;
      continue;
    }
    if (c == ')') {
      out.push_back({TokKind::RParen, ")", Literal(), start});
      ++i;
      continue;
    }
    if (c == ',') {
      out.push_back({TokKind::Comma, ",", Literal(), start});
      ++i;
      continue;
    }
    fail(std::string("unexpected character '") + c + "'", start);
  }
  out.push_back({TokKind::End, "", Literal(), text.size()});
  return out;
}

class PredicateParser {
 public:
  PredicateParser(std::string_view text, const Schema& schema, const UdfRegistry& udfs)
      : schema_(schema), udfs_(udfs), tokens_(lex_predicate(text)) {}

  ExprPtr parse() {
    ExprPtr e = parse_or();
    expect(TokKind::End, "end of input");
    return e;
  }

 private:
  const Token& cur() const { return tokens_[pos_]; }
  const Token& next() { return tokens_[pos_++]; }
  bool at_keyword(const char* kw) const {
    return cur().kind == TokKind::Keyword && cur().text == kw;
  }
  void expect(TokKind k, const char* what) {
    if (cur().kind != k) throw ParseError(std::string("expected ") + what, cur().pos);
    ++pos_;
  }

  ExprPtr parse_or() {
    ExprPtr left = parse_and();
    while (at_keyword("OR")) {
      ++pos_;
      left = make_or(std::move(left), parse_and());
    }
    return left;
  }

  ExprPtr parse_and() {
    ExprPtr left = parse_unary();
    while (at_keyword("AND")) {
      ++pos_;
      left = make_and(std::move(left), parse_unary());
    }
    return left;
  }

  ExprPtr parse_unary() {
    if (at_keyword("NOT")) {
      ++pos_;
      return make_not(parse_unary());
    }
    if (cur().kind == TokKind::LParen) {
      ++pos_;
      ExprPtr e = parse_or();
      expect(TokKind::RParen, "')'");
      return e;
    }
    return parse_leaf();
  }

  CompareOp parse_op() {
    if (cur().kind != TokKind::Op) throw ParseError("expected comparison operator", cur().pos);
    const std::string& t = next().text;
    if (t == "<") return CompareOp::Lt;
    if (t == "<=") return CompareOp::Le;
    if (t == ">") return CompareOp::Gt;
    if (t == ">=") return CompareOp::Ge;
    return CompareOp::Eq;
  }

  Literal parse_literal() {
    if (cur().kind == TokKind::Number || cur().kind == TokKind::String) return next().literal;
    throw ParseError("expected literal", cur().pos);
  }

  ColumnRef bind_column(const std::string& name, std::size_t pos) {
    auto idx = schema_.index_of(name);
    if (!idx) throw ParseError("unknown column '" + name + "'", pos);
    return ColumnRef{name, schema_.at(*idx).type, *idx};
  }

  void check_column_literal(const ColumnRef& col, const Literal& lit, std::size_t pos) {
    bool ok = (col.declared_type == ValueType::Text) ? lit.is_text() : lit.is_numeric();
    if (!ok) {
      throw ParseError("type mismatch: column '" + col.name + "' is " +
                           to_string(col.declared_type) + " but literal is not",
                       pos);
    }
  }

  ExprPtr parse_leaf() {
    if (cur().kind != TokKind::Ident) throw ParseError("expected column or UDF", cur().pos);
    Token name = next();
    if (cur().kind == TokKind::LParen) return parse_udf(name);

    ColumnRef col = bind_column(name.text, name.pos);
    if (at_keyword("BETWEEN")) {
      ++pos_;
      std::size_t lo_pos = cur().pos;
      Literal lo = parse_literal();
      if (!at_keyword("AND")) throw ParseError("expected AND in BETWEEN", cur().pos);
      ++pos_;
      std::size_t hi_pos = cur().pos;
      Literal hi = parse_literal();
      check_column_literal(col, lo, lo_pos);
      check_column_literal(col, hi, hi_pos);
      auto cmp = compare_literals(lo, hi);
      if (!cmp || *cmp > 0) throw ParseError("BETWEEN bounds out of order", lo_pos);
      return make_expr({BetweenNode{std::move(col), std::move(lo), std::move(hi)}});
    }
    if (at_keyword("IN")) {
      ++pos_;
      expect(TokKind::LParen, "'('");
      std::vector<Literal> items;
      while (true) {
        std::size_t p = cur().pos;
        Literal item = parse_literal();
        check_column_literal(col, item, p);
        items.push_back(std::move(item));
        if (cur().kind == TokKind::Comma) {
          ++pos_;
          continue;
        }
        break;
      }
      expect(TokKind::RParen, "')'");
      return make_expr({InNode{std::move(col), std::move(items)}});
    }
    if (at_keyword("LIKE")) {
      ++pos_;
      if (col.declared_type != ValueType::Text) {
        throw ParseError("LIKE requires a text column", name.pos);
      }
      std::size_t p = cur().pos;
      if (cur().kind != TokKind::String) throw ParseError("expected pattern string", p);
      std::string pattern = next().literal.as_text();
      std::size_t trailing = 0;
      for (auto it = pattern.rbegin(); it != pattern.rend() && *it == '\\'; ++it) ++trailing;
      if (trailing % 2 == 1) throw ParseError("pattern ends with dangling escape", p);
      return make_expr({LikeNode{std::move(col), std::move(pattern)}});
    }
    std::size_t op_pos = cur().pos;
    CompareOp op = parse_op();
    std::size_t lit_pos = cur().pos;
    Literal lit = parse_literal();
    check_column_literal(col, lit, lit_pos);
    (void)op_pos;
    return make_compare(std::move(col), op, std::move(lit));
  }

  ExprPtr parse_udf(const Token& name) {
    const Udf* udf = udfs_.find(name.text);
    if (!udf) throw ParseError("unknown UDF '" + name.text + "'", name.pos);
    expect(TokKind::LParen, "'('");
    std::vector<UdfArg> args;
    std::vector<std::size_t> arg_pos;
    if (cur().kind != TokKind::RParen) {
      while (true) {
        arg_pos.push_back(cur().pos);
        if (cur().kind == TokKind::Ident) {
          args.emplace_back(bind_column(cur().text, cur().pos));
          ++pos_;
        } else {
          args.emplace_back(parse_literal());
        }
        if (cur().kind == TokKind::Comma) {
          ++pos_;
          continue;
        }
        break;
      }
    }
    expect(TokKind::RParen, "')'");

    if (args.size() != udf->signature.size()) {
      throw ParseError("UDF '" + name.text + "' expects " +
                           std::to_string(udf->signature.size()) + " arguments",
                       name.pos);
    }
    for (std::size_t i = 0; i < args.size(); ++i) {
      check_udf_arg(name.text, udf->signature[i], args[i], arg_pos[i]);
    }
    validate_udf_literals(*udf, args, name.pos);

    if (at_keyword("IN")) {
      ++pos_;
      expect(TokKind::LParen, "'('");
      std::vector<Literal> items;
      while (true) {
        std::size_t p = cur().pos;
        Literal item = parse_literal();
        check_udf_comparison(*udf, item, p, name.pos);
        items.push_back(std::move(item));
        if (cur().kind == TokKind::Comma) {
          ++pos_;
          continue;
        }
        break;
      }
      expect(TokKind::RParen, "')'");
      // udf(...) IN (a, b) is sugar for udf(...) = a OR udf(...) = b.
      ExprPtr result;
      for (auto& item : items) {
        UdfCallNode call{name.text, args, std::make_pair(CompareOp::Eq, std::move(item))};
        ExprPtr leaf = make_expr({std::move(call)});
        result = result ? make_or(std::move(result), std::move(leaf)) : std::move(leaf);
      }
      return result;
    }

    std::optional<std::pair<CompareOp, Literal>> comparison;
    if (cur().kind == TokKind::Op) {
      CompareOp op = parse_op();
      std::size_t p = cur().pos;
      Literal lit = parse_literal();
      check_udf_comparison(*udf, lit, p, name.pos);
      comparison = std::make_pair(op, std::move(lit));
    }
    if (udf->return_kind == UdfReturnKind::Boolean && comparison) {
      throw ParseError("UDF '" + name.text + "' is boolean and takes no comparison", name.pos);
    }
    if (udf->return_kind != UdfReturnKind::Boolean && !comparison) {
      throw ParseError("UDF '" + name.text + "' must be compared to a literal", name.pos);
    }
    return make_expr({UdfCallNode{name.text, std::move(args), std::move(comparison)}});
  }

  void check_udf_arg(const std::string& udf, UdfArgKind kind, const UdfArg& arg, std::size_t pos) {
    auto bad = [&](const char* want) {
      throw ParseError("UDF '" + udf + "': argument must be " + want, pos);
    };
    switch (kind) {
      case UdfArgKind::TextLiteral:
        if (!std::holds_alternative<Literal>(arg) || !std::get<Literal>(arg).is_text()) {
          bad("a string literal");
        }
        break;
      case UdfArgKind::NumericLiteral:
        if (!std::holds_alternative<Literal>(arg) || !std::get<Literal>(arg).is_numeric()) {
          bad("a numeric literal");
        }
        break;
      case UdfArgKind::NumericColumn:
        if (!std::holds_alternative<ColumnRef>(arg) ||
            std::get<ColumnRef>(arg).declared_type == ValueType::Text) {
          bad("a numeric column");
        }
        break;
      case UdfArgKind::TextColumn:
        if (!std::holds_alternative<ColumnRef>(arg) ||
            std::get<ColumnRef>(arg).declared_type != ValueType::Text) {
          bad("a text column");
        }
        break;
    }
  }

  void check_udf_comparison(const Udf& udf, const Literal& lit, std::size_t pos,
                            std::size_t name_pos) {
    if (udf.return_kind == UdfReturnKind::Boolean) {
      throw ParseError("UDF '" + udf.name + "' is boolean and takes no comparison", name_pos);
    }
    bool ok = (udf.return_kind == UdfReturnKind::Real) ? lit.is_numeric() : lit.is_text();
    if (!ok) throw ParseError("comparison literal type does not match UDF result", pos);
  }

  // Fail early on literals the UDF can never evaluate (bad WKT, unknown
  // extractor).
  void validate_udf_literals(const Udf& udf, const std::vector<UdfArg>& args,
                             std::size_t name_pos) {
    if (udf.name == "ST_CONTAINS") {
      try {
        parse_wkt_polygon(std::get<Literal>(args[0]).as_text());
      } catch (const UdfError& e) {
        throw ParseError(e.what(), name_pos);
      }
    }
    if (udf.name == "EXTRACT") {
      const std::string& extractor = std::get<Literal>(args[0]).as_text();
      if (!udfs_.extractors().contains(extractor)) {
        throw ParseError("unknown extractor '" + extractor + "'", name_pos);
      }
    }
  }

  const Schema& schema_;
  const UdfRegistry& udfs_;
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses predicate text against a schema. Throws ParseError with a position
/// on syntax errors, unknown columns/UDFs, and type mismatches.
inline ExprPtr parse_predicate(std::string_view text, const Schema& schema,
                               const UdfRegistry& udfs) {
  bool only_ws = true;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) {
      only_ws = false;
      break;
    }
  }
  if (text.empty() || only_ws) throw ParseError("empty predicate", 0);
  return detail::PredicateParser(text, schema, udfs).parse();
}

}  // namespace dskip
