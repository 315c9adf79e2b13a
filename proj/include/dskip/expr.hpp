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

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "dskip/literal.hpp"

namespace dskip {

enum class CompareOp { Lt, Le, Gt, Ge, Eq };

inline const char* to_string(CompareOp op) {
  switch (op) {
    case CompareOp::Lt: return "<";
    case CompareOp::Le: return "<=";
    case CompareOp::Gt: return ">";
    case CompareOp::Ge: return ">=";
    case CompareOp::Eq: return "=";
  }
  return "?";
}

inline bool apply_compare_op(CompareOp op, int cmp) {
  switch (op) {
    case CompareOp::Lt: return cmp < 0;
    case CompareOp::Le: return cmp <= 0;
    case CompareOp::Gt: return cmp > 0;
    case CompareOp::Ge: return cmp >= 0;
    case CompareOp::Eq: return cmp == 0;
  }
  return false;
}

/// A schema-bound column reference.
struct ColumnRef {
  std::string name;
  ValueType declared_type = ValueType::Integer;
  std::size_t index = 0;

  bool operator==(const ColumnRef& o) const {
    return name == o.name && declared_type == o.declared_type && index == o.index;
  }
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct AndNode {
  ExprPtr left, right;
};
struct OrNode {
  ExprPtr left, right;
};
struct NotNode {
  ExprPtr child;
};
struct CompareNode {
  ColumnRef col;
  CompareOp op;
  Literal literal;
};
struct BetweenNode {
  ColumnRef col;
  Literal lo, hi;
};
struct InNode {
  ColumnRef col;
  std::vector<Literal> items;
};
struct LikeNode {
  ColumnRef col;
  std::string pattern;
};

using UdfArg = std::variant<ColumnRef, Literal>;

struct UdfCallNode {
  std::string name;
  std::vector<UdfArg> args;
  std::optional<std::pair<CompareOp, Literal>> comparison;
};

/// Boolean predicate tree. Leaves are Compare/Between/In/Like/UdfCall.
struct Expr {
  std::variant<AndNode, OrNode, NotNode, CompareNode, BetweenNode, InNode, LikeNode, UdfCallNode>
      node;
};

inline ExprPtr make_expr(Expr e) { return std::make_shared<const Expr>(std::move(e)); }
inline ExprPtr make_and(ExprPtr l, ExprPtr r) { return make_expr({AndNode{std::move(l), std::move(r)}}); }
inline ExprPtr make_or(ExprPtr l, ExprPtr r) { return make_expr({OrNode{std::move(l), std::move(r)}}); }
inline ExprPtr make_not(ExprPtr c) { return make_expr({NotNode{std::move(c)}}); }
inline ExprPtr make_compare(ColumnRef col, CompareOp op, Literal lit) {
  return make_expr({CompareNode{std::move(col), op, std::move(lit)}});
}

inline bool expr_equal(const Expr& a, const Expr& b);

namespace detail {

inline bool udf_arg_equal(const UdfArg& a, const UdfArg& b) {
  if (a.index() != b.index()) return false;
  if (std::holds_alternative<ColumnRef>(a)) {
    return std::get<ColumnRef>(a) == std::get<ColumnRef>(b);
  }
  return std::get<Literal>(a) == std::get<Literal>(b);
}

}  // namespace detail

inline bool expr_equal(const Expr& a, const Expr& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      [&b](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const T& y = std::get<T>(b.node);
        if constexpr (std::is_same_v<T, AndNode> || std::is_same_v<T, OrNode>) {
          return expr_equal(*x.left, *y.left) && expr_equal(*x.right, *y.right);
        } else if constexpr (std::is_same_v<T, NotNode>) {
          return expr_equal(*x.child, *y.child);
        } else if constexpr (std::is_same_v<T, CompareNode>) {
          return x.col == y.col && x.op == y.op && x.literal == y.literal;
        } else if constexpr (std::is_same_v<T, BetweenNode>) {
          return x.col == y.col && x.lo == y.lo && x.hi == y.hi;
        } else if constexpr (std::is_same_v<T, InNode>) {
          return x.col == y.col && x.items == y.items;
        } else if constexpr (std::is_same_v<T, LikeNode>) {
          return x.col == y.col && x.pattern == y.pattern;
        } else {
          const UdfCallNode& u = x;
          const UdfCallNode& v = y;
          if (u.name != v.name || u.args.size() != v.args.size()) return false;
          for (std::size_t i = 0; i < u.args.size(); ++i) {
            if (!detail::udf_arg_equal(u.args[i], v.args[i])) return false;
          }
          if (u.comparison.has_value() != v.comparison.has_value()) return false;
          if (u.comparison &&
              (u.comparison->first != v.comparison->first || u.comparison->second != v.comparison->second)) {
            return false;
          }
          return true;
        }
      },
      a.node);
}

namespace detail {

// Precedence levels for rendering: OR=0, AND=1, NOT=2, leaf=3.
inline int expr_precedence(const Expr& e) {
  if (std::holds_alternative<OrNode>(e.node)) return 0;
  if (std::holds_alternative<AndNode>(e.node)) return 1;
  if (std::holds_alternative<NotNode>(e.node)) return 2;
  return 3;
}

inline void render_expr_to(const Expr& e, std::string& out) {
  auto child = [&out](const Expr& c, int min_prec) {
    bool paren = expr_precedence(c) < min_prec;
    if (paren) out += "(";
    render_expr_to(c, out);
    if (paren) out += ")";
  };
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, AndNode>) {
          child(*x.left, 1);
          out += " AND ";
          child(*x.right, 2);
        } else if constexpr (std::is_same_v<T, OrNode>) {
          child(*x.left, 0);
          out += " OR ";
          child(*x.right, 1);
        } else if constexpr (std::is_same_v<T, NotNode>) {
          out += "NOT ";
          child(*x.child, 2);
        } else if constexpr (std::is_same_v<T, CompareNode>) {
          out += x.col.name;
          out += " ";
          out += to_string(x.op);
          out += " ";
          out += literal_to_string(x.literal);
        } else if constexpr (std::is_same_v<T, BetweenNode>) {
          out += x.col.name;
          out += " BETWEEN ";
          out += literal_to_string(x.lo);
          out += " AND ";
          out += literal_to_string(x.hi);
        } else if constexpr (std::is_same_v<T, InNode>) {
          out += x.col.name;
          out += " IN (";
          for (std::size_t i = 0; i < x.items.size(); ++i) {
            if (i) out += ", ";
            out += literal_to_string(x.items[i]);
          }
          out += ")";
        } else if constexpr (std::is_same_v<T, LikeNode>) {
          out += x.col.name;
          out += " LIKE ";
          out += literal_to_string(Literal(x.pattern));
        } else {
          const UdfCallNode& u = x;
          out += u.name;
          out += "(";
          for (std::size_t i = 0; i < u.args.size(); ++i) {
            if (i) out += ", ";
            if (std::holds_alternative<ColumnRef>(u.args[i])) {
              out += std::get<ColumnRef>(u.args[i]).name;
            } else {
              out += literal_to_string(std::get<Literal>(u.args[i]));
            }
          }
          out += ")";
          if (u.comparison) {
            out += " ";
            out += to_string(u.comparison->first);
            out += " ";
            out += literal_to_string(u.comparison->second);
          }
        }
      },
      e.node);
}

}  // namespace detail

/// Renders a tree back to predicate text that reparses to an identical tree.
inline std::string render_expr(const Expr& e) {
  std::string out;
  detail::render_expr_to(e, out);
  return out;
}

}  // namespace dskip
