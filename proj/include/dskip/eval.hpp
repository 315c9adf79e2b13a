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

#include <vector>

#include "dskip/expr.hpp"
#include "dskip/like.hpp"
#include "dskip/schema.hpp"
#include "dskip/udf.hpp"

namespace dskip {

// Two-valued semantics: any comparison, LIKE, IN, or UDF touching a null
// operand is false; NOT is plain negation of the child result.

namespace detail {

inline bool compare_row_value(const Literal& value, CompareOp op, const Literal& lit) {
  auto cmp = compare_literals(value, lit);
  if (!cmp) return false;
  return apply_compare_op(op, *cmp);
}

}  // namespace detail

/// Evaluates a predicate against one row. Pure; UDF failures throw UdfError.
inline bool eval_row(const Expr& e, const Row& row, const UdfRegistry& udfs) {
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, AndNode>) {
          return eval_row(*x.left, row, udfs) && eval_row(*x.right, row, udfs);
        } else if constexpr (std::is_same_v<T, OrNode>) {
          return eval_row(*x.left, row, udfs) || eval_row(*x.right, row, udfs);
        } else if constexpr (std::is_same_v<T, NotNode>) {
          return !eval_row(*x.child, row, udfs);
        } else if constexpr (std::is_same_v<T, CompareNode>) {
          return detail::compare_row_value(row.values.at(x.col.index), x.op, x.literal);
        } else if constexpr (std::is_same_v<T, BetweenNode>) {
          const Literal& v = row.values.at(x.col.index);
          auto lo = compare_literals(v, x.lo);
          auto hi = compare_literals(v, x.hi);
          return lo && hi && *lo >= 0 && *hi <= 0;
        } else if constexpr (std::is_same_v<T, InNode>) {
          const Literal& v = row.values.at(x.col.index);
          if (v.is_null()) return false;
          for (const auto& item : x.items) {
            if (literals_equal_coerced(v, item)) return true;
          }
          return false;
        } else if constexpr (std::is_same_v<T, LikeNode>) {
          const Literal& v = row.values.at(x.col.index);
          if (!v.is_text()) return false;
          return match_like(x.pattern, v.as_text());
        } else {
          const UdfCallNode& u = x;
          const Udf* udf = udfs.find(u.name);
          if (!udf) throw UdfError("unknown UDF: " + u.name);
          std::vector<Literal> resolved;
          resolved.reserve(u.args.size());
          for (const auto& arg : u.args) {
            if (std::holds_alternative<ColumnRef>(arg)) {
              resolved.push_back(row.values.at(std::get<ColumnRef>(arg).index));
            } else {
              resolved.push_back(std::get<Literal>(arg));
            }
            if (resolved.back().is_null()) return false;
          }
          Literal result = udf->eval(udfs, resolved);
          if (result.is_null()) return false;
          if (!u.comparison) return result.is_integer() ? result.as_integer() != 0 : false;
          return detail::compare_row_value(result, u.comparison->first, u.comparison->second);
        }
      },
      e.node);
}

}  // namespace dskip
