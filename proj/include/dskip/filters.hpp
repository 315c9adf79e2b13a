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

#include <functional>
#include <string>
#include <vector>

#include "dskip/clause.hpp"
#include "dskip/expr.hpp"

namespace dskip {

/// A filter labels expression-tree nodes with clauses that represent them.
/// The rule returns the clauses to add for one node (usually zero or one).
struct FilterRegistration {
  std::string id;  // usually the backing descriptor id
  std::function<std::vector<ClausePtr>(const Expr&)> label;
};

/// An expression tree mirrored with the clause set CS(v) at every node.
struct LabelledExpressionTree {
  const Expr* expr = nullptr;
  std::vector<ClausePtr> labels;
  std::vector<LabelledExpressionTree> children;
};

/// Applies every filter to every node, in registration order. Skip/keep
/// decisions are independent of that order; the order only pins the label
/// layout for reproducibility.
inline LabelledExpressionTree label_tree(const Expr& e,
                                         const std::vector<FilterRegistration>& filters) {
  LabelledExpressionTree node;
  node.expr = &e;
  for (const auto& f : filters) {
    std::vector<ClausePtr> added = f.label(e);
    node.labels.insert(node.labels.end(), added.begin(), added.end());
  }
  std::visit(
      [&node, &filters](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, AndNode> || std::is_same_v<T, OrNode>) {
          node.children.push_back(label_tree(*x.left, filters));
          node.children.push_back(label_tree(*x.right, filters));
        } else if constexpr (std::is_same_v<T, NotNode>) {
          node.children.push_back(label_tree(*x.child, filters));
        }
      },
      e.node);
  return node;
}

inline std::string render_labelled_tree(const LabelledExpressionTree& t, int indent = 0) {
  std::string out(static_cast<std::size_t>(indent) * 2, ' ');
  std::visit(
      [&out](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, AndNode>) out += "AND";
        else if constexpr (std::is_same_v<T, OrNode>) out += "OR";
        else if constexpr (std::is_same_v<T, NotNode>) out += "NOT";
        else out += render_expr(Expr{x});
      },
      t.expr->node);
  if (!t.labels.empty()) {
    out += "  CS={";
    for (std::size_t i = 0; i < t.labels.size(); ++i) {
      if (i) out += ", ";
      out += render_clause(t.labels[i]);
    }
    out += "}";
  }
  out += "\n";
  for (const auto& c : t.children) out += render_labelled_tree(c, indent + 1);
  return out;
}

}  // namespace dskip
