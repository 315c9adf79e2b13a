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

#include <optional>
#include <vector>

#include "dskip/clause.hpp"
#include "dskip/filters.hpp"

namespace dskip {

// Merge-Clause combines per-node clause sets into one clause for the whole
// tree:
//   AND(a,b): alpha AND beta AND phi, phi = conjunction of CS(v)
//   OR(a,b):  (alpha OR beta) AND phi
//   NOT(a):   the negation of a's merged clause with respect to a, else none
//   leaf:     conjunction of CS(v)   (TrueClause when CS(v) is empty)
// "None" (no skipping possible) is a null ClausePtr; combining treats it as
// a clause that keeps everything.

/// Returns a clause representing NOT(e) given `clause` representing e, or
/// null when no registered negation applies. Only two negation families are
/// registered:
///  - min/max comparison pairs, which additionally keep null-bearing objects
///    because a null row satisfies the negation of any leaf;
///  - single-candidate value-set membership over a complete value list.
/// For a conjunction every negatable conjunct contributes (each represents e,
/// so each negation represents NOT(e), and so does their conjunction).
inline ClausePtr negate_clause(const ClausePtr& clause, const Expr& e) {
  if (!clause) return nullptr;
  const auto* cmp = std::get_if<CompareNode>(&e.node);
  if (!cmp) return nullptr;

  if (const auto* a = std::get_if<AndClause>(&clause->node)) {
    std::vector<ClausePtr> parts;
    for (const auto& child : a->children) {
      if (ClausePtr n = negate_clause(child, e)) parts.push_back(std::move(n));
    }
    if (parts.empty()) return nullptr;
    return and_clauses(std::move(parts));
  }

  if (const auto* mx = std::get_if<MaxClause>(&clause->node)) {
    // MaxClause(col,>,v) stands for col > v; its negation col <= v is
    // represented by MinClause(col,<=,v). Likewise for >= / <.
    if (mx->col != cmp->col.name || mx->or_nulls) return nullptr;
    if (!(cmp->op == mx->op && cmp->literal == mx->value)) return nullptr;
    CompareOp flipped = (mx->op == CompareOp::Gt) ? CompareOp::Le : CompareOp::Lt;
    return make_clause(MinClause{mx->descriptor_id, mx->col, flipped, mx->value, true});
  }
  if (const auto* mn = std::get_if<MinClause>(&clause->node)) {
    if (mn->col != cmp->col.name || mn->or_nulls) return nullptr;
    if (!(cmp->op == mn->op && cmp->literal == mn->value)) return nullptr;
    CompareOp flipped = (mn->op == CompareOp::Lt) ? CompareOp::Ge : CompareOp::Gt;
    return make_clause(MaxClause{mn->descriptor_id, mn->col, flipped, mn->value, true});
  }
  if (const auto* vs = std::get_if<ValueSetAnyClause>(&clause->node)) {
    // Only a complete value list supports "contains something other than";
    // a hybrid object may be backed by a bloom filter, which does not.
    if (vs->source != IndexType::ValueList) return nullptr;
    if (vs->col != cmp->col.name || cmp->op != CompareOp::Eq) return nullptr;
    if (vs->candidates.size() != 1 || !(vs->candidates[0] == cmp->literal)) return nullptr;
    return make_clause(ValueSetOtherThanClause{vs->descriptor_id, vs->col, vs->candidates[0]});
  }
  return nullptr;
}

/// Algorithm: Merge-Clause over a labelled tree.
inline ClausePtr merge_clause(const LabelledExpressionTree& t) {
  ClausePtr phi = and_clauses(t.labels);
  return std::visit(
      [&](const auto& x) -> ClausePtr {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, AndNode>) {
          ClausePtr alpha = merge_clause(t.children[0]);
          ClausePtr beta = merge_clause(t.children[1]);
          return and_clauses({alpha, beta, phi});
        } else if constexpr (std::is_same_v<T, OrNode>) {
          ClausePtr alpha = merge_clause(t.children[0]);
          ClausePtr beta = merge_clause(t.children[1]);
          return and_clauses({or_clauses({alpha, beta}), phi});
        } else if constexpr (std::is_same_v<T, NotNode>) {
          ClausePtr alpha = merge_clause(t.children[0]);
          return negate_clause(alpha, *t.children[0].expr);
        } else {
          return phi;
        }
      },
      t.expr->node);
}

/// Algorithm: Generate-Clause — label then merge. A null result or a
/// TrueClause means no skipping is possible for this query.
inline ClausePtr generate_clause(const Expr& e, const std::vector<FilterRegistration>& filters) {
  return merge_clause(label_tree(e, filters));
}

}  // namespace dskip
