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
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "dskip/descriptor.hpp"
#include "dskip/expr.hpp"
#include "dskip/literal.hpp"
#include "dskip/wkt.hpp"

namespace dskip {

// A Clause is an object-level condition evaluated on metadata only: true
// means the object may hold relevant rows (keep), false means skip. Metadata
// clauses carry the id of the index descriptor whose payload they read.

struct Clause;
using ClausePtr = std::shared_ptr<const Clause>;

/// Never skips.
struct TrueClause {};

struct AndClause {
  std::vector<ClausePtr> children;  // non-empty
};

struct OrClause {
  std::vector<ClausePtr> children;  // non-empty
};

/// min(col) op value, op in {<, <=}. `or_nulls` marks clauses produced by
/// negation: a null in the column also satisfies the negated predicate, so
/// such objects must be kept.
struct MinClause {
  std::string descriptor_id;
  std::string col;
  CompareOp op;
  Literal value;
  bool or_nulls = false;
};

/// max(col) op value, op in {>, >=}.
struct MaxClause {
  std::string descriptor_id;
  std::string col;
  CompareOp op;
  Literal value;
  bool or_nulls = false;
};

/// [min, max] intersects [lo, hi] and no stored gap strictly covers [lo, hi].
struct IntervalClause {
  std::string descriptor_id;
  std::string col;
  Literal lo, hi;
};

/// The stored value list (or the hybrid per-object variant) intersects the
/// candidate set.
struct ValueSetAnyClause {
  std::string descriptor_id;
  IndexType source;  // ValueList or Hybrid
  std::string col;
  std::vector<Literal> candidates;
};

/// The stored value list contains some value != excluded (or the column has
/// nulls). Only produced by negation over a complete value list.
struct ValueSetOtherThanClause {
  std::string descriptor_id;
  std::string col;
  Literal excluded;
};

/// Some stored value matches the LIKE pattern.
struct ValuePatternClause {
  std::string descriptor_id;
  IndexType source;  // ValueList or Hybrid
  std::string col;
  std::string pattern;
};

/// The bloom filter might contain some candidate.
struct BloomAnyClause {
  std::string descriptor_id;
  std::string col;
  std::vector<Literal> candidates;
};

/// Some stored prefix entry is consistent with values starting with `prefix`.
struct PrefixClause {
  std::string descriptor_id;
  std::string col;
  std::string prefix;
};

struct SuffixClause {
  std::string descriptor_id;
  std::string col;
  std::string suffix;
};

/// Some stored bounding box intersects the query box.
struct BoxOverlapClause {
  std::string descriptor_id;
  std::string lat_col, lng_col;
  BBox box;
};

/// [dmin, dmax] intersects [query_distance - radius, query_distance + radius].
struct RingOverlapClause {
  std::string descriptor_id;
  double query_distance = 0;
  double radius = 0;
};

/// The stored extracted-value list intersects the candidates.
struct ExtractedAnyClause {
  std::string descriptor_id;
  std::string col;
  std::string extractor;
  std::vector<std::string> candidates;
};

struct Clause {
  std::variant<TrueClause, AndClause, OrClause, MinClause, MaxClause, IntervalClause,
               ValueSetAnyClause, ValueSetOtherThanClause, ValuePatternClause, BloomAnyClause,
               PrefixClause, SuffixClause, BoxOverlapClause, RingOverlapClause,
               ExtractedAnyClause>
      node;
};

template <typename T>
ClausePtr make_clause(T node) {
  return std::make_shared<const Clause>(Clause{std::move(node)});
}

inline ClausePtr true_clause() {
  static const ClausePtr t = make_clause(TrueClause{});
  return t;
}

inline bool is_true_clause(const ClausePtr& c) {
  return c && std::holds_alternative<TrueClause>(c->node);
}

/// Conjunction with flattening; TrueClause children fold away. Empty input
/// yields TrueClause; a single child collapses to itself.
inline ClausePtr and_clauses(std::vector<ClausePtr> children) {
  std::vector<ClausePtr> flat;
  for (auto& c : children) {
    if (!c || is_true_clause(c)) continue;
    if (const auto* a = std::get_if<AndClause>(&c->node)) {
      flat.insert(flat.end(), a->children.begin(), a->children.end());
    } else {
      flat.push_back(std::move(c));
    }
  }
  if (flat.empty()) return true_clause();
  if (flat.size() == 1) return flat[0];
  return make_clause(AndClause{std::move(flat)});
}

/// Disjunction with flattening; a TrueClause (or absent) child makes the
/// whole disjunction TrueClause.
inline ClausePtr or_clauses(std::vector<ClausePtr> children) {
  std::vector<ClausePtr> flat;
  for (auto& c : children) {
    if (!c || is_true_clause(c)) return true_clause();
    if (const auto* o = std::get_if<OrClause>(&c->node)) {
      flat.insert(flat.end(), o->children.begin(), o->children.end());
    } else {
      flat.push_back(std::move(c));
    }
  }
  if (flat.empty()) return true_clause();
  if (flat.size() == 1) return flat[0];
  return make_clause(OrClause{std::move(flat)});
}

/// Descriptor ids referenced anywhere in the clause (the metadata that must
/// be loaded to evaluate it).
inline void collect_clause_descriptors(const ClausePtr& c, std::set<std::string>& out) {
  if (!c) return;
  std::visit(
      [&out](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, AndClause> || std::is_same_v<T, OrClause>) {
          for (const auto& child : x.children) collect_clause_descriptors(child, out);
        } else if constexpr (!std::is_same_v<T, TrueClause>) {
          out.insert(x.descriptor_id);
        }
      },
      c->node);
}

inline std::string render_clause(const ClausePtr& c) {
  if (!c) return "none";
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        auto list = [](const std::vector<ClausePtr>& cs) {
          std::string out;
          for (std::size_t i = 0; i < cs.size(); ++i) {
            if (i) out += ", ";
            out += render_clause(cs[i]);
          }
          return out;
        };
        auto literals = [](const std::vector<Literal>& ls) {
          std::string out;
          for (std::size_t i = 0; i < ls.size(); ++i) {
            if (i) out += ", ";
            out += literal_to_string(ls[i]);
          }
          return out;
        };
        if constexpr (std::is_same_v<T, TrueClause>) {
          return "True";
        } else if constexpr (std::is_same_v<T, AndClause>) {
          return "And[" + list(x.children) + "]";
        } else if constexpr (std::is_same_v<T, OrClause>) {
          return "Or[" + list(x.children) + "]";
        } else if constexpr (std::is_same_v<T, MinClause>) {
          return "MinClause(" + x.col + "," + to_string(x.op) + "," + literal_to_string(x.value) +
                 (x.or_nulls ? ",or-nulls" : "") + ")";
        } else if constexpr (std::is_same_v<T, MaxClause>) {
          return "MaxClause(" + x.col + "," + to_string(x.op) + "," + literal_to_string(x.value) +
                 (x.or_nulls ? ",or-nulls" : "") + ")";
        } else if constexpr (std::is_same_v<T, IntervalClause>) {
          return "IntervalClause(" + x.col + ",[" + literal_to_string(x.lo) + "," +
                 literal_to_string(x.hi) + "])";
        } else if constexpr (std::is_same_v<T, ValueSetAnyClause>) {
          return "ValueSetAnyClause(" + x.col + ",{" + literals(x.candidates) + "})";
        } else if constexpr (std::is_same_v<T, ValueSetOtherThanClause>) {
          return "ValueSetOtherThanClause(" + x.col + "," + literal_to_string(x.excluded) + ")";
        } else if constexpr (std::is_same_v<T, ValuePatternClause>) {
          return "ValuePatternClause(" + x.col + "," + literal_to_string(Literal(x.pattern)) + ")";
        } else if constexpr (std::is_same_v<T, BloomAnyClause>) {
          return "BloomAnyClause(" + x.col + ",{" + literals(x.candidates) + "})";
        } else if constexpr (std::is_same_v<T, PrefixClause>) {
          return "PrefixClause(" + x.col + "," + literal_to_string(Literal(x.prefix)) + ")";
        } else if constexpr (std::is_same_v<T, SuffixClause>) {
          return "SuffixClause(" + x.col + "," + literal_to_string(Literal(x.suffix)) + ")";
        } else if constexpr (std::is_same_v<T, BoxOverlapClause>) {
          char buf[160];
          std::snprintf(buf, sizeof(buf), "BoxOverlapClause(%s,%s,(%g,%g,%g,%g))",
                        x.lat_col.c_str(), x.lng_col.c_str(), x.box.lat_lo, x.box.lat_hi,
                        x.box.lng_lo, x.box.lng_hi);
          return buf;
        } else if constexpr (std::is_same_v<T, RingOverlapClause>) {
          char buf[120];
          std::snprintf(buf, sizeof(buf), "RingOverlapClause(%s,D=%g,r=%g)",
                        x.descriptor_id.c_str(), x.query_distance, x.radius);
          return buf;
        } else {
          std::string out = "ExtractedAnyClause(" + x.col + "," + x.extractor + ",{";
          for (std::size_t i = 0; i < x.candidates.size(); ++i) {
            if (i) out += ", ";
            out += literal_to_string(Literal(x.candidates[i]));
          }
          return out + "})";
        }
      },
      c->node);
}

}  // namespace dskip
