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

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "dskip/clause.hpp"
#include "dskip/descriptor.hpp"
#include "dskip/filters.hpp"
#include "dskip/like.hpp"
#include "dskip/unicode.hpp"
#include "dskip/wkt.hpp"

namespace dskip {

namespace detail {

/// The axis-aligned region implied by a geo UDF leaf: the polygon's bounding
/// box for ST_CONTAINS, the disc's bounding box for ST_DISTANCE <= r.
struct GeoUdfBox {
  std::string lat_col, lng_col;
  BBox box;
};

inline std::optional<GeoUdfBox> geo_box_from_udf(const UdfCallNode& u) {
  if (u.name == "ST_CONTAINS" && u.args.size() == 3 && !u.comparison) {
    const auto* lat = std::get_if<ColumnRef>(&u.args[1]);
    const auto* lng = std::get_if<ColumnRef>(&u.args[2]);
    const auto* poly_lit = std::get_if<Literal>(&u.args[0]);
    if (!lat || !lng || !poly_lit || !poly_lit->is_text()) return std::nullopt;
    try {
      Polygon poly = parse_wkt_polygon(poly_lit->as_text());
      return GeoUdfBox{lat->name, lng->name, poly.bbox()};
    } catch (const UdfError&) {
      return std::nullopt;
    }
  }
  if (u.name == "ST_DISTANCE" && u.args.size() == 4 && u.comparison &&
      (u.comparison->first == CompareOp::Le || u.comparison->first == CompareOp::Lt)) {
    const auto* lat = std::get_if<ColumnRef>(&u.args[0]);
    const auto* lng = std::get_if<ColumnRef>(&u.args[1]);
    const auto* qlat = std::get_if<Literal>(&u.args[2]);
    const auto* qlng = std::get_if<Literal>(&u.args[3]);
    if (!lat || !lng || !qlat || !qlng) return std::nullopt;
    if (!qlat->is_numeric() || !qlng->is_numeric() || !u.comparison->second.is_numeric()) {
      return std::nullopt;
    }
    double a = static_cast<double>(qlat->numeric());
    double b = static_cast<double>(qlng->numeric());
    double r = static_cast<double>(u.comparison->second.numeric());
    return GeoUdfBox{lat->name, lng->name, BBox{a - r, a + r, b - r, b + r}};
  }
  return std::nullopt;
}

inline void gather_conjuncts(const Expr& e, std::vector<const Expr*>& out) {
  if (const auto* a = std::get_if<AndNode>(&e.node)) {
    gather_conjuncts(*a->left, out);
    gather_conjuncts(*a->right, out);
  } else {
    out.push_back(&e);
  }
}

/// Tightens `lo`/`hi` with a single comparison constraint.
struct RangeBound {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  bool constrained = false;

  void apply(CompareOp op, double v) {
    switch (op) {
      case CompareOp::Lt:
      case CompareOp::Le: hi = std::min(hi, v); break;
      case CompareOp::Gt:
      case CompareOp::Ge: lo = std::max(lo, v); break;
      case CompareOp::Eq:
        lo = std::max(lo, v);
        hi = std::min(hi, v);
        break;
    }
    constrained = true;
  }
};

}  // namespace detail

/// Builds the standard filter set for a list of collected index descriptors.
/// Each filter emits clauses bound to its descriptor's id so evaluation knows
/// which payload to read.
inline std::vector<FilterRegistration> make_builtin_filters(
    const std::vector<IndexDescriptor>& descriptors) {
  std::vector<FilterRegistration> out;

  for (const IndexDescriptor& d : descriptors) {
    const std::string id = d.id();
    const std::string col = d.columns[0];

    switch (d.type) {
      case IndexType::MinMax:
        out.push_back({id, [id, col](const Expr& e) -> std::vector<ClausePtr> {
          if (const auto* c = std::get_if<CompareNode>(&e.node)) {
            if (c->col.name != col) return {};
            switch (c->op) {
              case CompareOp::Lt:
              case CompareOp::Le:
                return {make_clause(MinClause{id, col, c->op, c->literal})};
              case CompareOp::Gt:
              case CompareOp::Ge:
                return {make_clause(MaxClause{id, col, c->op, c->literal})};
              case CompareOp::Eq:
                return {make_clause(IntervalClause{id, col, c->literal, c->literal})};
            }
          }
          if (const auto* b = std::get_if<BetweenNode>(&e.node)) {
            if (b->col.name != col) return {};
            return {make_clause(IntervalClause{id, col, b->lo, b->hi})};
          }
          if (const auto* in = std::get_if<InNode>(&e.node)) {
            if (in->col.name != col) return {};
            std::vector<ClausePtr> points;
            for (const auto& item : in->items) {
              points.push_back(make_clause(IntervalClause{id, col, item, item}));
            }
            return {or_clauses(std::move(points))};
          }
          if (const auto* u = std::get_if<UdfCallNode>(&e.node)) {
            auto geo = detail::geo_box_from_udf(*u);
            if (!geo) return {};
            if (geo->lat_col == col) {
              return {make_clause(IntervalClause{id, col, Literal(geo->box.lat_lo),
                                                 Literal(geo->box.lat_hi)})};
            }
            if (geo->lng_col == col) {
              return {make_clause(IntervalClause{id, col, Literal(geo->box.lng_lo),
                                                 Literal(geo->box.lng_hi)})};
            }
          }
          return {};
        }});
        break;

      case IndexType::GapList:
        out.push_back({id, [id, col](const Expr& e) -> std::vector<ClausePtr> {
          if (const auto* c = std::get_if<CompareNode>(&e.node)) {
            if (c->col.name != col) return {};
            switch (c->op) {
              case CompareOp::Lt:
              case CompareOp::Le:
                return {make_clause(MinClause{id, col, c->op, c->literal})};
              case CompareOp::Gt:
              case CompareOp::Ge:
                return {make_clause(MaxClause{id, col, c->op, c->literal})};
              case CompareOp::Eq:
                return {make_clause(IntervalClause{id, col, c->literal, c->literal})};
            }
          }
          if (const auto* b = std::get_if<BetweenNode>(&e.node)) {
            if (b->col.name != col) return {};
            return {make_clause(IntervalClause{id, col, b->lo, b->hi})};
          }
          return {};
        }});
        break;

      case IndexType::ValueList:
        out.push_back({id, [id, col](const Expr& e) -> std::vector<ClausePtr> {
          if (const auto* c = std::get_if<CompareNode>(&e.node)) {
            if (c->col.name == col && c->op == CompareOp::Eq) {
              return {make_clause(ValueSetAnyClause{id, IndexType::ValueList, col, {c->literal}})};
            }
            return {};
          }
          if (const auto* in = std::get_if<InNode>(&e.node)) {
            if (in->col.name != col) return {};
            return {make_clause(ValueSetAnyClause{id, IndexType::ValueList, col, in->items})};
          }
          if (const auto* lk = std::get_if<LikeNode>(&e.node)) {
            if (lk->col.name != col) return {};
            return {make_clause(ValuePatternClause{id, IndexType::ValueList, col, lk->pattern})};
          }
          return {};
        }});
        break;

      case IndexType::Bloom:
        out.push_back({id, [id, col](const Expr& e) -> std::vector<ClausePtr> {
          if (const auto* c = std::get_if<CompareNode>(&e.node)) {
            if (c->col.name == col && c->op == CompareOp::Eq) {
              return {make_clause(BloomAnyClause{id, col, {c->literal}})};
            }
            return {};
          }
          if (const auto* in = std::get_if<InNode>(&e.node)) {
            if (in->col.name != col) return {};
            return {make_clause(BloomAnyClause{id, col, in->items})};
          }
          return {};
        }});
        break;

      case IndexType::Hybrid:
        out.push_back({id, [id, col](const Expr& e) -> std::vector<ClausePtr> {
          if (const auto* c = std::get_if<CompareNode>(&e.node)) {
            if (c->col.name == col && c->op == CompareOp::Eq) {
              return {make_clause(ValueSetAnyClause{id, IndexType::Hybrid, col, {c->literal}})};
            }
            return {};
          }
          if (const auto* in = std::get_if<InNode>(&e.node)) {
            if (in->col.name != col) return {};
            return {make_clause(ValueSetAnyClause{id, IndexType::Hybrid, col, in->items})};
          }
          if (const auto* lk = std::get_if<LikeNode>(&e.node)) {
            // Evaluable only on objects whose hybrid variant is a value list;
            // bloom-variant objects are always kept.
            if (lk->col.name != col) return {};
            return {make_clause(ValuePatternClause{id, IndexType::Hybrid, col, lk->pattern})};
          }
          return {};
        }});
        break;

      case IndexType::Prefix:
        out.push_back({id, [id, col](const Expr& e) -> std::vector<ClausePtr> {
          const auto* lk = std::get_if<LikeNode>(&e.node);
          if (!lk || lk->col.name != col) return {};
          std::string prefix = like_literal_prefix(lk->pattern);
          if (prefix.empty()) return {};
          return {make_clause(PrefixClause{id, col, std::move(prefix)})};
        }});
        break;

      case IndexType::Suffix:
        out.push_back({id, [id, col](const Expr& e) -> std::vector<ClausePtr> {
          const auto* lk = std::get_if<LikeNode>(&e.node);
          if (!lk || lk->col.name != col) return {};
          std::string suffix = like_literal_suffix(lk->pattern);
          if (suffix.empty()) return {};
          return {make_clause(SuffixClause{id, col, std::move(suffix)})};
        }});
        break;

      case IndexType::GeoBox: {
        const std::string lat_col = d.columns[0], lng_col = d.columns[1];
        out.push_back({id, [id, lat_col, lng_col](const Expr& e) -> std::vector<ClausePtr> {
          if (const auto* u = std::get_if<UdfCallNode>(&e.node)) {
            auto geo = detail::geo_box_from_udf(*u);
            if (geo && geo->lat_col == lat_col && geo->lng_col == lng_col) {
              return {make_clause(BoxOverlapClause{id, lat_col, lng_col, geo->box})};
            }
            return {};
          }
          // A conjunction constraining both coordinates implies a box.
          if (!std::holds_alternative<AndNode>(e.node)) return {};
          std::vector<const Expr*> conjuncts;
          detail::gather_conjuncts(e, conjuncts);
          detail::RangeBound lat, lng;
          for (const Expr* leaf : conjuncts) {
            if (const auto* c = std::get_if<CompareNode>(&leaf->node)) {
              if (!c->literal.is_numeric()) continue;
              double v = static_cast<double>(c->literal.numeric());
              if (c->col.name == lat_col) lat.apply(c->op, v);
              if (c->col.name == lng_col) lng.apply(c->op, v);
            } else if (const auto* b = std::get_if<BetweenNode>(&leaf->node)) {
              if (!b->lo.is_numeric() || !b->hi.is_numeric()) continue;
              detail::RangeBound* target = nullptr;
              if (b->col.name == lat_col) target = &lat;
              if (b->col.name == lng_col) target = &lng;
              if (target) {
                target->apply(CompareOp::Ge, static_cast<double>(b->lo.numeric()));
                target->apply(CompareOp::Le, static_cast<double>(b->hi.numeric()));
              }
            }
          }
          if (!lat.constrained || !lng.constrained) return {};
          return {make_clause(
              BoxOverlapClause{id, lat_col, lng_col, BBox{lat.lo, lat.hi, lng.lo, lng.hi}})};
        }});
        break;
      }

      case IndexType::MetricDist: {
        const std::string metric = d.params.at("metric");
        const std::string origin = d.params.at("origin");
        if (metric == "euclidean2d") {
          const std::string lat_col = d.columns[0], lng_col = d.columns[1];
          auto semi = origin.find(';');
          double olat = detail::parse_param_real("origin", origin.substr(0, semi));
          double olng = detail::parse_param_real("origin", origin.substr(semi + 1));
          out.push_back({id, [id, lat_col, lng_col, olat, olng](const Expr& e) -> std::vector<ClausePtr> {
            const auto* u = std::get_if<UdfCallNode>(&e.node);
            if (!u || u->name != "ST_DISTANCE" || u->args.size() != 4 || !u->comparison) return {};
            if (u->comparison->first != CompareOp::Le && u->comparison->first != CompareOp::Lt) return {};
            const auto* lat = std::get_if<ColumnRef>(&u->args[0]);
            const auto* lng = std::get_if<ColumnRef>(&u->args[1]);
            const auto* qlat = std::get_if<Literal>(&u->args[2]);
            const auto* qlng = std::get_if<Literal>(&u->args[3]);
            if (!lat || !lng || lat->name != lat_col || lng->name != lng_col) return {};
            if (!qlat || !qlng || !qlat->is_numeric() || !qlng->is_numeric()) return {};
            if (!u->comparison->second.is_numeric()) return {};
            double dist = euclidean_distance(static_cast<double>(qlat->numeric()),
                                             static_cast<double>(qlng->numeric()), olat, olng);
            double r = static_cast<double>(u->comparison->second.numeric());
            return {make_clause(RingOverlapClause{id, dist, r})};
          }});
        } else if (metric == "abs1d") {
          double origin_value = detail::parse_param_real("origin", origin);
          out.push_back({id, [id, col, origin_value](const Expr& e) -> std::vector<ClausePtr> {
            const auto* u = std::get_if<UdfCallNode>(&e.node);
            if (!u || u->name != "ABS_DIST" || u->args.size() != 2 || !u->comparison) return {};
            if (u->comparison->first != CompareOp::Le && u->comparison->first != CompareOp::Lt) return {};
            const auto* c = std::get_if<ColumnRef>(&u->args[0]);
            const auto* q = std::get_if<Literal>(&u->args[1]);
            if (!c || c->name != col || !q || !q->is_numeric()) return {};
            if (!u->comparison->second.is_numeric()) return {};
            double dist = std::abs(static_cast<double>(q->numeric()) - origin_value);
            double r = static_cast<double>(u->comparison->second.numeric());
            return {make_clause(RingOverlapClause{id, dist, r})};
          }});
        } else {  // levenshtein
          out.push_back({id, [id, col, origin](const Expr& e) -> std::vector<ClausePtr> {
            const auto* u = std::get_if<UdfCallNode>(&e.node);
            if (!u || u->name != "LEV_DIST" || u->args.size() != 2 || !u->comparison) return {};
            if (u->comparison->first != CompareOp::Le && u->comparison->first != CompareOp::Lt) return {};
            const auto* c = std::get_if<ColumnRef>(&u->args[0]);
            const auto* q = std::get_if<Literal>(&u->args[1]);
            if (!c || c->name != col || !q || !q->is_text()) return {};
            if (!u->comparison->second.is_numeric()) return {};
            double dist = static_cast<double>(levenshtein(q->as_text(), origin));
            double r = static_cast<double>(u->comparison->second.numeric());
            return {make_clause(RingOverlapClause{id, dist, r})};
          }});
        }
        break;
      }

      case IndexType::Formatted: {
        const std::string extractor = d.params.at("extractor");
        out.push_back({id, [id, col, extractor](const Expr& e) -> std::vector<ClausePtr> {
          const auto* u = std::get_if<UdfCallNode>(&e.node);
          if (!u || u->name != "EXTRACT" || u->args.size() != 2 || !u->comparison) return {};
          if (u->comparison->first != CompareOp::Eq || !u->comparison->second.is_text()) return {};
          const auto* name_lit = std::get_if<Literal>(&u->args[0]);
          const auto* c = std::get_if<ColumnRef>(&u->args[1]);
          if (!name_lit || !name_lit->is_text() || name_lit->as_text() != extractor) return {};
          if (!c || c->name != col) return {};
          return {make_clause(
              ExtractedAnyClause{id, col, extractor, {u->comparison->second.as_text()}})};
        }});
        break;
      }
    }
  }
  return out;
}

}  // namespace dskip
