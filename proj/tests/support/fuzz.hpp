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

#include <string>
#include <vector>

#include "dskip/collect.hpp"
#include "dskip/descriptor.hpp"
#include "dskip/expr.hpp"
#include "dskip/metadata.hpp"
#include "dskip/schema.hpp"
#include "dskip/udf.hpp"
#include "support/testutil.hpp"

namespace dskip::test {

// Randomized pipeline cases: a small dataset, a random index set, and a
// random predicate tree. Shared by the clause-level safety tests and by the
// disk-backed acceptance fuzz.

inline Schema fuzz_schema() {
  return Schema({{"a", ValueType::Integer},
                 {"b", ValueType::Real},
                 {"c", ValueType::Text},
                 {"lat", ValueType::Real},
                 {"lng", ValueType::Real},
                 {"ua", ValueType::Text}});
}

inline const std::vector<std::string>& fuzz_words() {
  static const std::vector<std::string> words = {"alpha", "alps",  "beta",  "betamax", "gamma",
                                                 "karu",  "kazu",  "mito",  "x",       "xy",
                                                 "alP",   "be_ta", "al%do", ""};
  return words;
}

inline const std::vector<std::string>& fuzz_agents() {
  static const std::vector<std::string> agents = {
      "Mozilla/5.0 (X11)", "curl/7.1", "Hacker", "Hacker/2.0", " wget /1.2", "botnet/0.1",
      "Mozilla/4.0"};
  return agents;
}

inline ColumnRef fuzz_col(const Schema& schema, const std::string& name) {
  auto idx = schema.index_of(name);
  return ColumnRef{name, schema.at(*idx).type, *idx};
}

inline Literal fuzz_int_literal(Rng& rng) { return Literal(rng.range(-22, 22)); }
inline Literal fuzz_real_literal(Rng& rng) {
  // Mix exact small reals with arbitrary ones; include values near data edges.
  if (rng.chance(0.3)) return Literal(static_cast<double>(rng.range(-20, 20)));
  return Literal(rng.real(-25.0, 25.0));
}

inline std::vector<Row> fuzz_rows(Rng& rng, const Schema& schema, std::int64_t n,
                                  double null_fraction) {
  std::vector<Row> rows;
  for (std::int64_t i = 0; i < n; ++i) {
    Row r;
    auto null_or = [&](Literal v) { return rng.chance(null_fraction) ? Literal() : v; };
    r.values.push_back(null_or(Literal(rng.range(-20, 20))));                  // a
    r.values.push_back(null_or(Literal(rng.real(-20.0, 20.0))));               // b
    r.values.push_back(null_or(Literal(rng.pick(fuzz_words()))));              // c
    r.values.push_back(null_or(Literal(rng.real(0.0, 1.0))));                  // lat
    r.values.push_back(null_or(Literal(rng.real(0.0, 1.0))));                  // lng
    r.values.push_back(null_or(Literal(rng.pick(fuzz_agents()))));             // ua
    (void)schema;
    rows.push_back(std::move(r));
  }
  return rows;
}

inline std::vector<std::vector<Row>> fuzz_objects(Rng& rng, const Schema& schema) {
  std::int64_t n_objects = rng.range(1, 12);
  std::vector<std::vector<Row>> objects;
  for (std::int64_t i = 0; i < n_objects; ++i) {
    std::int64_t n_rows = rng.chance(0.08) ? 0 : rng.range(1, 32);
    objects.push_back(fuzz_rows(rng, schema, n_rows, rng.chance(0.5) ? 0.12 : 0.0));
  }
  return objects;
}

inline const std::vector<std::string>& fuzz_descriptor_menu() {
  static const std::vector<std::string> menu = {
      "minmax:a",
      "minmax:b",
      "minmax:c",
      "minmax:lat",
      "minmax:lng",
      "gaplist:a:k=2",
      "gaplist:b:k=3",
      "valuelist:c",
      "valuelist:a",
      "bloom:c:f=0.05",
      "bloom:a:f=0.1",
      "hybrid:c:threshold=3,f=0.05",
      "prefix:c:len=2",
      "suffix:c:len=2",
      "geobox:lat,lng:x=2",
      "metricdist:lat,lng:metric=euclidean2d,origin=0.5;0.5",
      "metricdist:a:metric=abs1d,origin=0",
      "metricdist:c:metric=levenshtein,origin=karu",
      "formatted:ua:extractor=agent_name",
  };
  return menu;
}

inline std::vector<IndexDescriptor> fuzz_descriptors(Rng& rng) {
  std::vector<IndexDescriptor> out;
  const auto& menu = fuzz_descriptor_menu();
  for (const auto& text : menu) {
    if (rng.chance(0.35)) out.push_back(parse_descriptor(text));
  }
  return out;
}

inline std::string fuzz_like_pattern(Rng& rng) {
  std::string base = rng.pick(fuzz_words());
  std::string pattern;
  for (char c : base) {
    if (c == '%' || c == '_' || c == '\\') pattern += '\\';
    pattern += c;
    if (rng.chance(0.12)) pattern += '%';
    if (rng.chance(0.06)) pattern += '_';
  }
  switch (rng.range(0, 3)) {
    case 0: pattern += '%'; break;
    case 1: pattern = "%" + pattern; break;
    default: break;
  }
  return pattern;
}

inline ExprPtr fuzz_leaf(Rng& rng, const Schema& schema) {
  switch (rng.range(0, 9)) {
    case 0: {  // compare on integer column, occasionally with a real literal
      static const std::vector<CompareOp> ops = {CompareOp::Lt, CompareOp::Le, CompareOp::Gt,
                                                 CompareOp::Ge, CompareOp::Eq};
      Literal lit = rng.chance(0.25) ? fuzz_real_literal(rng) : fuzz_int_literal(rng);
      return make_compare(fuzz_col(schema, "a"), rng.pick(ops), lit);
    }
    case 1: {  // compare on real column, sometimes with an integer literal
      static const std::vector<CompareOp> ops = {CompareOp::Lt, CompareOp::Le, CompareOp::Gt,
                                                 CompareOp::Ge, CompareOp::Eq};
      Literal lit = rng.chance(0.4) ? fuzz_int_literal(rng) : fuzz_real_literal(rng);
      return make_compare(fuzz_col(schema, "b"), rng.pick(ops), lit);
    }
    case 2: {  // text compare / equality
      static const std::vector<CompareOp> ops = {CompareOp::Lt, CompareOp::Le, CompareOp::Gt,
                                                 CompareOp::Ge, CompareOp::Eq, CompareOp::Eq};
      return make_compare(fuzz_col(schema, "c"), rng.pick(ops), Literal(rng.pick(fuzz_words())));
    }
    case 3: {  // between
      bool on_int = rng.chance(0.5);
      Literal x = on_int ? fuzz_int_literal(rng) : fuzz_real_literal(rng);
      Literal y = on_int ? fuzz_int_literal(rng) : fuzz_real_literal(rng);
      auto cmp = compare_literals(x, y);
      if (cmp && *cmp > 0) std::swap(x, y);
      return make_expr({BetweenNode{fuzz_col(schema, on_int ? "a" : "b"), x, y}});
    }
    case 4: {  // in
      if (rng.chance(0.5)) {
        std::vector<Literal> items;
        for (int i = 0, n = static_cast<int>(rng.range(1, 3)); i < n; ++i) {
          items.push_back(rng.chance(0.2) ? fuzz_real_literal(rng) : fuzz_int_literal(rng));
        }
        return make_expr({InNode{fuzz_col(schema, "a"), std::move(items)}});
      }
      std::vector<Literal> items;
      for (int i = 0, n = static_cast<int>(rng.range(1, 3)); i < n; ++i) {
        items.push_back(Literal(rng.pick(fuzz_words())));
      }
      return make_expr({InNode{fuzz_col(schema, "c"), std::move(items)}});
    }
    case 5:  // like
      return make_expr({LikeNode{fuzz_col(schema, rng.chance(0.7) ? "c" : "ua"),
                                 fuzz_like_pattern(rng)}});
    case 6: {  // ST_CONTAINS with a random rectangle or triangle
      double lo_lat = rng.real(-0.2, 0.9), lo_lng = rng.real(-0.2, 0.9);
      double hi_lat = lo_lat + rng.real(0.01, 0.6), hi_lng = lo_lng + rng.real(0.01, 0.6);
      char wkt[256];
      if (rng.chance(0.7)) {
        std::snprintf(wkt, sizeof(wkt), "POLYGON((%g %g,%g %g,%g %g,%g %g,%g %g))", lo_lat, lo_lng,
                      hi_lat, lo_lng, hi_lat, hi_lng, lo_lat, hi_lng, lo_lat, lo_lng);
      } else {
        std::snprintf(wkt, sizeof(wkt), "POLYGON((%g %g,%g %g,%g %g))", lo_lat, lo_lng, hi_lat,
                      lo_lng, (lo_lat + hi_lat) / 2, hi_lng);
      }
      UdfCallNode call{"ST_CONTAINS",
                       {Literal(std::string(wkt)), fuzz_col(schema, "lat"), fuzz_col(schema, "lng")},
                       std::nullopt};
      return make_expr({std::move(call)});
    }
    case 7: {  // ST_DISTANCE <= r
      UdfCallNode call{"ST_DISTANCE",
                       {fuzz_col(schema, "lat"), fuzz_col(schema, "lng"),
                        Literal(rng.real(0.0, 1.0)), Literal(rng.real(0.0, 1.0))},
                       std::make_pair(rng.chance(0.5) ? CompareOp::Le : CompareOp::Lt,
                                      Literal(rng.real(0.0, 0.7)))};
      return make_expr({std::move(call)});
    }
    case 8: {  // EXTRACT(agent_name, ua) = name
      static const std::vector<std::string> names = {"Mozilla", "curl", "Hacker", "wget", "none"};
      UdfCallNode call{"EXTRACT",
                       {Literal(std::string("agent_name")), fuzz_col(schema, "ua")},
                       std::make_pair(CompareOp::Eq, Literal(rng.pick(names)))};
      return make_expr({std::move(call)});
    }
    default: {  // ABS_DIST / LEV_DIST <= r
      if (rng.chance(0.5)) {
        UdfCallNode call{"ABS_DIST",
                         {fuzz_col(schema, "a"), Literal(rng.range(-20, 20))},
                         std::make_pair(CompareOp::Le, Literal(rng.real(0.0, 10.0)))};
        return make_expr({std::move(call)});
      }
      UdfCallNode call{"LEV_DIST",
                       {fuzz_col(schema, "c"), Literal(rng.pick(fuzz_words()))},
                       std::make_pair(CompareOp::Le, Literal(static_cast<double>(rng.range(0, 4))))};
      return make_expr({std::move(call)});
    }
  }
}

inline ExprPtr fuzz_tree(Rng& rng, const Schema& schema, int depth) {
  if (depth <= 0 || rng.chance(0.35)) return fuzz_leaf(rng, schema);
  switch (rng.range(0, 4)) {
    case 0:
    case 1: return make_and(fuzz_tree(rng, schema, depth - 1), fuzz_tree(rng, schema, depth - 1));
    case 2:
    case 3: return make_or(fuzz_tree(rng, schema, depth - 1), fuzz_tree(rng, schema, depth - 1));
    default: return make_not(fuzz_tree(rng, schema, depth - 1));
  }
}

/// In-memory bundles: collect every descriptor's payload straight from rows.
inline std::vector<ObjectBundle> fuzz_bundles(const std::vector<std::vector<Row>>& objects,
                                              const std::vector<IndexDescriptor>& descriptors,
                                              const Schema& schema,
                                              const ExtractorRegistry& extractors) {
  std::vector<ObjectBundle> bundles;
  for (std::size_t i = 0; i < objects.size(); ++i) {
    ObjectBundle b;
    b.object.name = "obj_" + std::to_string(i);
    b.object.row_count = static_cast<std::int64_t>(objects[i].size());
    for (const auto& d : descriptors) {
      b.payloads[d.id()] = collect_payload(d, schema, objects[i], extractors);
    }
    bundles.push_back(std::move(b));
  }
  return bundles;
}

}  // namespace dskip::test
