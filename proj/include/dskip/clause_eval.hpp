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

#include <algorithm>
#include <string_view>

#include "dskip/bloom.hpp"
#include "dskip/clause.hpp"
#include "dskip/collect.hpp"
#include "dskip/errors.hpp"
#include "dskip/like.hpp"
#include "dskip/metadata.hpp"
#include "dskip/schema.hpp"
#include "dskip/unicode.hpp"

namespace dskip {

// eval_clause: true = the object may be relevant (keep), false = skip.
// A clause whose payload is missing from the bundle (never collected, stale,
// or whose record vanished) evaluates to keep. Payload kinds that contradict
// the clause signal store corruption.

namespace detail {

struct RangeView {
  bool absent;
  const Literal* min;
  const Literal* max;
  bool has_nulls;
  const std::vector<std::pair<Literal, Literal>>* gaps;  // null when not a gap list
};

inline RangeView range_view(const MetadataPayload& p, const char* what) {
  if (const auto* mm = std::get_if<MinMaxPayload>(&p)) {
    return {mm->absent, &mm->min, &mm->max, mm->has_nulls, nullptr};
  }
  if (const auto* gl = std::get_if<GapListPayload>(&p)) {
    return {gl->absent, &gl->min, &gl->max, gl->has_nulls, &gl->gaps};
  }
  throw StoreCorruptionError(std::string(what) + ": payload is not min/max-shaped");
}

inline bool value_list_contains(const std::vector<Literal>& sorted_values,
                                const Literal& candidate) {
  if (sorted_values.empty()) return false;
  // Lists are homogeneous; coerce the candidate to the stored kind so binary
  // search sees comparable values.
  ValueType kind = sorted_values.front().is_text()
                       ? ValueType::Text
                       : (sorted_values.front().is_integer() ? ValueType::Integer : ValueType::Real);
  auto coerced = coerce_to_type(candidate, kind);
  if (!coerced) return false;
  return std::binary_search(sorted_values.begin(), sorted_values.end(), *coerced, literal_less);
}

inline bool bloom_contains_any(const BloomPayload& bloom, const std::vector<Literal>& candidates,
                               ValueType column_type) {
  for (const auto& cand : candidates) {
    auto key = encode_canonical(cand, column_type);
    if (key && bloom_might_contain(bloom, *key)) return true;
  }
  return false;
}

inline ValueType column_type_or_throw(const Schema& schema, const std::string& col) {
  auto idx = schema.index_of(col);
  if (!idx) throw StoreCorruptionError("clause references unknown column '" + col + "'");
  return schema.at(*idx).type;
}

}  // namespace detail

inline bool eval_clause(const ClausePtr& clause, const ObjectBundle& bundle,
                        const Schema& schema) {
  if (!clause) return true;
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, TrueClause>) {
          return true;
        } else if constexpr (std::is_same_v<T, AndClause>) {
          for (const auto& c : x.children) {
            if (!eval_clause(c, bundle, schema)) return false;
          }
          return true;
        } else if constexpr (std::is_same_v<T, OrClause>) {
          for (const auto& c : x.children) {
            if (eval_clause(c, bundle, schema)) return true;
          }
          return false;
        } else {
          auto it = bundle.payloads.find(x.descriptor_id);
          if (it == bundle.payloads.end()) return true;  // absent or stale: keep
          const MetadataPayload& payload = it->second;

          if constexpr (std::is_same_v<T, MinClause>) {
            auto view = detail::range_view(payload, "MinClause");
            if (x.or_nulls && view.has_nulls) return true;
            if (view.absent) return false;  // no non-null values at all
            auto cmp = compare_literals(*view.min, x.value);
            return cmp && apply_compare_op(x.op, *cmp);
          } else if constexpr (std::is_same_v<T, MaxClause>) {
            auto view = detail::range_view(payload, "MaxClause");
            if (x.or_nulls && view.has_nulls) return true;
            if (view.absent) return false;
            auto cmp = compare_literals(*view.max, x.value);
            return cmp && apply_compare_op(x.op, *cmp);
          } else if constexpr (std::is_same_v<T, IntervalClause>) {
            auto view = detail::range_view(payload, "IntervalClause");
            if (view.absent) return false;
            auto max_vs_lo = compare_literals(*view.max, x.lo);
            auto min_vs_hi = compare_literals(*view.min, x.hi);
            if (!max_vs_lo || !min_vs_hi) return true;  // incomparable: keep
            if (*max_vs_lo < 0 || *min_vs_hi > 0) return false;
            if (view.gaps) {
              for (const auto& [glo, ghi] : *view.gaps) {
                auto a = compare_literals(glo, x.lo);
                auto b = compare_literals(x.hi, ghi);
                if (a && b && *a < 0 && *b < 0) return false;  // gap strictly covers [lo,hi]
              }
            }
            return true;
          } else if constexpr (std::is_same_v<T, ValueSetAnyClause>) {
            const ValueListPayload* vl = std::get_if<ValueListPayload>(&payload);
            if (const auto* hy = std::get_if<HybridPayload>(&payload)) {
              if (const auto* bl = std::get_if<BloomPayload>(&hy->inner)) {
                return detail::bloom_contains_any(
                    *bl, x.candidates, detail::column_type_or_throw(schema, x.col));
              }
              vl = &std::get<ValueListPayload>(hy->inner);
            }
            if (!vl) throw StoreCorruptionError("ValueSetAnyClause: payload is not a value list");
            for (const auto& cand : x.candidates) {
              if (detail::value_list_contains(vl->values, cand)) return true;
            }
            return false;
          } else if constexpr (std::is_same_v<T, ValueSetOtherThanClause>) {
            const auto* vl = std::get_if<ValueListPayload>(&payload);
            if (!vl) {
              throw StoreCorruptionError("ValueSetOtherThanClause: payload is not a value list");
            }
            if (vl->has_nulls) return true;  // a null row satisfies the negation
            for (const auto& v : vl->values) {
              if (!literals_equal_coerced(v, x.excluded)) return true;
            }
            return false;
          } else if constexpr (std::is_same_v<T, ValuePatternClause>) {
            const ValueListPayload* vl = std::get_if<ValueListPayload>(&payload);
            if (const auto* hy = std::get_if<HybridPayload>(&payload)) {
              vl = std::get_if<ValueListPayload>(&hy->inner);
              if (!vl) return true;  // bloom-variant objects cannot evaluate LIKE
            }
            if (!vl) throw StoreCorruptionError("ValuePatternClause: payload is not a value list");
            for (const auto& v : vl->values) {
              if (v.is_text() && match_like(x.pattern, v.as_text())) return true;
            }
            return false;
          } else if constexpr (std::is_same_v<T, BloomAnyClause>) {
            const auto* bl = std::get_if<BloomPayload>(&payload);
            if (!bl) throw StoreCorruptionError("BloomAnyClause: payload is not a bloom filter");
            return detail::bloom_contains_any(*bl, x.candidates,
                                              detail::column_type_or_throw(schema, x.col));
          } else if constexpr (std::is_same_v<T, PrefixClause>) {
            const auto* pf = std::get_if<PrefixPayload>(&payload);
            if (!pf) throw StoreCorruptionError("PrefixClause: payload is not a prefix list");
            const auto b1 = static_cast<std::size_t>(pf->length);
            if (utf8_length(x.prefix) <= b1) {
              // Entry starting with the queried prefix <=> some value does.
              auto it2 = std::lower_bound(pf->entries.begin(), pf->entries.end(), x.prefix);
              return it2 != pf->entries.end() && it2->size() >= x.prefix.size() &&
                     it2->compare(0, x.prefix.size(), x.prefix) == 0;
            }
            std::string truncated = utf8_prefix(x.prefix, b1);
            return std::binary_search(pf->entries.begin(), pf->entries.end(), truncated);
          } else if constexpr (std::is_same_v<T, SuffixClause>) {
            const auto* sf = std::get_if<SuffixPayload>(&payload);
            if (!sf) throw StoreCorruptionError("SuffixClause: payload is not a suffix list");
            const auto b2 = static_cast<std::size_t>(sf->length);
            auto ends_with = [](std::string_view s, std::string_view tail) {
              return s.size() >= tail.size() && s.substr(s.size() - tail.size()) == tail;
            };
            if (utf8_length(x.suffix) <= b2) {
              for (const auto& entry : sf->entries) {
                if (ends_with(entry, x.suffix)) return true;
              }
              return false;
            }
            std::string truncated = utf8_suffix(x.suffix, b2);
            return std::binary_search(sf->entries.begin(), sf->entries.end(), truncated);
          } else if constexpr (std::is_same_v<T, BoxOverlapClause>) {
            const auto* gb = std::get_if<GeoBoxPayload>(&payload);
            if (!gb) throw StoreCorruptionError("BoxOverlapClause: payload is not a geo box list");
            if (gb->has_null_rows) return true;
            for (const auto& box : gb->boxes) {
              if (box.intersects(x.box)) return true;
            }
            return false;
          } else if constexpr (std::is_same_v<T, RingOverlapClause>) {
            const auto* md = std::get_if<MetricDistPayload>(&payload);
            if (!md) throw StoreCorruptionError("RingOverlapClause: payload is not metric-dist");
            if (md->absent) return false;
            return md->dmin <= x.query_distance + x.radius &&
                   md->dmax >= x.query_distance - x.radius;
          } else {
            const auto* fm = std::get_if<FormattedPayload>(&payload);
            if (!fm) throw StoreCorruptionError("ExtractedAnyClause: payload is not formatted");
            if (fm->extractor != x.extractor) {
              throw StoreCorruptionError("ExtractedAnyClause: extractor mismatch");
            }
            for (const auto& cand : x.candidates) {
              if (std::binary_search(fm->values.begin(), fm->values.end(), cand)) return true;
            }
            return false;
          }
        }
      },
      clause->node);
}

}  // namespace dskip
