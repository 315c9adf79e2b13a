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
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "dskip/bloom.hpp"
#include "dskip/descriptor.hpp"
#include "dskip/errors.hpp"
#include "dskip/metadata.hpp"
#include "dskip/schema.hpp"
#include "dskip/udf.hpp"
#include "dskip/unicode.hpp"

namespace dskip {

namespace detail {

inline bool literal_less(const Literal& a, const Literal& b) {
  auto c = compare_literals(a, b);
  return c.has_value() && *c < 0;
}

/// Sorted distinct non-null values plus whether any null was seen.
inline std::pair<std::vector<Literal>, bool> sorted_distinct(std::span<const Literal> values) {
  std::vector<Literal> out;
  bool has_nulls = false;
  for (const auto& v : values) {
    if (v.is_null()) {
      has_nulls = true;
    } else {
      out.push_back(v);
    }
  }
  std::sort(out.begin(), out.end(), literal_less);
  out.erase(std::unique(out.begin(), out.end(),
                        [](const Literal& a, const Literal& b) { return a == b; }),
            out.end());
  return {std::move(out), has_nulls};
}

}  // namespace detail

inline MinMaxPayload collect_minmax(std::span<const Literal> values) {
  MinMaxPayload p;
  bool seen = false;
  for (const auto& v : values) {
    if (v.is_null()) {
      p.has_nulls = true;
      continue;
    }
    if (!seen) {
      p.min = p.max = v;
      seen = true;
      continue;
    }
    if (detail::literal_less(v, p.min)) p.min = v;
    if (detail::literal_less(p.max, v)) p.max = v;
  }
  p.absent = !seen;
  return p;
}

/// Min/max plus the k widest interior open gaps (ties broken by the lower
/// left endpoint). For integer columns a gap must have room for an integer
/// strictly inside; for real columns any positive width counts.
inline GapListPayload collect_gaplist(std::span<const Literal> values, ValueType type,
                                      std::int64_t k) {
  auto sorted = detail::sorted_distinct(values);
  std::vector<Literal>& distinct = sorted.first;
  GapListPayload p;
  p.has_nulls = sorted.second;
  if (distinct.empty()) {
    p.absent = true;
    return p;
  }
  p.min = distinct.front();
  p.max = distinct.back();

  struct Gap {
    long double width;
    std::size_t pos;  // index of the left endpoint
  };
  std::vector<Gap> gaps;
  for (std::size_t i = 0; i + 1 < distinct.size(); ++i) {
    long double width = distinct[i + 1].numeric() - distinct[i].numeric();
    bool open_interval_nonempty =
        (type == ValueType::Integer) ? width > 1.0L : width > 0.0L;
    if (open_interval_nonempty) gaps.push_back({width, i});
  }
  std::sort(gaps.begin(), gaps.end(), [&](const Gap& a, const Gap& b) {
    if (a.width != b.width) return a.width > b.width;
    return detail::literal_less(distinct[a.pos], distinct[b.pos]);
  });
  if (static_cast<std::int64_t>(gaps.size()) > k) gaps.resize(static_cast<std::size_t>(k));
  std::sort(gaps.begin(), gaps.end(), [](const Gap& a, const Gap& b) { return a.pos < b.pos; });
  for (const auto& g : gaps) {
    p.gaps.emplace_back(distinct[g.pos], distinct[g.pos + 1]);
  }
  return p;
}

inline ValueListPayload collect_valuelist(std::span<const Literal> values) {
  auto [distinct, has_nulls] = detail::sorted_distinct(values);
  return ValueListPayload{std::move(distinct), has_nulls};
}

inline BloomPayload collect_bloom(std::span<const Literal> values, ValueType type, double f,
                                  std::uint64_t seed = kDefaultBloomSeed) {
  auto [distinct, has_nulls] = detail::sorted_distinct(values);
  (void)has_nulls;
  BloomPayload bloom = make_bloom(distinct.size(), f, seed);
  for (const auto& v : distinct) {
    auto key = encode_canonical(v, type);
    if (key) bloom_insert(bloom, *key);
  }
  return bloom;
}

inline HybridPayload collect_hybrid(std::span<const Literal> values, ValueType type,
                                    std::int64_t threshold, double f,
                                    std::uint64_t seed = kDefaultBloomSeed) {
  auto [distinct, has_nulls] = detail::sorted_distinct(values);
  HybridPayload h;
  if (static_cast<std::int64_t>(distinct.size()) <= threshold) {
    h.inner = ValueListPayload{std::move(distinct), has_nulls};
  } else {
    BloomPayload bloom = make_bloom(distinct.size(), f, seed);
    for (const auto& v : distinct) {
      auto key = encode_canonical(v, type);
      if (key) bloom_insert(bloom, *key);
    }
    h.inner = std::move(bloom);
  }
  return h;
}

/// Largest cardinality v at which a value list still beats a bloom filter:
/// the biggest integer with v*(avgValueBits + ln f / ln^2 2) strictly below
/// f * 8*objectSizeBytes * (1 - expectedScanFactor).
inline std::int64_t hybrid_threshold(std::int64_t object_size_bytes, double avg_value_bits,
                                     double f, double expected_scan_factor) {
  if (object_size_bytes <= 0 || avg_value_bits <= 0) {
    throw DatasetError("hybrid_threshold: sizes must be positive");
  }
  if (!(f > 0.0 && f < 1.0) || !(expected_scan_factor > 0.0 && expected_scan_factor < 1.0)) {
    throw DatasetError("hybrid_threshold: f and expectedScanFactor must be in (0,1)");
  }
  const double ln2 = 0.6931471805599453;
  double per_value = avg_value_bits + std::log(f) / (ln2 * ln2);
  if (per_value <= 0.0) {
    throw DatasetError("hybrid_threshold: value list always preferable");
  }
  double object_bits = 8.0 * static_cast<double>(object_size_bytes);
  double budget = f * object_bits * (1.0 - expected_scan_factor);
  auto v = static_cast<std::int64_t>(std::floor(budget / per_value));
  while (v > 0 && static_cast<double>(v) * per_value >= budget) --v;
  while (static_cast<double>(v + 1) * per_value < budget) ++v;
  return v;
}

inline PrefixPayload collect_prefix(std::span<const Literal> values, std::int64_t b1) {
  PrefixPayload p;
  p.length = b1;
  std::vector<std::string> entries;
  for (const auto& v : values) {
    if (v.is_null()) continue;
    entries.push_back(utf8_prefix(v.as_text(), static_cast<std::size_t>(b1)));
  }
  std::sort(entries.begin(), entries.end());
  entries.erase(std::unique(entries.begin(), entries.end()), entries.end());
  p.entries = std::move(entries);
  return p;
}

inline SuffixPayload collect_suffix(std::span<const Literal> values, std::int64_t b2) {
  SuffixPayload p;
  p.length = b2;
  std::vector<std::string> entries;
  for (const auto& v : values) {
    if (v.is_null()) continue;
    entries.push_back(utf8_suffix(v.as_text(), static_cast<std::size_t>(b2)));
  }
  std::sort(entries.begin(), entries.end());
  entries.erase(std::unique(entries.begin(), entries.end()), entries.end());
  p.entries = std::move(entries);
  return p;
}

/// Rows sorted by latitude are split into x contiguous equal-count groups
/// with one tight box per group. A row with a null coordinate is excluded
/// and flags the object as non-skippable for geo clauses.
inline GeoBoxPayload collect_geobox(std::span<const Literal> lat, std::span<const Literal> lng,
                                    std::int64_t x) {
  GeoBoxPayload p;
  std::vector<GeoPoint> points;
  for (std::size_t i = 0; i < lat.size(); ++i) {
    if (lat[i].is_null() || lng[i].is_null()) {
      p.has_null_rows = true;
      continue;
    }
    points.push_back({static_cast<double>(lat[i].numeric()), static_cast<double>(lng[i].numeric())});
  }
  std::sort(points.begin(), points.end(), [](const GeoPoint& a, const GeoPoint& b) {
    if (a.lat != b.lat) return a.lat < b.lat;
    return a.lng < b.lng;
  });
  const std::size_t n = points.size();
  if (n == 0) return p;
  const auto groups = static_cast<std::size_t>(std::min<std::int64_t>(x, static_cast<std::int64_t>(n)));
  const std::size_t base = n / groups, extra = n % groups;
  std::size_t begin = 0;
  for (std::size_t g = 0; g < groups; ++g) {
    std::size_t count = base + (g < extra ? 1 : 0);
    BBox box{points[begin].lat, points[begin].lat, points[begin].lng, points[begin].lng};
    for (std::size_t i = begin; i < begin + count; ++i) {
      box.lat_lo = std::min(box.lat_lo, points[i].lat);
      box.lat_hi = std::max(box.lat_hi, points[i].lat);
      box.lng_lo = std::min(box.lng_lo, points[i].lng);
      box.lng_hi = std::max(box.lng_hi, points[i].lng);
    }
    p.boxes.push_back(box);
    begin += count;
  }
  return p;
}

inline MetricDistPayload collect_metricdist_abs1d(std::span<const Literal> values, double origin) {
  MetricDistPayload p;
  p.metric = "abs1d";
  p.origin = literal_to_string(Literal(origin));
  bool seen = false;
  for (const auto& v : values) {
    if (v.is_null()) continue;
    double d = std::abs(static_cast<double>(v.numeric()) - origin);
    if (!seen) {
      p.dmin = p.dmax = d;
      seen = true;
    } else {
      p.dmin = std::min(p.dmin, d);
      p.dmax = std::max(p.dmax, d);
    }
  }
  p.absent = !seen;
  return p;
}

inline MetricDistPayload collect_metricdist_levenshtein(std::span<const Literal> values,
                                                        const std::string& origin) {
  MetricDistPayload p;
  p.metric = "levenshtein";
  p.origin = origin;
  bool seen = false;
  for (const auto& v : values) {
    if (v.is_null()) continue;
    double d = static_cast<double>(levenshtein(v.as_text(), origin));
    if (!seen) {
      p.dmin = p.dmax = d;
      seen = true;
    } else {
      p.dmin = std::min(p.dmin, d);
      p.dmax = std::max(p.dmax, d);
    }
  }
  p.absent = !seen;
  return p;
}

inline MetricDistPayload collect_metricdist_euclidean2d(std::span<const Literal> lat,
                                                        std::span<const Literal> lng,
                                                        double origin_lat, double origin_lng) {
  MetricDistPayload p;
  p.metric = "euclidean2d";
  p.origin = literal_to_string(Literal(origin_lat)) + ";" + literal_to_string(Literal(origin_lng));
  bool seen = false;
  for (std::size_t i = 0; i < lat.size(); ++i) {
    if (lat[i].is_null() || lng[i].is_null()) continue;
    double d = euclidean_distance(static_cast<double>(lat[i].numeric()),
                                  static_cast<double>(lng[i].numeric()), origin_lat, origin_lng);
    if (!seen) {
      p.dmin = p.dmax = d;
      seen = true;
    } else {
      p.dmin = std::min(p.dmin, d);
      p.dmax = std::max(p.dmax, d);
    }
  }
  p.absent = !seen;
  return p;
}

inline FormattedPayload collect_formatted(std::span<const Literal> values,
                                          const ExtractorRegistry& extractors,
                                          const std::string& extractor) {
  if (!extractors.contains(extractor)) throw DatasetError("unknown extractor: " + extractor);
  FormattedPayload p;
  p.extractor = extractor;
  for (const auto& v : values) {
    if (v.is_null()) continue;
    p.values.push_back(extractors.apply(extractor, v.as_text()));
  }
  std::sort(p.values.begin(), p.values.end());
  p.values.erase(std::unique(p.values.begin(), p.values.end()), p.values.end());
  return p;
}

/// Column slice of a row block.
inline std::vector<Literal> column_values(const std::vector<Row>& rows, std::size_t index) {
  std::vector<Literal> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.values.at(index));
  return out;
}

/// Collects the payload a descriptor asks for from one object's rows.
inline MetadataPayload collect_payload(const IndexDescriptor& d, const Schema& schema,
                                       const std::vector<Row>& rows,
                                       const ExtractorRegistry& extractors) {
  auto col_index = [&](const std::string& name) {
    auto idx = schema.index_of(name);
    if (!idx) throw DatasetError("descriptor " + d.display() + ": unknown column '" + name + "'");
    return *idx;
  };
  std::size_t c0 = col_index(d.columns[0]);
  ValueType t0 = schema.at(c0).type;
  std::vector<Literal> v0 = column_values(rows, c0);

  switch (d.type) {
    case IndexType::MinMax: return collect_minmax(v0);
    case IndexType::GapList: return collect_gaplist(v0, t0, d.int_param("k"));
    case IndexType::ValueList: return collect_valuelist(v0);
    case IndexType::Bloom: return collect_bloom(v0, t0, d.real_param("f"));
    case IndexType::Hybrid:
      return collect_hybrid(v0, t0, d.int_param("threshold"), d.real_param("f"));
    case IndexType::Prefix: return collect_prefix(v0, d.int_param("length"));
    case IndexType::Suffix: return collect_suffix(v0, d.int_param("length"));
    case IndexType::GeoBox: {
      std::vector<Literal> v1 = column_values(rows, col_index(d.columns[1]));
      return collect_geobox(v0, v1, d.int_param("x"));
    }
    case IndexType::MetricDist: {
      const std::string& metric = d.params.at("metric");
      if (metric == "abs1d") {
        return collect_metricdist_abs1d(v0, d.real_param("origin"));
      }
      if (metric == "levenshtein") {
        return collect_metricdist_levenshtein(v0, d.params.at("origin"));
      }
      const std::string& origin = d.params.at("origin");
      auto semi = origin.find(';');
      double olat = detail::parse_param_real("origin", origin.substr(0, semi));
      double olng = detail::parse_param_real("origin", origin.substr(semi + 1));
      std::vector<Literal> v1 = column_values(rows, col_index(d.columns[1]));
      return collect_metricdist_euclidean2d(v0, v1, olat, olng);
    }
    case IndexType::Formatted:
      return collect_formatted(v0, extractors, d.params.at("extractor"));
  }
  throw DatasetError("unhandled index type");
}

}  // namespace dskip
