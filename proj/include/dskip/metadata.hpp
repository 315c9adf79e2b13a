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

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "dskip/literal.hpp"
#include "dskip/wkt.hpp"

namespace dskip {

/// One data file in a dataset. `row_count` is unknown (nullopt) until the
/// file has been scanned or a fresh metadata record provided it.
struct ObjectDescriptor {
  std::string name;  // dataset-relative path
  std::int64_t size_bytes = 0;
  std::int64_t last_modified_ms = 0;
  std::optional<std::int64_t> row_count;
};

// Per-index payload collected from one object. `has_nulls` is tracked where
// negation-produced clauses need it: a null row satisfies the negation of
// any leaf predicate, so those clauses must keep null-bearing objects.

struct MinMaxPayload {
  bool absent = false;  // column all-null in this object
  Literal min, max;
  bool has_nulls = false;
};

struct GapListPayload {
  bool absent = false;
  Literal min, max;
  std::vector<std::pair<Literal, Literal>> gaps;  // open intervals, sorted, disjoint
  bool has_nulls = false;
};

struct ValueListPayload {
  std::vector<Literal> values;  // sorted distinct non-null
  bool has_nulls = false;
};

struct BloomPayload {
  std::vector<std::uint8_t> bits;  // packed little-endian
  std::uint64_t num_bits = 0;
  std::uint32_t num_hashes = 1;
  std::uint64_t seed = 0;
};

struct HybridPayload {
  std::variant<ValueListPayload, BloomPayload> inner;
};

struct PrefixPayload {
  std::int64_t length = 0;  // configured max entry length, in Unicode scalars
  std::vector<std::string> entries;  // sorted distinct
};

struct SuffixPayload {
  std::int64_t length = 0;
  std::vector<std::string> entries;
};

struct GeoBoxPayload {
  std::vector<BBox> boxes;
  bool has_null_rows = false;  // some row had a null coordinate: never skip
};

struct MetricDistPayload {
  bool absent = false;  // no row had usable (non-null) inputs
  std::string metric;
  std::string origin;  // textual origin representation
  double dmin = 0, dmax = 0;
};

struct FormattedPayload {
  std::string extractor;
  std::vector<std::string> values;  // sorted distinct extracted values
};

using MetadataPayload =
    std::variant<MinMaxPayload, GapListPayload, ValueListPayload, BloomPayload, HybridPayload,
                 PrefixPayload, SuffixPayload, GeoBoxPayload, MetricDistPayload, FormattedPayload>;

/// The metadata visible for one object at query time: fresh payloads keyed by
/// descriptor id. Stale or missing entries are simply not present, which
/// makes every clause needing them evaluate to keep.
struct ObjectBundle {
  ObjectDescriptor object;
  std::map<std::string, MetadataPayload> payloads;
};

}  // namespace dskip
