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
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "dskip/csv.hpp"
#include "dskip/errors.hpp"
#include "dskip/schema.hpp"

namespace dskip {

/// splitmix64-based generator. Self-contained so generated datasets are
/// byte-identical across standard libraries and platforms.
class DetRng {
 public:
  explicit DetRng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::int64_t range(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(next() % static_cast<std::uint64_t>(hi - lo + 1));
  }

  double real(double lo, double hi) {
    double u = static_cast<double>(next() >> 11) * 0x1.0p-53;
    return lo + u * (hi - lo);
  }

  bool chance(double p) { return real(0.0, 1.0) < p; }

 private:
  std::uint64_t state_;
};

struct ColumnGenSpec {
  std::string name;
  ValueType type = ValueType::Integer;
  double num_lo = 0, num_hi = 100;  // numeric range
  std::int64_t pool_size = 16;      // distinct words for text columns
  double null_fraction = 0;
};

enum class DatasetLayout { Random, RangePartitioned, GeoGrid };

struct DatasetGenSpec {
  std::int64_t objects = 4;
  std::int64_t rows_per_object = 100;
  std::vector<ColumnGenSpec> columns;
  DatasetLayout layout = DatasetLayout::Random;
};

namespace detail {

/// Pool word i: deterministic syllable string, unique per index.
inline std::string pool_word(std::int64_t i) {
  static const char* syllables[] = {"ka", "ru", "mi", "to", "sa", "ne", "vo", "li",
                                    "da", "pe", "go", "zu", "fa", "he", "wi", "yo"};
  std::string w;
  std::int64_t v = i;
  do {
    w += syllables[v % 16];
    v /= 16;
  } while (v > 0);
  w += std::to_string(i % 10);
  return w;
}

inline Literal gen_value(const ColumnGenSpec& col, DetRng& rng) {
  if (col.null_fraction > 0 && rng.chance(col.null_fraction)) return Literal();
  switch (col.type) {
    case ValueType::Integer:
      return Literal(rng.range(static_cast<std::int64_t>(col.num_lo),
                               static_cast<std::int64_t>(col.num_hi)));
    case ValueType::Real: return Literal(rng.real(col.num_lo, col.num_hi));
    case ValueType::Text: return Literal(pool_word(rng.range(0, col.pool_size - 1)));
  }
  return Literal();
}

}  // namespace detail

/// Writes schema.json plus obj_NNNN.csv objects. Deterministic given the
/// seed. Layouts:
///  - random: every cell independent;
///  - range-partitioned: the first numeric column's domain is split into
///    `objects` equal ranges, object i drawing only from range i;
///  - geo-grid: the first two real columns become (lat, lng) points inside
///    the object's tile of a g x g grid over the configured square, where
///    g = sqrt(objects) must be integral.
inline void generate_dataset(const DatasetGenSpec& spec, std::uint64_t seed,
                             const std::filesystem::path& root) {
  if (spec.columns.empty()) throw DatasetError("dataset spec needs at least one column");
  if (spec.objects < 1) throw DatasetError("dataset spec needs at least one object");
  std::filesystem::create_directories(root);

  std::vector<Column> cols;
  for (const auto& c : spec.columns) cols.push_back({c.name, c.type});
  Schema schema(std::move(cols));
  schema.save((root / "schema.json").string());

  std::int64_t grid = 0;
  std::size_t lat_col = 0, lng_col = 0;
  if (spec.layout == DatasetLayout::GeoGrid) {
    grid = static_cast<std::int64_t>(std::llround(std::sqrt(static_cast<double>(spec.objects))));
    if (grid * grid != spec.objects) {
      throw DatasetError("geo-grid layout needs a square object count");
    }
    bool found_lat = false, found_lng = false;
    for (std::size_t i = 0; i < spec.columns.size(); ++i) {
      if (spec.columns[i].type != ValueType::Real) continue;
      if (!found_lat) {
        lat_col = i;
        found_lat = true;
      } else if (!found_lng) {
        lng_col = i;
        found_lng = true;
        break;
      }
    }
    if (!found_lng) throw DatasetError("geo-grid layout needs two real columns");
  }
  std::size_t partition_col = 0;
  if (spec.layout == DatasetLayout::RangePartitioned) {
    bool found = false;
    for (std::size_t i = 0; i < spec.columns.size(); ++i) {
      if (spec.columns[i].type != ValueType::Text) {
        partition_col = i;
        found = true;
        break;
      }
    }
    if (!found) throw DatasetError("range-partitioned layout needs a numeric column");
  }

  for (std::int64_t o = 0; o < spec.objects; ++o) {
    DetRng rng(seed * 0x9e3779b97f4a7c15ull + static_cast<std::uint64_t>(o) + 1);
    std::vector<Row> rows;
    rows.reserve(static_cast<std::size_t>(spec.rows_per_object));
    for (std::int64_t r = 0; r < spec.rows_per_object; ++r) {
      Row row;
      for (std::size_t c = 0; c < spec.columns.size(); ++c) {
        ColumnGenSpec col = spec.columns[c];
        if (spec.layout == DatasetLayout::RangePartitioned && c == partition_col) {
          if (col.type == ValueType::Integer) {
            // Exact disjoint integer slices.
            auto lo = static_cast<std::int64_t>(col.num_lo);
            auto hi = static_cast<std::int64_t>(col.num_hi);
            std::int64_t span = hi - lo + 1;
            std::int64_t a = lo + span * o / spec.objects;
            std::int64_t b = lo + span * (o + 1) / spec.objects - 1;
            col.num_lo = static_cast<double>(a);
            col.num_hi = static_cast<double>(std::max(a, b));
          } else {
            double width = (col.num_hi - col.num_lo) / static_cast<double>(spec.objects);
            col.num_lo = col.num_lo + width * static_cast<double>(o);
            col.num_hi = col.num_lo + width;
          }
        } else if (spec.layout == DatasetLayout::GeoGrid && (c == lat_col || c == lng_col)) {
          std::int64_t tile_row = o / grid, tile_col = o % grid;
          std::int64_t tile = (c == lat_col) ? tile_row : tile_col;
          double width = (col.num_hi - col.num_lo) / static_cast<double>(grid);
          col.num_lo = col.num_lo + width * static_cast<double>(tile);
          col.num_hi = col.num_lo + width;
        }
        row.values.push_back(detail::gen_value(col, rng));
      }
      rows.push_back(std::move(row));
    }
    char name[32];
    std::snprintf(name, sizeof(name), "obj_%04lld.csv", static_cast<long long>(o));
    write_csv_rows((root / name).string(), schema, rows);
  }
}

}  // namespace dskip
