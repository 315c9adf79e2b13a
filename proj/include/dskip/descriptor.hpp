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

#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dskip/errors.hpp"
#include "dskip/schema.hpp"

namespace dskip {

enum class IndexType {
  MinMax,
  GapList,
  ValueList,
  Bloom,
  Hybrid,
  Prefix,
  Suffix,
  GeoBox,
  MetricDist,
  Formatted,
};

inline const char* to_string(IndexType t) {
  switch (t) {
    case IndexType::MinMax: return "minmax";
    case IndexType::GapList: return "gaplist";
    case IndexType::ValueList: return "valuelist";
    case IndexType::Bloom: return "bloom";
    case IndexType::Hybrid: return "hybrid";
    case IndexType::Prefix: return "prefix";
    case IndexType::Suffix: return "suffix";
    case IndexType::GeoBox: return "geobox";
    case IndexType::MetricDist: return "metricdist";
    case IndexType::Formatted: return "formatted";
  }
  return "?";
}

inline std::optional<IndexType> index_type_from_string(std::string_view s) {
  for (IndexType t : {IndexType::MinMax, IndexType::GapList, IndexType::ValueList,
                      IndexType::Bloom, IndexType::Hybrid, IndexType::Prefix, IndexType::Suffix,
                      IndexType::GeoBox, IndexType::MetricDist, IndexType::Formatted}) {
    if (s == to_string(t)) return t;
  }
  return std::nullopt;
}

namespace detail {

inline std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline double parse_param_real(const std::string& key, const std::string& value) {
  double v = 0;
  auto res = std::from_chars(value.data(), value.data() + value.size(), v);
  if (res.ec != std::errc{} || res.ptr != value.data() + value.size() || !std::isfinite(v)) {
    throw ParseError("descriptor param '" + key + "' is not a number: " + value, 0);
  }
  return v;
}

inline std::int64_t parse_param_int(const std::string& key, const std::string& value) {
  std::int64_t v = 0;
  auto res = std::from_chars(value.data(), value.data() + value.size(), v);
  if (res.ec != std::errc{} || res.ptr != value.data() + value.size()) {
    throw ParseError("descriptor param '" + key + "' is not an integer: " + value, 0);
  }
  return v;
}

}  // namespace detail

/// Describes one index over one or two columns, with string parameters.
/// CLI syntax: `type:col[,col2][:key=value,...]`, e.g. `minmax:temp`,
/// `bloom:db_name:f=0.01`, `prefix:db_name:len=15`, `geobox:lat,lng:x=4`.
/// Pair-valued params (the euclidean2d origin) separate components with ';'.
struct IndexDescriptor {
  IndexType type = IndexType::MinMax;
  std::vector<std::string> columns;
  std::map<std::string, std::string> params;  // canonical keys, defaults filled in

  /// Stable identity used in file names and clause bindings:
  /// `type.col1[.col2][.paramhash8]`.
  std::string id() const {
    std::string out = to_string(type);
    for (const auto& c : columns) {
      out += ".";
      out += c;
    }
    if (!params.empty()) {
      std::string canon;
      for (const auto& [k, v] : params) {
        canon += k;
        canon += "=";
        canon += v;
        canon += ";";
      }
      char buf[17];
      std::snprintf(buf, sizeof(buf), "%08llx",
                    static_cast<unsigned long long>(detail::fnv1a64(canon) & 0xffffffffull));
      out += ".";
      out += buf;
    }
    return out;
  }

  std::string display() const {
    std::string out = to_string(type);
    out += ":";
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (i) out += ",";
      out += columns[i];
    }
    bool first = true;
    for (const auto& [k, v] : params) {
      out += first ? ":" : ",";
      first = false;
      out += k + "=" + v;
    }
    return out;
  }

  double real_param(const std::string& key) const {
    return detail::parse_param_real(key, params.at(key));
  }
  std::int64_t int_param(const std::string& key) const {
    return detail::parse_param_int(key, params.at(key));
  }
};

namespace detail {

inline void fill_descriptor_defaults(IndexDescriptor& d) {
  auto set_default = [&d](const char* key, const std::string& value) {
    if (!d.params.count(key)) d.params[key] = value;
  };
  switch (d.type) {
    case IndexType::GapList: set_default("k", "8"); break;
    case IndexType::Bloom: set_default("f", "0.01"); break;
    case IndexType::Hybrid:
      set_default("threshold", "10000");
      set_default("f", "0.01");
      break;
    case IndexType::GeoBox: set_default("x", "1"); break;
    default: break;
  }
}

inline void validate_descriptor_params(const IndexDescriptor& d) {
  auto require = [&d](const char* key) {
    if (!d.params.count(key)) {
      throw ParseError(std::string("descriptor ") + to_string(d.type) + " requires param '" +
                           key + "'",
                       0);
    }
  };
  auto fail = [&d](const std::string& msg) {
    throw ParseError("descriptor " + d.display() + ": " + msg, 0);
  };
  if (d.type == IndexType::GeoBox) {
    if (d.columns.size() != 2) fail("geobox takes exactly 2 columns (lat,lng)");
  } else if (d.type == IndexType::MetricDist) {
    require("metric");
    require("origin");
    const std::string& metric = d.params.at("metric");
    if (metric == "euclidean2d") {
      if (d.columns.size() != 2) fail("euclidean2d metric takes 2 columns (lat,lng)");
    } else if (metric == "abs1d" || metric == "levenshtein") {
      if (d.columns.size() != 1) fail("metric '" + metric + "' takes 1 column");
    } else {
      fail("unknown metric '" + metric + "'");
    }
  } else if (d.columns.size() != 1) {
    fail("takes exactly 1 column");
  }
  switch (d.type) {
    case IndexType::GapList:
      if (d.int_param("k") < 1) fail("k must be >= 1");
      break;
    case IndexType::Bloom: {
      double f = d.real_param("f");
      if (!(f > 0.0 && f < 1.0)) fail("f must be in (0,1)");
      break;
    }
    case IndexType::Hybrid: {
      double f = d.real_param("f");
      if (!(f > 0.0 && f < 1.0)) fail("f must be in (0,1)");
      if (d.int_param("threshold") < 0) fail("threshold must be >= 0");
      break;
    }
    case IndexType::Prefix:
    case IndexType::Suffix:
      require("length");
      if (d.int_param("length") < 1) fail("length must be >= 1");
      break;
    case IndexType::GeoBox:
      if (d.int_param("x") < 1) fail("x must be >= 1");
      break;
    case IndexType::MetricDist: {
      const std::string& metric = d.params.at("metric");
      const std::string& origin = d.params.at("origin");
      if (metric == "euclidean2d") {
        auto semi = origin.find(';');
        if (semi == std::string::npos) fail("euclidean2d origin must be 'lat;lng'");
        parse_param_real("origin", origin.substr(0, semi));
        parse_param_real("origin", origin.substr(semi + 1));
      } else if (metric == "abs1d") {
        parse_param_real("origin", origin);
      }
      break;
    }
    case IndexType::Formatted: require("extractor"); break;
    default: break;
  }
}

}  // namespace detail

/// Parses the CLI descriptor syntax, fills defaults, validates parameters.
inline IndexDescriptor parse_descriptor(std::string_view text) {
  IndexDescriptor d;
  auto first_colon = text.find(':');
  if (first_colon == std::string_view::npos || first_colon == 0) {
    throw ParseError("descriptor must look like type:col[,col2][:key=value,...]", 0);
  }
  auto type = index_type_from_string(text.substr(0, first_colon));
  if (!type) throw ParseError("unknown index type '" + std::string(text.substr(0, first_colon)) + "'", 0);
  d.type = *type;

  auto second_colon = text.find(':', first_colon + 1);
  std::string_view cols = text.substr(
      first_colon + 1,
      (second_colon == std::string_view::npos ? text.size() : second_colon) - first_colon - 1);
  std::size_t start = 0;
  while (start <= cols.size()) {
    auto comma = cols.find(',', start);
    std::string_view col = cols.substr(start, (comma == std::string_view::npos ? cols.size() : comma) - start);
    if (col.empty()) throw ParseError("descriptor has an empty column name", first_colon + 1);
    d.columns.emplace_back(col);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }

  if (second_colon != std::string_view::npos) {
    std::string_view rest = text.substr(second_colon + 1);
    std::size_t p = 0;
    while (p <= rest.size()) {
      auto comma = rest.find(',', p);
      std::string_view pair =
          rest.substr(p, (comma == std::string_view::npos ? rest.size() : comma) - p);
      auto eq = pair.find('=');
      if (eq == std::string_view::npos || eq == 0) {
        throw ParseError("descriptor param must be key=value: '" + std::string(pair) + "'", 0);
      }
      std::string key(pair.substr(0, eq));
      if (key == "len") key = "length";  // CLI shorthand
      d.params[key] = std::string(pair.substr(eq + 1));
      if (comma == std::string_view::npos) break;
      p = comma + 1;
    }
  }

  detail::fill_descriptor_defaults(d);
  detail::validate_descriptor_params(d);
  return d;
}

/// Column existence and column-type requirements against a schema.
inline void validate_descriptor_against_schema(const IndexDescriptor& d, const Schema& schema) {
  auto type_of = [&](const std::string& col) {
    auto idx = schema.index_of(col);
    if (!idx) throw DatasetError("descriptor " + d.display() + ": unknown column '" + col + "'");
    return schema.at(*idx).type;
  };
  auto fail = [&d](const std::string& msg) {
    throw DatasetError("descriptor " + d.display() + ": " + msg);
  };
  switch (d.type) {
    case IndexType::GapList:
      if (type_of(d.columns[0]) == ValueType::Text) fail("needs a numeric column");
      break;
    case IndexType::Prefix:
    case IndexType::Suffix:
    case IndexType::Formatted:
      if (type_of(d.columns[0]) != ValueType::Text) fail("needs a text column");
      break;
    case IndexType::GeoBox:
      for (const auto& c : d.columns) {
        if (type_of(c) != ValueType::Real) fail("needs real lat/lng columns");
      }
      break;
    case IndexType::MetricDist: {
      const std::string& metric = d.params.at("metric");
      if (metric == "euclidean2d") {
        for (const auto& c : d.columns) {
          if (type_of(c) == ValueType::Text) fail("euclidean2d needs numeric columns");
        }
      } else if (metric == "abs1d") {
        if (type_of(d.columns[0]) == ValueType::Text) fail("abs1d needs a numeric column");
      } else {
        if (type_of(d.columns[0]) != ValueType::Text) fail("levenshtein needs a text column");
      }
      break;
    }
    default:
      type_of(d.columns[0]);
      break;
  }
}

}  // namespace dskip
