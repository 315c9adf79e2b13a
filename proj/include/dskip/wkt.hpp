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
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "dskip/errors.hpp"

namespace dskip {

/// Closed axis-aligned box over a (lat, lng) pair of columns.
struct BBox {
  double lat_lo = -std::numeric_limits<double>::infinity();
  double lat_hi = std::numeric_limits<double>::infinity();
  double lng_lo = -std::numeric_limits<double>::infinity();
  double lng_hi = std::numeric_limits<double>::infinity();

  bool intersects(const BBox& o) const {
    return lat_lo <= o.lat_hi && lat_hi >= o.lat_lo && lng_lo <= o.lng_hi && lng_hi >= o.lng_lo;
  }

  bool contains(double lat, double lng) const {
    return lat >= lat_lo && lat <= lat_hi && lng >= lng_lo && lng <= lng_hi;
  }

  bool operator==(const BBox& o) const {
    return lat_lo == o.lat_lo && lat_hi == o.lat_hi && lng_lo == o.lng_lo && lng_hi == o.lng_hi;
  }
};

struct GeoPoint {
  double lat = 0;
  double lng = 0;
};

/// A single-ring polygon. Coordinates are written "lat lng" in WKT text; the
/// first coordinate pairs with the first (lat) column argument of the geo
/// UDFs.
struct Polygon {
  std::vector<GeoPoint> ring;  // closed implicitly; last point need not repeat the first

  BBox bbox() const {
    BBox b{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
           std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (const auto& p : ring) {
      b.lat_lo = std::min(b.lat_lo, p.lat);
      b.lat_hi = std::max(b.lat_hi, p.lat);
      b.lng_lo = std::min(b.lng_lo, p.lng);
      b.lng_hi = std::max(b.lng_hi, p.lng);
    }
    return b;
  }

  /// Even-odd ray casting; points on the boundary count as contained.
  bool contains(double lat, double lng) const {
    const std::size_t n = ring.size();
    if (n < 3) return false;
    // Boundary first.
    for (std::size_t i = 0; i < n; ++i) {
      const GeoPoint& a = ring[i];
      const GeoPoint& b = ring[(i + 1) % n];
      double cross = (b.lat - a.lat) * (lng - a.lng) - (b.lng - a.lng) * (lat - a.lat);
      if (cross == 0.0 && lat >= std::min(a.lat, b.lat) && lat <= std::max(a.lat, b.lat) &&
          lng >= std::min(a.lng, b.lng) && lng <= std::max(a.lng, b.lng)) {
        return true;
      }
    }
    bool inside = false;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
      const GeoPoint& a = ring[i];
      const GeoPoint& b = ring[j];
      if ((a.lng > lng) != (b.lng > lng)) {
        double x = (b.lat - a.lat) * (lng - a.lng) / (b.lng - a.lng) + a.lat;
        if (lat < x) inside = !inside;
      }
    }
    return inside;
  }
};

namespace detail {

inline void skip_ws(std::string_view s, std::size_t& i) {
  while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
}

inline double parse_wkt_number(std::string_view s, std::size_t& i) {
  skip_ws(s, i);
  double v = 0;
  auto res = std::from_chars(s.data() + i, s.data() + s.size(), v);
  if (res.ec != std::errc{}) throw UdfError("malformed polygon: expected number in WKT");
  i = static_cast<std::size_t>(res.ptr - s.data());
  if (!std::isfinite(v)) throw UdfError("malformed polygon: non-finite coordinate");
  return v;
}

}  // namespace detail

/// Parses `POLYGON((a b, a b, ...))` with one outer ring and no holes.
inline Polygon parse_wkt_polygon(std::string_view text) {
  std::size_t i = 0;
  detail::skip_ws(text, i);
  constexpr std::string_view kTag = "POLYGON";
  if (text.substr(i, kTag.size()) != kTag) {
    throw UdfError("malformed polygon: expected POLYGON(( ... ))");
  }
  i += kTag.size();
  detail::skip_ws(text, i);
  if (i >= text.size() || text[i] != '(') throw UdfError("malformed polygon: missing '('");
  ++i;
  detail::skip_ws(text, i);
  if (i >= text.size() || text[i] != '(') throw UdfError("malformed polygon: missing ring '('");
  ++i;

  Polygon poly;
  while (true) {
    double a = detail::parse_wkt_number(text, i);
    double b = detail::parse_wkt_number(text, i);
    poly.ring.push_back({a, b});
    detail::skip_ws(text, i);
    if (i < text.size() && text[i] == ',') {
      ++i;
      continue;
    }
    break;
  }
  if (i >= text.size() || text[i] != ')') throw UdfError("malformed polygon: missing ring ')'");
  ++i;
  detail::skip_ws(text, i);
  if (i < text.size() && text[i] == ',') throw UdfError("malformed polygon: holes are not supported");
  if (i >= text.size() || text[i] != ')') throw UdfError("malformed polygon: missing ')'");
  ++i;
  detail::skip_ws(text, i);
  if (i != text.size()) throw UdfError("malformed polygon: trailing characters");

  // Drop an explicit closing point.
  if (poly.ring.size() >= 2 && poly.ring.front().lat == poly.ring.back().lat &&
      poly.ring.front().lng == poly.ring.back().lng) {
    poly.ring.pop_back();
  }
  if (poly.ring.size() < 3) throw UdfError("malformed polygon: ring needs at least 3 points");
  return poly;
}

inline double euclidean_distance(double ax, double ay, double bx, double by) {
  return std::hypot(ax - bx, ay - by);
}

}  // namespace dskip
