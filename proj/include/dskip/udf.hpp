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

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dskip/errors.hpp"
#include "dskip/expr.hpp"
#include "dskip/literal.hpp"
#include "dskip/unicode.hpp"
#include "dskip/wkt.hpp"

namespace dskip {

/// What a UDF argument slot accepts.
enum class UdfArgKind { TextLiteral, NumericLiteral, NumericColumn, TextColumn };

enum class UdfReturnKind { Boolean, Real, Text };

class UdfRegistry;

/// A row-level user-defined function. `eval` receives the resolved argument
/// values; any null argument short-circuits to a null result before `eval`
/// is called.
struct Udf {
  std::string name;
  std::vector<UdfArgKind> signature;
  UdfReturnKind return_kind = UdfReturnKind::Boolean;
  std::function<Literal(const UdfRegistry&, const std::vector<Literal>&)> eval;
};

/// Extractors used by the EXTRACT UDF and the Formatted index.
class ExtractorRegistry {
 public:
  void add(const std::string& name, std::function<std::string(const std::string&)> fn) {
    extractors_[name] = std::move(fn);
  }

  bool contains(const std::string& name) const { return extractors_.count(name) > 0; }

  std::string apply(const std::string& name, const std::string& value) const {
    auto it = extractors_.find(name);
    if (it == extractors_.end()) throw UdfError("unknown extractor: " + name);
    return it->second(value);
  }

 private:
  std::map<std::string, std::function<std::string(const std::string&)>> extractors_;
};

/// The agent name is the text before the first '/', whitespace-trimmed; the
/// whole (trimmed) string when there is no '/'.
inline std::string extract_agent_name(const std::string& user_agent) {
  std::string head = user_agent.substr(0, user_agent.find('/'));
  std::size_t b = head.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = head.find_last_not_of(" \t\r\n");
  return head.substr(b, e - b + 1);
}

class UdfRegistry {
 public:
  void add(Udf udf) { udfs_[udf.name] = std::move(udf); }

  const Udf* find(const std::string& name) const {
    auto it = udfs_.find(name);
    return it == udfs_.end() ? nullptr : &it->second;
  }

  ExtractorRegistry& extractors() { return extractors_; }
  const ExtractorRegistry& extractors() const { return extractors_; }

 private:
  std::map<std::string, Udf> udfs_;
  ExtractorRegistry extractors_;
};

/// Registry with the built-ins:
///   ST_CONTAINS('POLYGON((...))', latCol, lngCol) -> boolean
///   ST_DISTANCE(latCol, lngCol, qlat, qlng)       -> real
///   EXTRACT('extractorName', textCol)             -> text
///   ABS_DIST(numCol, origin)                      -> real
///   LEV_DIST(textCol, 'query')                    -> real
inline UdfRegistry make_default_udf_registry() {
  UdfRegistry reg;
  reg.extractors().add("agent_name", extract_agent_name);

  reg.add(Udf{
      "ST_CONTAINS",
      {UdfArgKind::TextLiteral, UdfArgKind::NumericColumn, UdfArgKind::NumericColumn},
      UdfReturnKind::Boolean,
      [](const UdfRegistry&, const std::vector<Literal>& args) {
        Polygon poly = parse_wkt_polygon(args[0].as_text());
        bool inside = poly.contains(static_cast<double>(args[1].numeric()),
                                    static_cast<double>(args[2].numeric()));
        return Literal(static_cast<std::int64_t>(inside ? 1 : 0));
      }});

  reg.add(Udf{
      "ST_DISTANCE",
      {UdfArgKind::NumericColumn, UdfArgKind::NumericColumn, UdfArgKind::NumericLiteral,
       UdfArgKind::NumericLiteral},
      UdfReturnKind::Real,
      [](const UdfRegistry&, const std::vector<Literal>& args) {
        return Literal(euclidean_distance(static_cast<double>(args[0].numeric()),
                                          static_cast<double>(args[1].numeric()),
                                          static_cast<double>(args[2].numeric()),
                                          static_cast<double>(args[3].numeric())));
      }});

  reg.add(Udf{
      "EXTRACT",
      {UdfArgKind::TextLiteral, UdfArgKind::TextColumn},
      UdfReturnKind::Text,
      [](const UdfRegistry& r, const std::vector<Literal>& args) {
        return Literal(r.extractors().apply(args[0].as_text(), args[1].as_text()));
      }});

  reg.add(Udf{
      "ABS_DIST",
      {UdfArgKind::NumericColumn, UdfArgKind::NumericLiteral},
      UdfReturnKind::Real,
      [](const UdfRegistry&, const std::vector<Literal>& args) {
        return Literal(std::abs(static_cast<double>(args[0].numeric() - args[1].numeric())));
      }});

  reg.add(Udf{
      "LEV_DIST",
      {UdfArgKind::TextColumn, UdfArgKind::TextLiteral},
      UdfReturnKind::Real,
      [](const UdfRegistry&, const std::vector<Literal>& args) {
        return Literal(static_cast<double>(levenshtein(args[0].as_text(), args[1].as_text())));
      }});

  return reg;
}

}  // namespace dskip
