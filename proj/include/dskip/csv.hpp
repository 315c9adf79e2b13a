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
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dskip/errors.hpp"
#include "dskip/literal.hpp"
#include "dskip/schema.hpp"

namespace dskip {

// CSV objects: RFC-style quoting with '"' doubling, mandatory header row
// matching the schema, UTF-8. An unquoted empty field is null; a quoted
// empty field is the empty text string.

namespace detail {

struct CsvField {
  std::string text;
  bool quoted = false;
};

/// Splits a full CSV document into records of fields. Handles quoted commas
/// and newlines; tolerates CRLF.
inline std::vector<std::vector<CsvField>> parse_csv(std::string_view data,
                                                    const std::string& filename) {
  std::vector<std::vector<CsvField>> records;
  std::vector<CsvField> record;
  CsvField field;
  bool in_quotes = false;
  bool field_started = false;

  auto end_field = [&]() {
    record.push_back(std::move(field));
    field = CsvField{};
    field_started = false;
  };
  auto end_record = [&]() {
    end_field();
    records.push_back(std::move(record));
    record.clear();
  };

  for (std::size_t i = 0; i < data.size(); ++i) {
    char c = data[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < data.size() && data[i + 1] == '"') {
          field.text += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.text += c;
      }
      continue;
    }
    if (c == '"') {
      if (field_started && !field.text.empty()) {
        throw DatasetError(filename + ": stray quote inside unquoted field");
      }
      in_quotes = true;
      field.quoted = true;
      field_started = true;
      continue;
    }
    if (c == ',') {
      end_field();
      continue;
    }
    if (c == '\n') {
      if (!field.text.empty() && field.text.back() == '\r') field.text.pop_back();
      end_record();
      continue;
    }
    field.text += c;
    field_started = true;
  }
  if (in_quotes) throw DatasetError(filename + ": unterminated quoted field");
  if (field_started || !record.empty()) {
    if (!field.text.empty() && field.text.back() == '\r') field.text.pop_back();
    end_record();
  }
  return records;
}

inline Literal parse_csv_value(const CsvField& f, ValueType type, const std::string& filename,
                               std::size_t line) {
  if (f.text.empty() && !f.quoted) return Literal();  // null
  switch (type) {
    case ValueType::Text: return Literal(f.text);
    case ValueType::Integer: {
      std::int64_t v = 0;
      auto res = std::from_chars(f.text.data(), f.text.data() + f.text.size(), v);
      if (res.ec != std::errc{} || res.ptr != f.text.data() + f.text.size()) {
        throw DatasetError(filename + ":" + std::to_string(line) + ": bad integer '" + f.text + "'");
      }
      return Literal(v);
    }
    case ValueType::Real: {
      double v = 0;
      auto res = std::from_chars(f.text.data(), f.text.data() + f.text.size(), v);
      if (res.ec != std::errc{} || res.ptr != f.text.data() + f.text.size() || !std::isfinite(v)) {
        throw DatasetError(filename + ":" + std::to_string(line) + ": bad real '" + f.text + "'");
      }
      return Literal(v);
    }
  }
  return Literal();
}

inline std::string csv_escape(std::string_view s, bool force_quotes) {
  bool needs = force_quotes || s.find_first_of(",\"\n\r") != std::string_view::npos;
  if (!needs) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

inline std::string csv_format_value(const Literal& v) {
  if (v.is_null()) return "";
  if (v.is_integer()) return std::to_string(v.as_integer());
  if (v.is_real()) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v.as_real());
    return std::string(buf, res.ptr);
  }
  return csv_escape(v.as_text(), v.as_text().empty());
}

}  // namespace detail

/// Reads one CSV object, validating the header against the schema.
inline std::vector<Row> read_csv_rows(const std::string& path, const Schema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError("cannot open object: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string data = buf.str();

  auto records = detail::parse_csv(data, path);
  if (records.empty()) throw DatasetError(path + ": missing header row");
  const auto& header = records[0];
  if (header.size() != schema.size()) {
    throw DatasetError(path + ": header has " + std::to_string(header.size()) +
                       " columns, schema has " + std::to_string(schema.size()));
  }
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i].text != schema.at(i).name) {
      throw DatasetError(path + ": header column '" + header[i].text + "' does not match schema '" +
                         schema.at(i).name + "'");
    }
  }

  std::vector<Row> rows;
  rows.reserve(records.size() - 1);
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != schema.size()) {
      throw DatasetError(path + ":" + std::to_string(r + 1) + ": expected " +
                         std::to_string(schema.size()) + " fields, got " +
                         std::to_string(records[r].size()));
    }
    Row row;
    row.values.reserve(schema.size());
    for (std::size_t c = 0; c < schema.size(); ++c) {
      row.values.push_back(detail::parse_csv_value(records[r][c], schema.at(c).type, path, r + 1));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline void write_csv_rows(const std::string& path, const Schema& schema,
                           const std::vector<Row>& rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DatasetError("cannot write object: " + path);
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (i) out << ",";
    out << detail::csv_escape(schema.at(i).name, false);
  }
  out << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < schema.size(); ++i) {
      if (i) out << ",";
      out << detail::csv_format_value(row.values.at(i));
    }
    out << "\n";
  }
  if (!out) throw DatasetError("write failed: " + path);
}

}  // namespace dskip
