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

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dskip/errors.hpp"
#include "dskip/literal.hpp"

namespace dskip {

struct Column {
  std::string name;
  ValueType type;
};

/// Ordered dataset schema; column names are unique.
class Schema {
 public:
  Schema() = default;
  explicit Schema(std::vector<Column> columns) : columns_(std::move(columns)) {
    for (std::size_t i = 0; i < columns_.size(); ++i) {
      for (std::size_t j = i + 1; j < columns_.size(); ++j) {
        if (columns_[i].name == columns_[j].name) {
          throw DatasetError("duplicate column name in schema: " + columns_[i].name);
        }
      }
    }
  }

  const std::vector<Column>& columns() const { return columns_; }
  std::size_t size() const { return columns_.size(); }

  std::optional<std::size_t> index_of(const std::string& name) const {
    for (std::size_t i = 0; i < columns_.size(); ++i) {
      if (columns_[i].name == name) return i;
    }
    return std::nullopt;
  }

  const Column& at(std::size_t i) const { return columns_.at(i); }

  nlohmann::json to_json() const {
    nlohmann::json cols = nlohmann::json::array();
    for (const auto& c : columns_) {
      cols.push_back({{"name", c.name}, {"type", to_string(c.type)}});
    }
    return nlohmann::json{{"columns", cols}};
  }

  static Schema from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("columns") || !j["columns"].is_array()) {
      throw DatasetError("schema.json: expected {\"columns\": [...]}");
    }
    std::vector<Column> cols;
    for (const auto& c : j["columns"]) {
      if (!c.contains("name") || !c.contains("type")) {
        throw DatasetError("schema.json: column entries need name and type");
      }
      auto t = value_type_from_string(c["type"].get<std::string>());
      if (!t) throw DatasetError("schema.json: unknown type " + c["type"].get<std::string>());
      cols.push_back({c["name"].get<std::string>(), *t});
    }
    return Schema(std::move(cols));
  }

  static Schema load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DatasetError("cannot open schema file: " + path);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw DatasetError("invalid schema file " + path + ": " + e.what());
    }
    return from_json(j);
  }

  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DatasetError("cannot write schema file: " + path);
    out << to_json().dump() << "\n";
  }

 private:
  std::vector<Column> columns_;
};

/// One row of a dataset: values aligned with the schema column order.
struct Row {
  std::vector<Literal> values;
};

}  // namespace dskip
