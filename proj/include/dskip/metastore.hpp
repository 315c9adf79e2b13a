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

#include <sys/stat.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dskip/collect.hpp"
#include "dskip/csv.hpp"
#include "dskip/descriptor.hpp"
#include "dskip/errors.hpp"
#include "dskip/metadata.hpp"
#include "dskip/parallel.hpp"
#include "dskip/schema.hpp"
#include "dskip/udf.hpp"

namespace dskip {

// Canonical file-backed metadata store:
//   <root>/.skipmeta/manifest.json              descriptor list + versions
//   <root>/.skipmeta/index_<descriptorId>.jsonl one record per object, sorted
// Writers take an advisory lock file and publish via write-temp-then-rename;
// the manifest is written last so readers never see dangling references.

constexpr int kStoreFormatVersion = 1;

struct Manifest {
  int format_version = kStoreFormatVersion;
  std::string dataset_id;
  std::vector<IndexDescriptor> descriptors;
  std::int64_t created_at_ms = 0;
  std::int64_t updated_at_ms = 0;

  const IndexDescriptor* find(const std::string& id) const {
    for (const auto& d : descriptors) {
      if (d.id() == id) return &d;
    }
    return nullptr;
  }
};

/// One line of an index file.
struct MetadataRecord {
  std::string object_name;
  std::int64_t last_modified_ms = 0;
  std::int64_t size_bytes = 0;
  std::int64_t row_count = 0;
  std::map<std::string, MetadataPayload> payloads;  // descriptor id -> payload
};

/// Stale when the object changed (or vanished) since the record was written.
inline bool is_stale(const MetadataRecord& record, const ObjectDescriptor& obj) {
  return record.last_modified_ms != obj.last_modified_ms || record.size_bytes != obj.size_bytes;
}

namespace detail {

inline std::int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

inline std::int64_t file_mtime_ms(const std::filesystem::path& p) {
  struct ::stat st{};
  if (::stat(p.c_str(), &st) != 0) throw DatasetError("cannot stat: " + p.string());
  return static_cast<std::int64_t>(st.st_mtim.tv_sec) * 1000 +
         static_cast<std::int64_t>(st.st_mtim.tv_nsec) / 1000000;
}

inline std::string base64_encode(const std::vector<std::uint8_t>& data) {
  static const char* alphabet =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((data.size() + 2) / 3 * 4);
  for (std::size_t i = 0; i < data.size(); i += 3) {
    std::uint32_t chunk = static_cast<std::uint32_t>(data[i]) << 16;
    if (i + 1 < data.size()) chunk |= static_cast<std::uint32_t>(data[i + 1]) << 8;
    if (i + 2 < data.size()) chunk |= data[i + 2];
    out += alphabet[(chunk >> 18) & 63];
    out += alphabet[(chunk >> 12) & 63];
    out += (i + 1 < data.size()) ? alphabet[(chunk >> 6) & 63] : '=';
    out += (i + 2 < data.size()) ? alphabet[chunk & 63] : '=';
  }
  return out;
}

inline std::vector<std::uint8_t> base64_decode(const std::string& text) {
  auto value_of = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
  };
  std::vector<std::uint8_t> out;
  int acc = 0, bits = 0;
  for (char c : text) {
    if (c == '=') break;
    int v = value_of(c);
    if (v < 0) throw StoreCorruptionError("invalid base64 in bloom payload");
    acc = (acc << 6) | v;
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<std::uint8_t>((acc >> bits) & 0xff));
    }
  }
  return out;
}

inline nlohmann::json literal_to_json(const Literal& v) {
  if (v.is_null()) return nullptr;
  if (v.is_integer()) return v.as_integer();
  if (v.is_real()) return v.as_real();
  return v.as_text();
}

inline Literal literal_from_json(const nlohmann::json& j, ValueType type) {
  if (j.is_null()) return Literal();
  switch (type) {
    case ValueType::Integer:
      if (!j.is_number_integer()) throw StoreCorruptionError("expected integer literal");
      return Literal(j.get<std::int64_t>());
    case ValueType::Real:
      if (!j.is_number()) throw StoreCorruptionError("expected real literal");
      return Literal(j.get<double>());
    case ValueType::Text:
      if (!j.is_string()) throw StoreCorruptionError("expected text literal");
      return Literal(j.get<std::string>());
  }
  throw StoreCorruptionError("bad literal");
}

inline nlohmann::json payload_to_json(const MetadataPayload& payload) {
  nlohmann::json j;
  std::visit(
      [&j](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, MinMaxPayload>) {
          j["type"] = "minmax";
          j["absent"] = p.absent;
          j["hasNulls"] = p.has_nulls;
          j["min"] = p.absent ? nlohmann::json(nullptr) : literal_to_json(p.min);
          j["max"] = p.absent ? nlohmann::json(nullptr) : literal_to_json(p.max);
        } else if constexpr (std::is_same_v<T, GapListPayload>) {
          j["type"] = "gaplist";
          j["absent"] = p.absent;
          j["hasNulls"] = p.has_nulls;
          j["min"] = p.absent ? nlohmann::json(nullptr) : literal_to_json(p.min);
          j["max"] = p.absent ? nlohmann::json(nullptr) : literal_to_json(p.max);
          nlohmann::json gaps = nlohmann::json::array();
          for (const auto& [lo, hi] : p.gaps) {
            gaps.push_back({literal_to_json(lo), literal_to_json(hi)});
          }
          j["gaps"] = std::move(gaps);
        } else if constexpr (std::is_same_v<T, ValueListPayload>) {
          j["type"] = "valuelist";
          j["hasNulls"] = p.has_nulls;
          nlohmann::json values = nlohmann::json::array();
          for (const auto& v : p.values) values.push_back(literal_to_json(v));
          j["values"] = std::move(values);
        } else if constexpr (std::is_same_v<T, BloomPayload>) {
          j["type"] = "bloom";
          j["bits"] = base64_encode(p.bits);
          j["numBits"] = p.num_bits;
          j["numHashes"] = p.num_hashes;
          j["seed"] = p.seed;
        } else if constexpr (std::is_same_v<T, HybridPayload>) {
          j["type"] = "hybrid";
          if (const auto* vl = std::get_if<ValueListPayload>(&p.inner)) {
            j["variant"] = payload_to_json(*vl);
          } else {
            j["variant"] = payload_to_json(std::get<BloomPayload>(p.inner));
          }
        } else if constexpr (std::is_same_v<T, PrefixPayload>) {
          j["type"] = "prefix";
          j["length"] = p.length;
          j["entries"] = p.entries;
        } else if constexpr (std::is_same_v<T, SuffixPayload>) {
          j["type"] = "suffix";
          j["length"] = p.length;
          j["entries"] = p.entries;
        } else if constexpr (std::is_same_v<T, GeoBoxPayload>) {
          j["type"] = "geobox";
          j["hasNullRows"] = p.has_null_rows;
          nlohmann::json boxes = nlohmann::json::array();
          for (const auto& b : p.boxes) boxes.push_back({b.lat_lo, b.lat_hi, b.lng_lo, b.lng_hi});
          j["boxes"] = std::move(boxes);
        } else if constexpr (std::is_same_v<T, MetricDistPayload>) {
          j["type"] = "metricdist";
          j["absent"] = p.absent;
          j["metric"] = p.metric;
          j["origin"] = p.origin;
          j["dmin"] = p.absent ? nlohmann::json(nullptr) : nlohmann::json(p.dmin);
          j["dmax"] = p.absent ? nlohmann::json(nullptr) : nlohmann::json(p.dmax);
        } else {
          j["type"] = "formatted";
          j["extractor"] = p.extractor;
          j["values"] = p.values;
        }
      },
      payload);
  return j;
}

inline MetadataPayload payload_from_json(const nlohmann::json& j, const IndexDescriptor& d,
                                         ValueType column_type) {
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) {
    throw StoreCorruptionError("payload is not an object with a type tag");
  }
  const std::string tag = j["type"].get<std::string>();

  auto parse_valuelist = [&](const nlohmann::json& v) {
    ValueListPayload p;
    p.has_nulls = v.at("hasNulls").get<bool>();
    for (const auto& item : v.at("values")) {
      p.values.push_back(literal_from_json(item, column_type));
    }
    return p;
  };
  auto parse_bloom = [&](const nlohmann::json& v) {
    BloomPayload p;
    p.bits = base64_decode(v.at("bits").get<std::string>());
    p.num_bits = v.at("numBits").get<std::uint64_t>();
    p.num_hashes = v.at("numHashes").get<std::uint32_t>();
    p.seed = v.at("seed").get<std::uint64_t>();
    if (p.bits.size() != (p.num_bits + 7) / 8) {
      throw StoreCorruptionError("bloom bit array length mismatch");
    }
    return p;
  };

  try {
    if (tag == "minmax" && d.type == IndexType::MinMax) {
      MinMaxPayload p;
      p.absent = j.at("absent").get<bool>();
      p.has_nulls = j.at("hasNulls").get<bool>();
      if (!p.absent) {
        p.min = literal_from_json(j.at("min"), column_type);
        p.max = literal_from_json(j.at("max"), column_type);
      }
      return p;
    }
    if (tag == "gaplist" && d.type == IndexType::GapList) {
      GapListPayload p;
      p.absent = j.at("absent").get<bool>();
      p.has_nulls = j.at("hasNulls").get<bool>();
      if (!p.absent) {
        p.min = literal_from_json(j.at("min"), column_type);
        p.max = literal_from_json(j.at("max"), column_type);
      }
      for (const auto& g : j.at("gaps")) {
        if (!g.is_array() || g.size() != 2) throw StoreCorruptionError("bad gap entry");
        p.gaps.emplace_back(literal_from_json(g[0], column_type),
                            literal_from_json(g[1], column_type));
      }
      return p;
    }
    if (tag == "valuelist" && d.type == IndexType::ValueList) return parse_valuelist(j);
    if (tag == "bloom" && d.type == IndexType::Bloom) return parse_bloom(j);
    if (tag == "hybrid" && d.type == IndexType::Hybrid) {
      HybridPayload p;
      const auto& variant = j.at("variant");
      const std::string inner_tag = variant.at("type").get<std::string>();
      if (inner_tag == "valuelist") {
        p.inner = parse_valuelist(variant);
      } else if (inner_tag == "bloom") {
        p.inner = parse_bloom(variant);
      } else {
        throw StoreCorruptionError("hybrid variant must be valuelist or bloom");
      }
      return p;
    }
    if (tag == "prefix" && d.type == IndexType::Prefix) {
      PrefixPayload p;
      p.length = j.at("length").get<std::int64_t>();
      p.entries = j.at("entries").get<std::vector<std::string>>();
      return p;
    }
    if (tag == "suffix" && d.type == IndexType::Suffix) {
      SuffixPayload p;
      p.length = j.at("length").get<std::int64_t>();
      p.entries = j.at("entries").get<std::vector<std::string>>();
      return p;
    }
    if (tag == "geobox" && d.type == IndexType::GeoBox) {
      GeoBoxPayload p;
      p.has_null_rows = j.at("hasNullRows").get<bool>();
      for (const auto& b : j.at("boxes")) {
        if (!b.is_array() || b.size() != 4) throw StoreCorruptionError("bad geo box");
        p.boxes.push_back(BBox{b[0].get<double>(), b[1].get<double>(), b[2].get<double>(),
                               b[3].get<double>()});
      }
      return p;
    }
    if (tag == "metricdist" && d.type == IndexType::MetricDist) {
      MetricDistPayload p;
      p.absent = j.at("absent").get<bool>();
      p.metric = j.at("metric").get<std::string>();
      p.origin = j.at("origin").get<std::string>();
      if (!p.absent) {
        p.dmin = j.at("dmin").get<double>();
        p.dmax = j.at("dmax").get<double>();
      }
      return p;
    }
    if (tag == "formatted" && d.type == IndexType::Formatted) {
      FormattedPayload p;
      p.extractor = j.at("extractor").get<std::string>();
      p.values = j.at("values").get<std::vector<std::string>>();
      return p;
    }
  } catch (const nlohmann::json::exception& e) {
    throw StoreCorruptionError(std::string("malformed payload: ") + e.what());
  }
  throw StoreCorruptionError("payload type '" + tag + "' does not match descriptor " +
                             d.display());
}

inline nlohmann::json record_to_json(const MetadataRecord& r) {
  nlohmann::json payloads;
  for (const auto& [id, p] : r.payloads) payloads[id] = payload_to_json(p);
  return nlohmann::json{{"lastModifiedMs", r.last_modified_ms},
                        {"objectName", r.object_name},
                        {"payloads", std::move(payloads)},
                        {"rowCount", r.row_count},
                        {"sizeBytes", r.size_bytes}};
}

inline MetadataRecord record_from_json(const nlohmann::json& j, const IndexDescriptor& d,
                                       ValueType column_type) {
  try {
    MetadataRecord r;
    r.object_name = j.at("objectName").get<std::string>();
    r.last_modified_ms = j.at("lastModifiedMs").get<std::int64_t>();
    r.size_bytes = j.at("sizeBytes").get<std::int64_t>();
    r.row_count = j.at("rowCount").get<std::int64_t>();
    for (const auto& [id, payload] : j.at("payloads").items()) {
      if (id != d.id()) {
        throw StoreCorruptionError("record payload id '" + id + "' does not match index file");
      }
      r.payloads[id] = payload_from_json(payload, d, column_type);
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw StoreCorruptionError(std::string("malformed record: ") + e.what());
  }
}

inline std::filesystem::path skipmeta_dir(const std::filesystem::path& root) {
  return root / ".skipmeta";
}

inline std::filesystem::path manifest_path(const std::filesystem::path& root) {
  return skipmeta_dir(root) / "manifest.json";
}

inline std::filesystem::path index_path(const std::filesystem::path& root,
                                        const std::string& descriptor_id) {
  return skipmeta_dir(root) / ("index_" + descriptor_id + ".jsonl");
}

inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DatasetError("cannot write: " + tmp.string());
    out << content;
    if (!out.flush()) throw DatasetError("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

/// Advisory single-writer lock.
class StoreLock {
 public:
  explicit StoreLock(const std::filesystem::path& root) : path_(skipmeta_dir(root) / ".lock") {
    std::filesystem::create_directories(skipmeta_dir(root));
    std::FILE* f = std::fopen(path_.c_str(), "wx");
    if (!f) {
      throw DatasetError("another writer holds the index lock (" + path_.string() +
                         "); remove the file if no writer is running");
    }
    std::fclose(f);
  }
  ~StoreLock() {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }
  StoreLock(const StoreLock&) = delete;
  StoreLock& operator=(const StoreLock&) = delete;

 private:
  std::filesystem::path path_;
};

inline nlohmann::json manifest_to_json(const Manifest& m) {
  nlohmann::json descriptors = nlohmann::json::array();
  for (const auto& d : m.descriptors) {
    descriptors.push_back({{"columns", d.columns},
                           {"params", d.params},
                           {"type", std::string(to_string(d.type))}});
  }
  return nlohmann::json{{"createdAtMs", m.created_at_ms},
                        {"datasetId", m.dataset_id},
                        {"descriptors", std::move(descriptors)},
                        {"formatVersion", m.format_version},
                        {"updatedAtMs", m.updated_at_ms}};
}

inline Manifest manifest_from_json(const nlohmann::json& j) {
  try {
    Manifest m;
    m.format_version = j.at("formatVersion").get<int>();
    if (m.format_version != kStoreFormatVersion) {
      throw StoreCorruptionError("unsupported metadata formatVersion " +
                                 std::to_string(m.format_version));
    }
    m.dataset_id = j.at("datasetId").get<std::string>();
    m.created_at_ms = j.at("createdAtMs").get<std::int64_t>();
    m.updated_at_ms = j.at("updatedAtMs").get<std::int64_t>();
    for (const auto& dj : j.at("descriptors")) {
      IndexDescriptor d;
      auto type = index_type_from_string(dj.at("type").get<std::string>());
      if (!type) throw StoreCorruptionError("unknown index type in manifest");
      d.type = *type;
      d.columns = dj.at("columns").get<std::vector<std::string>>();
      d.params = dj.at("params").get<std::map<std::string, std::string>>();
      m.descriptors.push_back(std::move(d));
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw StoreCorruptionError(std::string("malformed manifest: ") + e.what());
  }
}

}  // namespace detail

/// Objects are *.csv files directly under the dataset root, in lexicographic
/// name order. Row counts are unknown until scanned or read from records.
inline std::vector<ObjectDescriptor> list_objects(const std::filesystem::path& root) {
  if (!std::filesystem::is_directory(root)) {
    throw DatasetError("dataset root does not exist: " + root.string());
  }
  std::vector<ObjectDescriptor> out;
  for (const auto& entry : std::filesystem::directory_iterator(root)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".csv") continue;
    ObjectDescriptor d;
    d.name = entry.path().filename().string();
    d.size_bytes = static_cast<std::int64_t>(entry.file_size());
    d.last_modified_ms = detail::file_mtime_ms(entry.path());
    out.push_back(std::move(d));
  }
  std::sort(out.begin(), out.end(),
            [](const ObjectDescriptor& a, const ObjectDescriptor& b) { return a.name < b.name; });
  return out;
}

inline std::optional<Manifest> load_manifest(const std::filesystem::path& root) {
  std::ifstream in(detail::manifest_path(root));
  if (!in) return std::nullopt;
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw StoreCorruptionError(std::string("malformed manifest: ") + e.what());
  }
  return detail::manifest_from_json(j);
}

struct IndexFileStats {
  std::int64_t records = 0;
  std::int64_t bytes = 0;
};

struct CreateIndexResult {
  Manifest manifest;
  std::map<std::string, IndexFileStats> per_descriptor;  // descriptor id -> stats
  std::int64_t objects_indexed = 0;
};

namespace detail {

inline ValueType descriptor_column_type(const IndexDescriptor& d, const Schema& schema) {
  auto idx = schema.index_of(d.columns[0]);
  if (!idx) throw DatasetError("descriptor " + d.display() + ": unknown column");
  return schema.at(*idx).type;
}

/// Serializes records (sorted by object name) into jsonl content.
inline std::string render_index_file(const std::vector<MetadataRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += record_to_json(r).dump();
    out += "\n";
  }
  return out;
}

inline std::vector<MetadataRecord> read_index_records(const std::filesystem::path& root,
                                                      const IndexDescriptor& d,
                                                      const Schema& schema,
                                                      std::int64_t* bytes_read = nullptr) {
  std::filesystem::path p = index_path(root, d.id());
  std::ifstream in(p, std::ios::binary);
  if (!in) throw StoreCorruptionError("missing index file: " + p.string());
  ValueType column_type = descriptor_column_type(d, schema);
  std::vector<MetadataRecord> out;
  std::string line;
  std::int64_t bytes = 0;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    bytes += static_cast<std::int64_t>(line.size()) + 1;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw StoreCorruptionError(p.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    out.push_back(record_from_json(j, d, column_type));
  }
  if (bytes_read) *bytes_read += bytes;
  return out;
}

}  // namespace detail

struct StoreOptions {
  int threads = 0;  // 0 = DSKIP_THREADS env or hardware parallelism
};

/// Index creation: phase 1 collects payloads per object per descriptor,
/// phase 2 serializes to the store layout. Re-running replaces indexes with
/// the same descriptor ids and keeps the rest.
inline CreateIndexResult create_index(const std::filesystem::path& root,
                                      const std::vector<IndexDescriptor>& descriptors,
                                      const UdfRegistry& udfs,
                                      const StoreOptions& options = {}) {
  if (descriptors.empty()) throw DatasetError("no index descriptors given");
  std::filesystem::path schema_file = root / "schema.json";
  if (!std::filesystem::exists(schema_file)) {
    throw DatasetError("schema missing: " + schema_file.string());
  }
  Schema schema = Schema::load(schema_file.string());
  for (const auto& d : descriptors) {
    validate_descriptor_against_schema(d, schema);
    if (d.type == IndexType::Formatted && !udfs.extractors().contains(d.params.at("extractor"))) {
      throw DatasetError("descriptor " + d.display() + ": unknown extractor");
    }
  }
  std::vector<ObjectDescriptor> objects = list_objects(root);
  if (objects.empty()) throw DatasetError("no objects in dataset: " + root.string());

  detail::StoreLock lock(root);

  // Phase 1: collect per object. Objects are processed in parallel; the
  // per-object slot layout keeps the output deterministic.
  std::vector<MetadataRecord> object_records(objects.size());
  parallel_for(objects.size(), resolve_threads(options.threads), [&](std::size_t i) {
    const ObjectDescriptor& obj = objects[i];
    std::vector<Row> rows = read_csv_rows((root / obj.name).string(), schema);
    MetadataRecord rec;
    rec.object_name = obj.name;
    rec.last_modified_ms = obj.last_modified_ms;
    rec.size_bytes = obj.size_bytes;
    rec.row_count = static_cast<std::int64_t>(rows.size());
    for (const auto& d : descriptors) {
      rec.payloads[d.id()] = collect_payload(d, schema, rows, udfs.extractors());
    }
    object_records[i] = std::move(rec);
  });

  // Phase 2: one file per descriptor, then the manifest last.
  CreateIndexResult result;
  for (const auto& d : descriptors) {
    const std::string id = d.id();
    std::vector<MetadataRecord> records;
    records.reserve(object_records.size());
    for (const auto& full : object_records) {
      MetadataRecord r;
      r.object_name = full.object_name;
      r.last_modified_ms = full.last_modified_ms;
      r.size_bytes = full.size_bytes;
      r.row_count = full.row_count;
      r.payloads[id] = full.payloads.at(id);
      records.push_back(std::move(r));
    }
    std::string content = detail::render_index_file(records);
    detail::atomic_write(detail::index_path(root, id), content);
    result.per_descriptor[id] = {static_cast<std::int64_t>(records.size()),
                                 static_cast<std::int64_t>(content.size())};
  }

  Manifest manifest;
  std::optional<Manifest> existing;
  try {
    existing = load_manifest(root);
  } catch (const StoreCorruptionError&) {
    existing = std::nullopt;  // replace an unreadable manifest
  }
  std::int64_t now = detail::now_ms();
  if (existing) {
    manifest = *existing;
    manifest.updated_at_ms = now;
    for (const auto& d : descriptors) {
      std::string id = d.id();
      bool replaced = false;
      for (auto& old : manifest.descriptors) {
        if (old.id() == id) {
          old = d;
          replaced = true;
          break;
        }
      }
      if (!replaced) manifest.descriptors.push_back(d);
    }
  } else {
    manifest.dataset_id = root.filename().string();
    manifest.created_at_ms = now;
    manifest.updated_at_ms = now;
    manifest.descriptors = descriptors;
  }
  detail::atomic_write(detail::manifest_path(root), detail::manifest_to_json(manifest).dump() + "\n");

  result.manifest = std::move(manifest);
  result.objects_indexed = static_cast<std::int64_t>(objects.size());
  return result;
}

/// Fresh per-object payloads for the needed descriptors. Stale records and
/// records for vanished objects contribute nothing; missing index files for
/// needed descriptors are an error only if the manifest claims they exist.
struct BundleSet {
  std::map<std::string, ObjectBundle> per_object;  // object name -> bundle
  std::int64_t metadata_bytes_read = 0;
};

inline BundleSet load_bundles(const std::filesystem::path& root, const Manifest& manifest,
                              const std::set<std::string>& needed_descriptor_ids,
                              const std::vector<ObjectDescriptor>& objects,
                              const Schema& schema) {
  BundleSet bundles;
  for (const auto& obj : objects) {
    bundles.per_object[obj.name].object = obj;
  }
  for (const std::string& id : needed_descriptor_ids) {
    const IndexDescriptor* d = manifest.find(id);
    if (!d) continue;  // never collected: those clauses evaluate to keep
    std::vector<MetadataRecord> records =
        detail::read_index_records(root, *d, schema, &bundles.metadata_bytes_read);
    for (auto& rec : records) {
      auto it = bundles.per_object.find(rec.object_name);
      if (it == bundles.per_object.end()) continue;  // object deleted since indexing
      if (is_stale(rec, it->second.object)) continue;  // stale: keep the object
      it->second.object.row_count = rec.row_count;
      auto node = rec.payloads.extract(id);
      if (!node.empty()) it->second.payloads.insert(std::move(node));
    }
  }
  return bundles;
}

struct RefreshResult {
  Manifest manifest;
  std::int64_t objects_recollected = 0;
  std::int64_t records_dropped = 0;
  std::int64_t objects_total = 0;
};

/// Re-collects only stale or new objects, drops records for deleted objects,
/// and leaves fresh records byte-identical.
inline RefreshResult refresh(const std::filesystem::path& root, const UdfRegistry& udfs,
                             const StoreOptions& options = {}) {
  auto manifest = load_manifest(root);
  if (!manifest) throw DatasetError("no manifest under " + root.string() + "; run index create");
  Schema schema = Schema::load((root / "schema.json").string());
  std::vector<ObjectDescriptor> objects = list_objects(root);

  detail::StoreLock lock(root);

  // Old records per descriptor, keyed by object.
  std::map<std::string, std::map<std::string, MetadataRecord>> old_records;
  for (const auto& d : manifest->descriptors) {
    auto records = detail::read_index_records(root, d, schema, nullptr);
    auto& by_name = old_records[d.id()];
    for (auto& r : records) by_name[r.object_name] = std::move(r);
  }

  // An object needs collection when any descriptor lacks a fresh record.
  std::vector<std::size_t> to_collect;
  for (std::size_t i = 0; i < objects.size(); ++i) {
    bool fresh_everywhere = true;
    for (const auto& d : manifest->descriptors) {
      const auto& by_name = old_records[d.id()];
      auto it = by_name.find(objects[i].name);
      if (it == by_name.end() || is_stale(it->second, objects[i])) {
        fresh_everywhere = false;
        break;
      }
    }
    if (!fresh_everywhere) to_collect.push_back(i);
  }

  std::map<std::string, MetadataRecord> collected;  // object name -> full record
  std::vector<MetadataRecord> slots(to_collect.size());
  parallel_for(to_collect.size(), resolve_threads(options.threads), [&](std::size_t k) {
    const ObjectDescriptor& obj = objects[to_collect[k]];
    std::vector<Row> rows = read_csv_rows((root / obj.name).string(), schema);
    MetadataRecord rec;
    rec.object_name = obj.name;
    rec.last_modified_ms = obj.last_modified_ms;
    rec.size_bytes = obj.size_bytes;
    rec.row_count = static_cast<std::int64_t>(rows.size());
    for (const auto& d : manifest->descriptors) {
      rec.payloads[d.id()] = collect_payload(d, schema, rows, udfs.extractors());
    }
    slots[k] = std::move(rec);
  });
  for (auto& rec : slots) collected[rec.object_name] = std::move(rec);

  RefreshResult result;
  result.objects_total = static_cast<std::int64_t>(objects.size());
  result.objects_recollected = static_cast<std::int64_t>(to_collect.size());

  std::set<std::string> current_names;
  for (const auto& o : objects) current_names.insert(o.name);
  std::set<std::string> dropped_names;

  for (const auto& d : manifest->descriptors) {
    const std::string id = d.id();
    std::vector<MetadataRecord> records;
    for (const auto& obj : objects) {
      auto hit = collected.find(obj.name);
      if (hit != collected.end()) {
        MetadataRecord r;
        r.object_name = hit->second.object_name;
        r.last_modified_ms = hit->second.last_modified_ms;
        r.size_bytes = hit->second.size_bytes;
        r.row_count = hit->second.row_count;
        r.payloads[id] = hit->second.payloads.at(id);
        records.push_back(std::move(r));
      } else {
        records.push_back(old_records[id].at(obj.name));
      }
    }
    for (const auto& [name, rec] : old_records[id]) {
      if (!current_names.count(name)) dropped_names.insert(name);
    }
    detail::atomic_write(detail::index_path(root, id), detail::render_index_file(records));
  }
  result.records_dropped = static_cast<std::int64_t>(dropped_names.size());

  manifest->updated_at_ms = detail::now_ms();
  detail::atomic_write(detail::manifest_path(root),
                       detail::manifest_to_json(*manifest).dump() + "\n");
  result.manifest = std::move(*manifest);
  return result;
}

}  // namespace dskip
