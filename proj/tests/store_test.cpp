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
#include <gtest/gtest.h>

#include <fstream>

#include "dskip/csv.hpp"
#include "dskip/metastore.hpp"
#include "support/fuzz.hpp"
#include "support/testutil.hpp"

namespace dskip {
namespace {

TEST(Csv, RoundTripWithQuotingAndNulls) {
  test::TempDir dir("csv");
  Schema schema({{"n", ValueType::Integer}, {"x", ValueType::Real}, {"t", ValueType::Text}});

  std::vector<Row> rows;
  auto add = [&rows](Literal a, Literal b, Literal c) {
    Row r;
    r.values = {std::move(a), std::move(b), std::move(c)};
    rows.push_back(std::move(r));
  };
  add(Literal(std::int64_t{1}), Literal(0.5), Literal("plain"));
  add(Literal(), Literal(), Literal());                          // all nulls
  add(Literal(std::int64_t{-3}), Literal(1e-9), Literal(""));    // empty text, not null
  add(Literal(std::int64_t{7}), Literal(2.0), Literal("a,b\"c\nd"));

  std::string path = (dir.path() / "obj.csv").string();
  write_csv_rows(path, schema, rows);
  std::vector<Row> back = read_csv_rows(path, schema);

  ASSERT_EQ(back.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    ASSERT_EQ(back[i].values.size(), rows[i].values.size());
    for (std::size_t c = 0; c < rows[i].values.size(); ++c) {
      EXPECT_TRUE(back[i].values[c] == rows[i].values[c]) << i << "," << c;
    }
  }
}

TEST(Csv, HeaderAndValueErrors) {
  test::TempDir dir("csv_err");
  Schema schema({{"a", ValueType::Integer}, {"b", ValueType::Text}});

  auto write_raw = [&](const char* name, const std::string& content) {
    std::ofstream out(dir.path() / name, std::ios::binary);
    out << content;
    return (dir.path() / name).string();
  };

  EXPECT_THROW(read_csv_rows(write_raw("wrong_header.csv", "a,c\n1,x\n"), schema), DatasetError);
  EXPECT_THROW(read_csv_rows(write_raw("too_few.csv", "a,b\n1\n"), schema), DatasetError);
  EXPECT_THROW(read_csv_rows(write_raw("bad_int.csv", "a,b\nzz,x\n"), schema), DatasetError);
  EXPECT_THROW(read_csv_rows(write_raw("unterminated.csv", "a,b\n1,\"x\n"), schema), DatasetError);
  EXPECT_THROW(read_csv_rows(write_raw("empty.csv", ""), schema), DatasetError);
  EXPECT_THROW(read_csv_rows((dir.path() / "missing.csv").string(), schema), DatasetError);

  try {
    read_csv_rows(write_raw("named.csv", "a,c\n"), schema);
    FAIL();
  } catch (const DatasetError& e) {
    EXPECT_NE(std::string(e.what()).find("named.csv"), std::string::npos);
  }

  Schema real_schema({{"a", ValueType::Real}});
  EXPECT_THROW(read_csv_rows(write_raw("inf.csv", "a\ninf\n"), real_schema), DatasetError);
}

TEST(Store, CreateIndexBasics) {
  test::TempDir dir("create");
  test::weather_micro_dataset(dir.path());
  UdfRegistry udfs = make_default_udf_registry();

  auto result = create_index(dir.path(), {parse_descriptor("minmax:temp")}, udfs);
  EXPECT_EQ(result.objects_indexed, 2);
  ASSERT_EQ(result.per_descriptor.size(), 1u);
  EXPECT_EQ(result.per_descriptor.at("minmax.temp").records, 2);

  auto manifest = load_manifest(dir.path());
  ASSERT_TRUE(manifest.has_value());
  EXPECT_EQ(manifest->format_version, 1);
  EXPECT_EQ(manifest->dataset_id, dir.path().filename().string());
  ASSERT_EQ(manifest->descriptors.size(), 1u);

  // No temp files remain and the manifest references only existing files.
  for (const auto& entry : std::filesystem::directory_iterator(dir.path() / ".skipmeta")) {
    EXPECT_NE(entry.path().extension(), ".tmp");
  }
  EXPECT_TRUE(std::filesystem::exists(dir.path() / ".skipmeta" / "index_minmax.temp.jsonl"));
}

TEST(Store, EmptyDatasetAndMissingSchemaFail) {
  UdfRegistry udfs = make_default_udf_registry();
  {
    test::TempDir dir("empty");
    Schema schema({{"temp", ValueType::Real}});
    std::filesystem::create_directories(dir.path());
    schema.save((dir.path() / "schema.json").string());
    EXPECT_THROW(create_index(dir.path(), {parse_descriptor("minmax:temp")}, udfs), DatasetError);
  }
  {
    test::TempDir dir("noschema");
    std::filesystem::create_directories(dir.path());
    EXPECT_THROW(create_index(dir.path(), {parse_descriptor("minmax:temp")}, udfs), DatasetError);
  }
  {
    test::TempDir dir("nocol");
    test::weather_micro_dataset(dir.path());
    EXPECT_THROW(create_index(dir.path(), {parse_descriptor("minmax:nosuch")}, udfs),
                 DatasetError);
  }
}

TEST(Store, RerunIsByteIdentical) {
  test::TempDir dir("determinism");
  test::weather_micro_dataset(dir.path());
  UdfRegistry udfs = make_default_udf_registry();

  std::vector<IndexDescriptor> ds = {parse_descriptor("minmax:temp"),
                                     parse_descriptor("bloom:city:f=0.01"),
                                     parse_descriptor("valuelist:city")};
  create_index(dir.path(), ds, udfs);
  std::map<std::string, std::string> first;
  for (const auto& d : ds) {
    auto p = dir.path() / ".skipmeta" / ("index_" + d.id() + ".jsonl");
    first[d.id()] = test::read_file(p);
    EXPECT_FALSE(first[d.id()].empty());
  }
  create_index(dir.path(), ds, udfs);
  for (const auto& d : ds) {
    auto p = dir.path() / ".skipmeta" / ("index_" + d.id() + ".jsonl");
    EXPECT_EQ(first[d.id()], test::read_file(p)) << d.id();
  }
}

TEST(Store, SerializeDeserializeIsByteIdentical) {
  test::TempDir dir("roundtrip");
  Schema s = test::fuzz_schema();
  test::Rng rng(99177);
  std::vector<std::pair<std::string, std::vector<Row>>> objects;
  auto rows = test::fuzz_objects(rng, s);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "obj_%04zu.csv", i);
    objects.emplace_back(name, rows[i]);
  }
  test::write_dataset(dir.path(), s, objects);

  UdfRegistry udfs = make_default_udf_registry();
  std::vector<IndexDescriptor> ds;
  for (const auto& text : test::fuzz_descriptor_menu()) ds.push_back(parse_descriptor(text));
  create_index(dir.path(), ds, udfs);

  int lines = 0;
  for (const auto& d : ds) {
    ValueType column_type = detail::descriptor_column_type(d, s);
    std::ifstream in(dir.path() / ".skipmeta" / ("index_" + d.id() + ".jsonl"));
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      MetadataRecord rec = detail::record_from_json(nlohmann::json::parse(line), d, column_type);
      EXPECT_EQ(detail::record_to_json(rec).dump(), line) << d.id();
      ++lines;
    }
  }
  EXPECT_GT(lines, 0);
}

TEST(Store, LoadBundlesReadsOnlyNeededFiles) {
  test::TempDir dir("load");
  Schema schema = test::weather_micro_dataset(dir.path());
  UdfRegistry udfs = make_default_udf_registry();
  create_index(dir.path(),
               {parse_descriptor("minmax:temp"), parse_descriptor("bloom:city:f=0.01")}, udfs);

  auto manifest = load_manifest(dir.path());
  auto objects = list_objects(dir.path());
  auto minmax_size = static_cast<std::int64_t>(
      std::filesystem::file_size(dir.path() / ".skipmeta" / "index_minmax.temp.jsonl"));

  BundleSet bundles = load_bundles(dir.path(), *manifest, {"minmax.temp"}, objects, schema);
  EXPECT_EQ(bundles.metadata_bytes_read, minmax_size);
  ASSERT_EQ(bundles.per_object.size(), 2u);
  EXPECT_EQ(bundles.per_object.at("o1.csv").payloads.size(), 1u);
  EXPECT_TRUE(std::holds_alternative<MinMaxPayload>(
      bundles.per_object.at("o1.csv").payloads.at("minmax.temp")));
  EXPECT_TRUE(bundles.per_object.at("o1.csv").object.row_count.has_value());

  // A descriptor the manifest does not know contributes nothing.
  BundleSet none = load_bundles(dir.path(), *manifest, {"minmax.nosuch"}, objects, schema);
  EXPECT_EQ(none.metadata_bytes_read, 0);
  EXPECT_TRUE(none.per_object.at("o1.csv").payloads.empty());
}

TEST(Store, CorruptRecordsAndBadManifests) {
  test::TempDir dir("corrupt");
  Schema schema = test::weather_micro_dataset(dir.path());
  UdfRegistry udfs = make_default_udf_registry();
  create_index(dir.path(), {parse_descriptor("minmax:temp")}, udfs);
  auto manifest = load_manifest(dir.path());
  auto objects = list_objects(dir.path());

  auto index_file = dir.path() / ".skipmeta" / "index_minmax.temp.jsonl";

  {
    std::ofstream out(index_file, std::ios::trunc);
    out << "this is not json\n";
  }
  EXPECT_THROW(load_bundles(dir.path(), *manifest, {"minmax.temp"}, objects, schema),
               StoreCorruptionError);

  // Type-mismatched payload: a valuelist payload in the minmax index file.
  {
    std::ofstream out(index_file, std::ios::trunc);
    out << R"({"lastModifiedMs":1,"objectName":"o1.csv","payloads":{"minmax.temp":{"hasNulls":false,"type":"valuelist","values":[]}},"rowCount":2,"sizeBytes":10})"
        << "\n";
  }
  EXPECT_THROW(load_bundles(dir.path(), *manifest, {"minmax.temp"}, objects, schema),
               StoreCorruptionError);

  {
    std::ofstream out(dir.path() / ".skipmeta" / "manifest.json", std::ios::trunc);
    out << R"({"createdAtMs":0,"datasetId":"x","descriptors":[],"formatVersion":99,"updatedAtMs":0})";
  }
  EXPECT_THROW(load_manifest(dir.path()), StoreCorruptionError);
}

TEST(Store, StalenessDetection) {
  MetadataRecord rec;
  rec.object_name = "o1.csv";
  rec.last_modified_ms = 1000;
  rec.size_bytes = 64;

  ObjectDescriptor same{"o1.csv", 64, 1000, std::nullopt};
  EXPECT_FALSE(is_stale(rec, same));

  ObjectDescriptor newer{"o1.csv", 64, 2000, std::nullopt};
  EXPECT_TRUE(is_stale(rec, newer));

  // Inequality, not ordering: an older-looking object is stale too.
  ObjectDescriptor older{"o1.csv", 64, 500, std::nullopt};
  EXPECT_TRUE(is_stale(rec, older));

  ObjectDescriptor resized{"o1.csv", 65, 1000, std::nullopt};
  EXPECT_TRUE(is_stale(rec, resized));
}

TEST(Store, StaleRecordsAreNotServed) {
  test::TempDir dir("stale");
  Schema schema = test::weather_micro_dataset(dir.path());
  UdfRegistry udfs = make_default_udf_registry();
  create_index(dir.path(), {parse_descriptor("minmax:temp")}, udfs);

  test::bump_mtime(dir.path() / "o2.csv");
  auto manifest = load_manifest(dir.path());
  auto objects = list_objects(dir.path());
  BundleSet bundles = load_bundles(dir.path(), *manifest, {"minmax.temp"}, objects, schema);
  EXPECT_EQ(bundles.per_object.at("o1.csv").payloads.size(), 1u);
  EXPECT_TRUE(bundles.per_object.at("o2.csv").payloads.empty());
}

TEST(Store, RefreshRecollectsOnlyStaleObjects) {
  test::TempDir dir("refresh");
  Schema schema({{"temp", ValueType::Real}});
  std::vector<std::pair<std::string, std::vector<Row>>> objects;
  for (int i = 0; i < 10; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "obj_%04d.csv", i);
    Row r;
    r.values = {Literal(static_cast<double>(i))};
    objects.emplace_back(name, std::vector<Row>{r});
  }
  test::write_dataset(dir.path(), schema, objects);
  UdfRegistry udfs = make_default_udf_registry();
  create_index(dir.path(), {parse_descriptor("minmax:temp")}, udfs);

  auto index_file = dir.path() / ".skipmeta" / "index_minmax.temp.jsonl";
  std::string before = test::read_file(index_file);

  // Nothing changed: zero recollected, byte-identical output.
  auto r0 = refresh(dir.path(), udfs);
  EXPECT_EQ(r0.objects_recollected, 0);
  EXPECT_EQ(r0.records_dropped, 0);
  EXPECT_EQ(test::read_file(index_file), before);

  // Overwrite one object: exactly one record re-collected.
  {
    Row r;
    r.values = {Literal(99.5)};
    write_csv_rows((dir.path() / "obj_0003.csv").string(), schema, {r});
    test::bump_mtime(dir.path() / "obj_0003.csv");
  }
  auto r1 = refresh(dir.path(), udfs);
  EXPECT_EQ(r1.objects_recollected, 1);

  // Delete one object: its record disappears.
  std::filesystem::remove(dir.path() / "obj_0007.csv");
  auto r2 = refresh(dir.path(), udfs);
  EXPECT_EQ(r2.records_dropped, 1);
  EXPECT_EQ(test::read_file(index_file).find("obj_0007.csv"), std::string::npos);

  // Add a new object: it is collected by refresh.
  {
    Row r;
    r.values = {Literal(123.0)};
    write_csv_rows((dir.path() / "obj_0099.csv").string(), schema, {r});
  }
  auto r3 = refresh(dir.path(), udfs);
  EXPECT_EQ(r3.objects_recollected, 1);
  EXPECT_NE(test::read_file(index_file).find("obj_0099.csv"), std::string::npos);

  EXPECT_THROW(refresh("/nonexistent/dataset", udfs), DatasetError);
}

TEST(Store, WriterLockBlocksSecondWriter) {
  test::TempDir dir("lock");
  test::weather_micro_dataset(dir.path());
  UdfRegistry udfs = make_default_udf_registry();

  std::filesystem::create_directories(dir.path() / ".skipmeta");
  {
    std::ofstream lock(dir.path() / ".skipmeta" / ".lock");
  }
  EXPECT_THROW(create_index(dir.path(), {parse_descriptor("minmax:temp")}, udfs), DatasetError);
  std::filesystem::remove(dir.path() / ".skipmeta" / ".lock");
  EXPECT_NO_THROW(create_index(dir.path(), {parse_descriptor("minmax:temp")}, udfs));
}

TEST(Store, CreateMergesDescriptorsIntoManifest) {
  test::TempDir dir("merge");
  test::weather_micro_dataset(dir.path());
  UdfRegistry udfs = make_default_udf_registry();

  create_index(dir.path(), {parse_descriptor("minmax:temp")}, udfs);
  create_index(dir.path(), {parse_descriptor("valuelist:city")}, udfs);
  auto manifest = load_manifest(dir.path());
  ASSERT_TRUE(manifest.has_value());
  EXPECT_EQ(manifest->descriptors.size(), 2u);
  EXPECT_NE(manifest->find("minmax.temp"), nullptr);
  EXPECT_NE(manifest->find("valuelist.city"), nullptr);
}

}  // namespace
}  // namespace dskip
