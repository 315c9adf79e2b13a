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

#include <algorithm>
#include <set>

#include "dskip/bloom.hpp"
#include "dskip/builtin_filters.hpp"
#include "dskip/clause_eval.hpp"
#include "dskip/collect.hpp"
#include "dskip/eval.hpp"
#include "dskip/merge.hpp"
#include "dskip/parser.hpp"
#include "support/fuzz.hpp"
#include "support/testutil.hpp"

namespace dskip {
namespace {

std::vector<Literal> ints(std::initializer_list<std::int64_t> values) {
  std::vector<Literal> out;
  for (auto v : values) out.push_back(Literal(v));
  return out;
}

std::vector<Literal> texts(std::initializer_list<const char*> values) {
  std::vector<Literal> out;
  for (auto v : values) out.push_back(Literal(v));
  return out;
}

TEST(MinMax, Basics) {
  auto p = collect_minmax(ints({90, 95, 100}));
  EXPECT_FALSE(p.absent);
  EXPECT_EQ(p.min.as_integer(), 90);
  EXPECT_EQ(p.max.as_integer(), 100);
  EXPECT_FALSE(p.has_nulls);

  auto single = collect_minmax(ints({42}));
  EXPECT_EQ(single.min.as_integer(), 42);
  EXPECT_EQ(single.max.as_integer(), 42);

  std::vector<Literal> nulls = {Literal(), Literal()};
  auto absent = collect_minmax(nulls);
  EXPECT_TRUE(absent.absent);
  EXPECT_TRUE(absent.has_nulls);

  auto text = collect_minmax(texts({"beta", "alpha"}));
  EXPECT_EQ(text.min.as_text(), "alpha");
  EXPECT_EQ(text.max.as_text(), "beta");
}

// Independent oracle: enumerate every interior gap, sort by (width desc,
// left endpoint asc), take k, then re-sort by position.
std::vector<std::pair<std::int64_t, std::int64_t>> gap_oracle(std::vector<std::int64_t> values,
                                                              std::size_t k) {
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  std::vector<std::pair<std::int64_t, std::int64_t>> gaps;
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    if (values[i + 1] - values[i] > 1) gaps.emplace_back(values[i], values[i + 1]);
  }
  std::sort(gaps.begin(), gaps.end(), [](const auto& a, const auto& b) {
    auto wa = a.second - a.first, wb = b.second - b.first;
    if (wa != wb) return wa > wb;
    return a.first < b.first;
  });
  if (gaps.size() > k) gaps.resize(k);
  std::sort(gaps.begin(), gaps.end());
  return gaps;
}

TEST(GapList, KnownExamplesAgainstOracle) {
  auto p = collect_gaplist(ints({1, 2, 3, 10, 11, 20}), ValueType::Integer, 2);
  EXPECT_EQ(p.min.as_integer(), 1);
  EXPECT_EQ(p.max.as_integer(), 20);
  ASSERT_EQ(p.gaps.size(), 2u);
  EXPECT_EQ(p.gaps[0].first.as_integer(), 3);
  EXPECT_EQ(p.gaps[0].second.as_integer(), 10);
  EXPECT_EQ(p.gaps[1].first.as_integer(), 11);
  EXPECT_EQ(p.gaps[1].second.as_integer(), 20);
  EXPECT_EQ(gap_oracle({1, 2, 3, 10, 11, 20}, 2),
            (std::vector<std::pair<std::int64_t, std::int64_t>>{{3, 10}, {11, 20}}));

  // Consecutive integers leave no room for an integer inside the open gap.
  EXPECT_TRUE(collect_gaplist(ints({1, 2, 3}), ValueType::Integer, 2).gaps.empty());

  auto two = collect_gaplist(ints({0, 100}), ValueType::Integer, 1);
  ASSERT_EQ(two.gaps.size(), 1u);
  EXPECT_EQ(two.gaps[0].first.as_integer(), 0);
  EXPECT_EQ(two.gaps[0].second.as_integer(), 100);
}

TEST(GapList, RandomAgainstOracle) {
  test::Rng rng(555);
  for (int iter = 0; iter < 300; ++iter) {
    std::vector<std::int64_t> raw;
    int n = static_cast<int>(rng.range(0, 24));
    for (int i = 0; i < n; ++i) raw.push_back(rng.range(-40, 40));
    std::size_t k = static_cast<std::size_t>(rng.range(1, 5));

    std::vector<Literal> lits;
    for (auto v : raw) lits.push_back(Literal(v));
    auto p = collect_gaplist(lits, ValueType::Integer, static_cast<std::int64_t>(k));
    auto expected = gap_oracle(raw, k);

    ASSERT_EQ(p.gaps.size(), expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
      EXPECT_EQ(p.gaps[i].first.as_integer(), expected[i].first);
      EXPECT_EQ(p.gaps[i].second.as_integer(), expected[i].second);
    }
    if (raw.empty()) {
      EXPECT_TRUE(p.absent);
    }
  }
}

TEST(GapList, RealColumnsUseAnyPositiveWidth) {
  std::vector<Literal> vals = {Literal(1.0), Literal(2.0), Literal(3.5)};
  auto p = collect_gaplist(vals, ValueType::Real, 2);
  ASSERT_EQ(p.gaps.size(), 2u);  // (2,3.5) wider than (1,2)
  EXPECT_EQ(p.gaps[0].first.as_real(), 1.0);
  EXPECT_EQ(p.gaps[1].second.as_real(), 3.5);
}

TEST(ValueList, SortedDistinct) {
  auto p = collect_valuelist(texts({"b", "a", "a"}));
  ASSERT_EQ(p.values.size(), 2u);
  EXPECT_EQ(p.values[0].as_text(), "a");
  EXPECT_EQ(p.values[1].as_text(), "b");

  EXPECT_TRUE(collect_valuelist({}).values.empty());

  auto dup = collect_valuelist(ints({7, 7, 7}));
  ASSERT_EQ(dup.values.size(), 1u);
  EXPECT_EQ(dup.values[0].as_integer(), 7);
}

TEST(Bloom, SizingMatchesFormula) {
  EXPECT_EQ(bloom_num_bits(10000, 0.01), 95851u);
  EXPECT_EQ(bloom_num_hashes(95851, 10000), 7u);
  EXPECT_EQ(bloom_num_bits(1, 0.5), 2u);
  EXPECT_EQ(bloom_num_hashes(2, 1), 1u);
  EXPECT_EQ(bloom_num_bits(0, 0.01), 0u);
}

TEST(Bloom, NoFalseNegativesAndBoundedFalsePositives) {
  test::Rng rng(777);
  std::vector<Literal> members;
  std::set<std::int64_t> member_set;
  for (int i = 0; i < 2000; ++i) {
    std::int64_t v = rng.range(0, 1000000);
    members.push_back(Literal(v));
    member_set.insert(v);
  }
  auto bloom = collect_bloom(members, ValueType::Integer, 0.01);
  for (const auto& m : members) {
    auto key = encode_canonical(m, ValueType::Integer);
    EXPECT_TRUE(bloom_might_contain(bloom, *key));
  }
  int fp = 0, probes = 0;
  while (probes < 20000) {
    std::int64_t v = rng.range(1000001, 10000000);
    auto key = encode_canonical(Literal(v), ValueType::Integer);
    if (bloom_might_contain(bloom, *key)) ++fp;
    ++probes;
  }
  EXPECT_LE(static_cast<double>(fp) / probes, 0.02);  // 2f
}

TEST(Bloom, EmptyColumnSkipsEverything) {
  auto bloom = collect_bloom({}, ValueType::Integer, 0.01);
  auto key = encode_canonical(Literal(std::int64_t{5}), ValueType::Integer);
  EXPECT_FALSE(bloom_might_contain(bloom, *key));
}

TEST(Hybrid, VariantSelectionIsThresholded) {
  std::vector<Literal> low, high;
  for (int i = 0; i < 500; ++i) low.push_back(Literal(static_cast<std::int64_t>(i)));
  for (int i = 0; i < 20000; ++i) high.push_back(Literal(static_cast<std::int64_t>(i)));

  auto low_payload = collect_hybrid(low, ValueType::Integer, 10000, 0.01);
  EXPECT_TRUE(std::holds_alternative<ValueListPayload>(low_payload.inner));
  auto high_payload = collect_hybrid(high, ValueType::Integer, 10000, 0.01);
  EXPECT_TRUE(std::holds_alternative<BloomPayload>(high_payload.inner));

  // Exactly at the threshold stays a value list.
  std::vector<Literal> exact;
  for (int i = 0; i < 16; ++i) exact.push_back(Literal(static_cast<std::int64_t>(i)));
  EXPECT_TRUE(std::holds_alternative<ValueListPayload>(
      collect_hybrid(exact, ValueType::Integer, 16, 0.01).inner));
  EXPECT_TRUE(std::holds_alternative<BloomPayload>(
      collect_hybrid(exact, ValueType::Integer, 15, 0.01).inner));

  // The CLI default threshold is 10000.
  auto d = parse_descriptor("hybrid:c");
  EXPECT_EQ(d.params.at("threshold"), "10000");
  EXPECT_EQ(d.params.at("f"), "0.01");
}

TEST(Hybrid, ThresholdFormula) {
  EXPECT_EQ(hybrid_threshold(64000000, 512, 0.01, 0.01), 10088);
  EXPECT_EQ(hybrid_threshold(64000000, 512, 0.01, 0.99), 101);
  // Larger f admits longer value lists (monotone in f near these inputs).
  EXPECT_GT(hybrid_threshold(64000000, 512, 0.5, 0.01),
            hybrid_threshold(64000000, 512, 0.01, 0.01));
  // When the bloom bits per value exceed the value size, a value list always
  // wins and there is no finite threshold.
  EXPECT_THROW(hybrid_threshold(64000000, 5, 0.01, 0.01), DatasetError);
  EXPECT_THROW(hybrid_threshold(0, 512, 0.01, 0.01), DatasetError);
}

TEST(PrefixSuffix, Truncation) {
  auto p = collect_prefix(texts({"alpha", "alps", "beta"}), 3);
  EXPECT_EQ(p.entries, (std::vector<std::string>{"alp", "bet"}));

  auto whole = collect_prefix(texts({"ab"}), 5);
  EXPECT_EQ(whole.entries, (std::vector<std::string>{"ab"}));

  auto s = collect_suffix(texts({"alpha", "beta"}), 2);
  EXPECT_EQ(s.entries, (std::vector<std::string>{"ha", "ta"}));

  // Unicode scalars, not bytes.
  auto uni = collect_prefix(texts({"\xC3\xA9\xC3\xA9x"}), 2);
  EXPECT_EQ(uni.entries, (std::vector<std::string>{"\xC3\xA9\xC3\xA9"}));
}

TEST(GeoBox, SplitAndCoverage) {
  std::vector<Literal> lat1 = {Literal(1.0), Literal(2.0)};
  std::vector<Literal> lng1 = {Literal(1.0), Literal(2.0)};
  auto one = collect_geobox(lat1, lng1, 1);
  ASSERT_EQ(one.boxes.size(), 1u);
  EXPECT_EQ(one.boxes[0], (BBox{1, 2, 1, 2}));

  std::vector<Literal> lat2 = {Literal(0.0), Literal(0.0), Literal(10.0), Literal(10.0)};
  std::vector<Literal> lng2 = {Literal(0.0), Literal(1.0), Literal(10.0), Literal(11.0)};
  auto two = collect_geobox(lat2, lng2, 2);
  ASSERT_EQ(two.boxes.size(), 2u);
  EXPECT_EQ(two.boxes[0], (BBox{0, 0, 0, 1}));
  EXPECT_EQ(two.boxes[1], (BBox{10, 10, 10, 11}));

  auto empty = collect_geobox({}, {}, 3);
  EXPECT_TRUE(empty.boxes.empty());
  EXPECT_FALSE(empty.has_null_rows);

  std::vector<Literal> lat3 = {Literal(1.0), Literal()};
  std::vector<Literal> lng3 = {Literal(1.0), Literal(5.0)};
  auto flagged = collect_geobox(lat3, lng3, 2);
  EXPECT_TRUE(flagged.has_null_rows);
  EXPECT_EQ(flagged.boxes.size(), 1u);

  // Coverage: every non-null point lies in at least one box.
  test::Rng rng(8080);
  for (int iter = 0; iter < 100; ++iter) {
    int n = static_cast<int>(rng.range(1, 40));
    std::vector<Literal> lat, lng;
    for (int i = 0; i < n; ++i) {
      lat.push_back(Literal(rng.real(-5, 5)));
      lng.push_back(Literal(rng.real(-5, 5)));
    }
    auto x = rng.range(1, 5);
    auto p = collect_geobox(lat, lng, x);
    EXPECT_LE(p.boxes.size(), static_cast<std::size_t>(x));
    for (int i = 0; i < n; ++i) {
      bool covered = false;
      for (const auto& box : p.boxes) {
        if (box.contains(lat[i].as_real(), lng[i].as_real())) {
          covered = true;
          break;
        }
      }
      EXPECT_TRUE(covered);
    }
  }
}

TEST(MetricDist, Collectors) {
  std::vector<Literal> vals = {Literal(1.0), Literal(2.0)};
  auto abs = collect_metricdist_abs1d(vals, 0.0);
  EXPECT_EQ(abs.dmin, 1.0);
  EXPECT_EQ(abs.dmax, 2.0);

  auto lev = collect_metricdist_levenshtein(texts({"karu", "kazu", "x"}), "karu");
  EXPECT_EQ(lev.dmin, 0.0);
  EXPECT_EQ(lev.dmax, 4.0);

  std::vector<Literal> lat = {Literal(0.0), Literal(3.0)};
  std::vector<Literal> lng = {Literal(4.0), Literal(0.0)};
  auto euc = collect_metricdist_euclidean2d(lat, lng, 0.0, 0.0);
  EXPECT_DOUBLE_EQ(euc.dmin, 3.0);
  EXPECT_DOUBLE_EQ(euc.dmax, 4.0);

  std::vector<Literal> null_only = {Literal()};
  auto absent = collect_metricdist_abs1d(null_only, 0.0);
  EXPECT_TRUE(absent.absent);
}

TEST(Formatted, AgentNameExtraction) {
  UdfRegistry udfs = make_default_udf_registry();
  auto p = collect_formatted(texts({"Mozilla/5.0 (X11)", "curl/7.1"}), udfs.extractors(),
                             "agent_name");
  EXPECT_EQ(p.values, (std::vector<std::string>{"Mozilla", "curl"}));

  EXPECT_TRUE(collect_formatted({}, udfs.extractors(), "agent_name").values.empty());
  EXPECT_THROW(collect_formatted({}, udfs.extractors(), "nosuch"), DatasetError);

  EXPECT_EQ(extract_agent_name("bare-agent"), "bare-agent");
  EXPECT_EQ(extract_agent_name("  wget /1.2"), "wget");
  EXPECT_EQ(extract_agent_name("/x"), "");
}

TEST(Descriptors, ParseValidateAndIds) {
  auto d = parse_descriptor("bloom:db_name:f=0.01");
  EXPECT_EQ(d.type, IndexType::Bloom);
  EXPECT_EQ(d.columns, (std::vector<std::string>{"db_name"}));

  auto p = parse_descriptor("prefix:db_name:len=15");
  EXPECT_EQ(p.params.at("length"), "15");

  auto g = parse_descriptor("geobox:lat,lng:x=4");
  EXPECT_EQ(g.columns.size(), 2u);

  // Identical params produce identical ids; different params differ.
  EXPECT_EQ(parse_descriptor("bloom:c:f=0.01").id(), parse_descriptor("bloom:c").id());
  EXPECT_NE(parse_descriptor("bloom:c:f=0.02").id(), parse_descriptor("bloom:c").id());
  EXPECT_EQ(parse_descriptor("minmax:temp").id(), "minmax.temp");

  EXPECT_THROW(parse_descriptor("minmax"), ParseError);
  EXPECT_THROW(parse_descriptor("nosuch:c"), ParseError);
  EXPECT_THROW(parse_descriptor("geobox:lat"), ParseError);
  EXPECT_THROW(parse_descriptor("bloom:c:f=1.5"), ParseError);
  EXPECT_THROW(parse_descriptor("prefix:c"), ParseError);
  EXPECT_THROW(parse_descriptor("metricdist:c:metric=nosuch,origin=0"), ParseError);
  EXPECT_THROW(parse_descriptor("metricdist:lat,lng:metric=euclidean2d,origin=1"), ParseError);

  Schema s = test::fuzz_schema();
  EXPECT_THROW(validate_descriptor_against_schema(parse_descriptor("minmax:nosuch"), s),
               DatasetError);
  EXPECT_THROW(validate_descriptor_against_schema(parse_descriptor("prefix:a:len=3"), s),
               DatasetError);
  EXPECT_THROW(validate_descriptor_against_schema(parse_descriptor("gaplist:c"), s), DatasetError);
  EXPECT_THROW(validate_descriptor_against_schema(parse_descriptor("geobox:a,lng"), s),
               DatasetError);
}

TEST(BuiltinFilters, DescriptorToClauseMapping) {
  Schema s = test::fuzz_schema();
  UdfRegistry udfs = make_default_udf_registry();
  const char* geo_query = "ST_CONTAINS('POLYGON((0 0,4 0,4 4,0 4,0 0))', lat, lng)";

  // GeoBox route: one box-overlap clause.
  {
    auto filters = make_builtin_filters({parse_descriptor("geobox:lat,lng:x=4")});
    ClausePtr c = generate_clause(*parse_predicate(geo_query, s, udfs), filters);
    const auto* box = std::get_if<BoxOverlapClause>(&c->node);
    ASSERT_NE(box, nullptr);
    EXPECT_EQ(box->box, (BBox{0, 4, 0, 4}));
  }
  // Dual MinMax route: two interval clauses from the polygon bbox.
  {
    auto filters =
        make_builtin_filters({parse_descriptor("minmax:lat"), parse_descriptor("minmax:lng")});
    ClausePtr c = generate_clause(*parse_predicate(geo_query, s, udfs), filters);
    const auto* a = std::get_if<AndClause>(&c->node);
    ASSERT_NE(a, nullptr);
    ASSERT_EQ(a->children.size(), 2u);
    EXPECT_NE(std::get_if<IntervalClause>(&a->children[0]->node), nullptr);
    EXPECT_NE(std::get_if<IntervalClause>(&a->children[1]->node), nullptr);
  }
  // ST_DISTANCE maps to a ring for a matching metricdist index.
  {
    auto filters = make_builtin_filters(
        {parse_descriptor("metricdist:lat,lng:metric=euclidean2d,origin=0;0")});
    ClausePtr c =
        generate_clause(*parse_predicate("ST_DISTANCE(lat, lng, 3, 4) <= 1", s, udfs), filters);
    const auto* ring = std::get_if<RingOverlapClause>(&c->node);
    ASSERT_NE(ring, nullptr);
    EXPECT_DOUBLE_EQ(ring->query_distance, 5.0);
    EXPECT_DOUBLE_EQ(ring->radius, 1.0);
  }
  // Formatted maps EXTRACT equality; IN desugars to an OR of extractions.
  {
    auto filters = make_builtin_filters({parse_descriptor("formatted:ua:extractor=agent_name")});
    ClausePtr c = generate_clause(
        *parse_predicate("EXTRACT('agent_name', ua) IN ('Hacker', 'curl')", s, udfs), filters);
    const auto* o = std::get_if<OrClause>(&c->node);
    ASSERT_NE(o, nullptr);
    EXPECT_EQ(o->children.size(), 2u);
  }
  // Prefix only fires on patterns with a literal head.
  {
    auto filters = make_builtin_filters({parse_descriptor("prefix:c:len=2")});
    EXPECT_NE(generate_clause(*parse_predicate("c LIKE 'al%'", s, udfs), filters), nullptr);
    ClausePtr none = generate_clause(*parse_predicate("c LIKE '%al'", s, udfs), filters);
    EXPECT_TRUE(none == nullptr || is_true_clause(none));
  }
}

// Single-descriptor safety, mirroring the whole-pipeline fuzz per index type.
TEST(PerIndexOracle, EachDescriptorAloneIsSafe) {
  Schema s = test::fuzz_schema();
  UdfRegistry udfs = make_default_udf_registry();
  for (const auto& text : test::fuzz_descriptor_menu()) {
    test::Rng rng(detail::fnv1a64(text));
    std::vector<IndexDescriptor> ds = {parse_descriptor(text)};
    auto filters = make_builtin_filters(ds);
    int skips = 0;
    for (int iter = 0; iter < 200; ++iter) {
      auto objects = test::fuzz_objects(rng, s);
      // Alternate bare leaves (most likely to be labelled) with deeper trees.
      ExprPtr tree = (iter % 2 == 0) ? test::fuzz_leaf(rng, s) : test::fuzz_tree(rng, s, 3);
      ClausePtr clause = generate_clause(*tree, filters);
      auto bundles = test::fuzz_bundles(objects, ds, s, udfs.extractors());
      for (std::size_t i = 0; i < objects.size(); ++i) {
        bool relevant = false;
        for (const auto& row : objects[i]) {
          if (eval_row(*tree, row, udfs)) {
            relevant = true;
            break;
          }
        }
        bool kept = !clause || eval_clause(clause, bundles[i], s);
        if (!kept) ++skips;
        if (relevant) {
          ASSERT_TRUE(kept) << text << "\n" << render_expr(*tree);
        }
      }
    }
    EXPECT_GT(skips, 0) << text << " never skipped anything across the fuzz corpus";
  }
}

}  // namespace
}  // namespace dskip
