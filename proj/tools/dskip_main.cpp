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

// dskip: data-skipping engine CLI.
//
// Subcommands: index create, index refresh, index describe, query, stats,
// gen. Exit codes: 0 success, 2 usage or parse error, 3 dataset or manifest
// error, 4 metadata store corruption.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dskip/dskip.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitDataset = 3;
constexpr int kExitCorruption = 4;

nlohmann::json literal_json(const dskip::Literal& v) {
  if (v.is_null()) return nullptr;
  if (v.is_integer()) return v.as_integer();
  if (v.is_real()) return v.as_real();
  return v.as_text();
}

std::string format_literal_cell(const dskip::Literal& v) {
  if (v.is_null()) return "NULL";
  if (v.is_text()) return v.as_text();
  return dskip::literal_to_string(v);
}

std::string format_indicator(const std::optional<double>& v) {
  if (!v) return "undefined";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", *v);
  return buf;
}

nlohmann::json stats_json(const dskip::QueryStats& s) {
  nlohmann::json phases;
  for (const auto& [phase, ms] : s.wall_ms) phases[phase] = ms;
  return nlohmann::json{{"objectsTotal", s.objects_total},
                        {"objectsKept", s.objects_kept},
                        {"objectsSkipped", s.objects_skipped},
                        {"bytesScanned", s.bytes_scanned},
                        {"bytesSkipped", s.bytes_skipped},
                        {"metadataBytesRead", s.metadata_bytes_read},
                        {"wallMs", phases}};
}

nlohmann::json indicators_json(const dskip::SkippingIndicators& ind) {
  auto opt = [](const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  return nlohmann::json{{"sigma", ind.sigma},
                        {"lambda", opt(ind.lambda)},
                        {"mu", opt(ind.mu)},
                        {"psi", opt(ind.psi)}};
}

struct CommonFlags {
  std::string dataset;
  bool json = false;
  bool verbose = false;
  int threads = 0;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--dataset", flags.dataset, "dataset root directory")->required();
  cmd->add_flag("--json", flags.json, "machine-readable output");
  cmd->add_flag("--verbose", flags.verbose, "extra diagnostics");
  cmd->add_option("--threads", flags.threads,
                  "worker threads (default: DSKIP_THREADS or hardware)");
}

int cmd_index_create(const CommonFlags& flags, const std::vector<std::string>& descriptor_texts) {
  std::vector<dskip::IndexDescriptor> descriptors;
  for (const auto& text : descriptor_texts) descriptors.push_back(dskip::parse_descriptor(text));
  dskip::UdfRegistry udfs = dskip::make_default_udf_registry();
  dskip::StoreOptions options;
  options.threads = flags.threads;
  dskip::CreateIndexResult result = dskip::create_index(flags.dataset, descriptors, udfs, options);

  if (flags.json) {
    nlohmann::json out;
    out["objectsIndexed"] = result.objects_indexed;
    nlohmann::json per;
    for (const auto& [id, s] : result.per_descriptor) {
      per[id] = {{"records", s.records}, {"bytes", s.bytes}};
    }
    out["indexes"] = per;
    std::cout << out.dump() << "\n";
    return kExitOk;
  }
  std::printf("indexed %lld objects under %s\n",
              static_cast<long long>(result.objects_indexed), flags.dataset.c_str());
  for (const auto& [id, s] : result.per_descriptor) {
    std::printf("  %-40s %6lld records  %8lld bytes\n", id.c_str(),
                static_cast<long long>(s.records), static_cast<long long>(s.bytes));
  }
  return kExitOk;
}

int cmd_index_refresh(const CommonFlags& flags) {
  dskip::UdfRegistry udfs = dskip::make_default_udf_registry();
  dskip::StoreOptions options;
  options.threads = flags.threads;
  dskip::RefreshResult result = dskip::refresh(flags.dataset, udfs, options);
  if (flags.json) {
    std::cout << nlohmann::json{{"objectsRefreshed", result.objects_recollected},
                                {"recordsDropped", result.records_dropped},
                                {"objectsTotal", result.objects_total}}
                     .dump()
              << "\n";
  } else {
    std::printf("%lld object%s refreshed (of %lld), %lld dropped\n",
                static_cast<long long>(result.objects_recollected),
                result.objects_recollected == 1 ? "" : "s",
                static_cast<long long>(result.objects_total),
                static_cast<long long>(result.records_dropped));
  }
  return kExitOk;
}

int cmd_index_describe(const CommonFlags& flags) {
  auto manifest = dskip::load_manifest(flags.dataset);
  if (!manifest) throw dskip::DatasetError("no manifest under " + flags.dataset);
  dskip::Schema schema = dskip::Schema::load(flags.dataset + "/schema.json");
  auto objects = dskip::list_objects(flags.dataset);

  nlohmann::json descriptors = nlohmann::json::array();
  struct Line {
    std::string id, display;
    std::int64_t records, stale;
  };
  std::vector<Line> lines;
  for (const auto& d : manifest->descriptors) {
    auto records = dskip::detail::read_index_records(flags.dataset, d, schema, nullptr);
    std::int64_t stale = 0;
    for (const auto& obj : objects) {
      bool fresh = false;
      for (const auto& rec : records) {
        if (rec.object_name == obj.name && !dskip::is_stale(rec, obj)) {
          fresh = true;
          break;
        }
      }
      if (!fresh) ++stale;
    }
    lines.push_back({d.id(), d.display(), static_cast<std::int64_t>(records.size()), stale});
    descriptors.push_back({{"id", d.id()},
                           {"descriptor", d.display()},
                           {"records", records.size()},
                           {"staleObjects", stale}});
  }

  if (flags.json) {
    std::cout << nlohmann::json{{"datasetId", manifest->dataset_id},
                                {"formatVersion", manifest->format_version},
                                {"createdAtMs", manifest->created_at_ms},
                                {"updatedAtMs", manifest->updated_at_ms},
                                {"objects", objects.size()},
                                {"indexes", descriptors}}
                     .dump()
              << "\n";
    return kExitOk;
  }
  std::printf("dataset %s: %zu objects, format v%d\n", manifest->dataset_id.c_str(),
              objects.size(), manifest->format_version);
  for (const auto& l : lines) {
    std::printf("  %-40s %6lld records  %lld stale object%s\n", l.display.c_str(),
                static_cast<long long>(l.records), static_cast<long long>(l.stale),
                l.stale == 1 ? "" : "s");
  }
  return kExitOk;
}

int cmd_query(const CommonFlags& flags, const std::string& where,
              const std::string& select_text, bool explain, bool no_skipping) {
  dskip::UdfRegistry udfs = dskip::make_default_udf_registry();
  dskip::QueryOptions options;
  options.no_skipping = no_skipping;
  options.threads = flags.threads;
  if (!select_text.empty()) {
    std::size_t start = 0;
    while (start <= select_text.size()) {
      auto comma = select_text.find(',', start);
      options.select.push_back(
          select_text.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  }

  if (explain) {
    dskip::Dataset dataset = dskip::open_dataset(flags.dataset);
    dskip::ExprPtr tree = dskip::parse_predicate(where, dataset.schema, udfs);
    std::vector<dskip::FilterRegistration> filters;
    if (auto manifest = dskip::load_manifest(flags.dataset)) {
      filters = dskip::make_builtin_filters(manifest->descriptors);
    }
    dskip::LabelledExpressionTree labelled = dskip::label_tree(*tree, filters);
    dskip::ClausePtr clause = dskip::merge_clause(labelled);
    if (flags.json) {
      std::cout << nlohmann::json{{"where", where},
                                  {"labelledTree", dskip::render_labelled_tree(labelled)},
                                  {"clause", dskip::render_clause(clause)}}
                       .dump()
                << "\n";
    } else {
      std::printf("%s", dskip::render_labelled_tree(labelled).c_str());
      std::printf("clause: %s\n", dskip::render_clause(clause).c_str());
    }
    return kExitOk;
  }

  dskip::QueryResult result = dskip::run_query(flags.dataset, where, udfs, options);

  if (flags.json) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : result.rows) {
      nlohmann::json r = nlohmann::json::array();
      for (const auto& v : row.values) r.push_back(literal_json(v));
      rows.push_back(std::move(r));
    }
    std::cout << nlohmann::json{{"columns", result.columns},
                                {"rows", rows},
                                {"stats", stats_json(result.stats)},
                                {"clause", dskip::render_clause(result.clause)}}
                     .dump()
              << "\n";
    return kExitOk;
  }

  for (std::size_t i = 0; i < result.columns.size(); ++i) {
    std::printf("%s%s", i ? "," : "", result.columns[i].c_str());
  }
  std::printf("\n");
  for (const auto& row : result.rows) {
    for (std::size_t i = 0; i < row.values.size(); ++i) {
      std::printf("%s%s", i ? "," : "", format_literal_cell(row.values[i]).c_str());
    }
    std::printf("\n");
  }
  std::printf("-- %zu rows; objects kept %lld / skipped %lld of %lld; bytes scanned %lld, "
              "skipped %lld; metadata read %lld bytes\n",
              result.rows.size(), static_cast<long long>(result.stats.objects_kept),
              static_cast<long long>(result.stats.objects_skipped),
              static_cast<long long>(result.stats.objects_total),
              static_cast<long long>(result.stats.bytes_scanned),
              static_cast<long long>(result.stats.bytes_skipped),
              static_cast<long long>(result.stats.metadata_bytes_read));
  if (flags.verbose) {
    std::printf("-- clause: %s\n", dskip::render_clause(result.clause).c_str());
    for (const auto& [phase, ms] : result.stats.wall_ms) {
      std::printf("-- %-8s %8.3f ms\n", phase.c_str(), ms);
    }
  }
  return kExitOk;
}

int cmd_stats(const CommonFlags& flags, const std::string& workload_path) {
  std::ifstream in(workload_path);
  if (!in) throw dskip::ParseError("cannot open workload file: " + workload_path, 0);
  std::vector<std::string> queries;
  std::string line;
  while (std::getline(in, line)) {
    std::size_t begin = line.find_first_not_of(" \t\r");
    if (begin == std::string::npos || line[begin] == '#') continue;
    std::size_t end = line.find_last_not_of(" \t\r");
    queries.push_back(line.substr(begin, end - begin + 1));
  }
  if (queries.empty()) throw dskip::ParseError("workload file has no queries", 0);

  dskip::UdfRegistry udfs = dskip::make_default_udf_registry();
  std::vector<dskip::FilterRegistration> filters;
  if (auto manifest = dskip::load_manifest(flags.dataset)) {
    filters = dskip::make_builtin_filters(manifest->descriptors);
  }
  dskip::WorkloadReport report =
      dskip::workload_report(flags.dataset, queries, filters, udfs, flags.threads);

  if (flags.json) {
    nlohmann::json qjson = nlohmann::json::array();
    for (const auto& q : report.queries) {
      nlohmann::json e = indicators_json(q.indicators);
      e["query"] = q.query;
      qjson.push_back(std::move(e));
    }
    auto opt = [](const std::optional<double>& v) {
      return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
    };
    std::cout << nlohmann::json{{"queries", qjson},
                                {"undefinedQueries", report.undefined_queries},
                                {"geometricMeans",
                                 {{"sigma", opt(report.gm_sigma)},
                                  {"lambda", opt(report.gm_lambda)},
                                  {"mu", opt(report.gm_mu)},
                                  {"psi", opt(report.gm_psi)}}}}
                     .dump()
              << "\n";
    return kExitOk;
  }

  std::printf("%-48s %10s %10s %10s %10s\n", "query", "sigma", "lambda", "mu", "psi");
  for (const auto& q : report.queries) {
    std::printf("%-48s %10.6g %10s %10s %10s\n", q.query.c_str(), q.indicators.sigma,
                format_indicator(q.indicators.lambda).c_str(),
                format_indicator(q.indicators.mu).c_str(),
                format_indicator(q.indicators.psi).c_str());
  }
  std::printf("%-48s %10s %10s %10s %10s\n", "geometric mean",
              format_indicator(report.gm_sigma).c_str(),
              format_indicator(report.gm_lambda).c_str(),
              format_indicator(report.gm_mu).c_str(), format_indicator(report.gm_psi).c_str());
  if (!report.undefined_queries.empty()) {
    std::printf("zero-selectivity queries excluded from the means:\n");
    for (const auto& q : report.undefined_queries) std::printf("  %s\n", q.c_str());
  }
  return kExitOk;
}

int cmd_gen(const CommonFlags& flags, std::uint64_t seed, std::int64_t objects, std::int64_t rows,
            const std::string& layout_text, const std::vector<std::string>& column_texts) {
  dskip::DatasetGenSpec spec;
  spec.objects = objects;
  spec.rows_per_object = rows;
  if (layout_text == "random") {
    spec.layout = dskip::DatasetLayout::Random;
  } else if (layout_text == "range") {
    spec.layout = dskip::DatasetLayout::RangePartitioned;
  } else if (layout_text == "geo-grid") {
    spec.layout = dskip::DatasetLayout::GeoGrid;
  } else {
    throw dskip::ParseError("layout must be random|range|geo-grid", 0);
  }

  // Column spec: name:type[:lo:hi[:nullFraction]] for numerics,
  // name:text[:poolSize[:nullFraction]] for text.
  for (const auto& text : column_texts) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (start <= text.size()) {
      auto colon = text.find(':', start);
      parts.push_back(text.substr(start, colon == std::string::npos ? std::string::npos
                                                                    : colon - start));
      if (colon == std::string::npos) break;
      start = colon + 1;
    }
    if (parts.size() < 2) throw dskip::ParseError("column spec must be name:type[...]", 0);
    dskip::ColumnGenSpec col;
    col.name = parts[0];
    auto type = dskip::value_type_from_string(parts[1]);
    if (!type) throw dskip::ParseError("unknown column type '" + parts[1] + "'", 0);
    col.type = *type;
    try {
      if (col.type == dskip::ValueType::Text) {
        if (parts.size() > 2) col.pool_size = std::stoll(parts[2]);
        if (parts.size() > 3) col.null_fraction = std::stod(parts[3]);
      } else {
        if (parts.size() > 2) col.num_lo = std::stod(parts[2]);
        if (parts.size() > 3) col.num_hi = std::stod(parts[3]);
        if (parts.size() > 4) col.null_fraction = std::stod(parts[4]);
      }
    } catch (const std::exception&) {
      throw dskip::ParseError("bad column spec '" + text + "'", 0);
    }
    spec.columns.push_back(std::move(col));
  }

  dskip::generate_dataset(spec, seed, flags.dataset);
  if (flags.json) {
    std::cout << nlohmann::json{{"dataset", flags.dataset},
                                {"objects", spec.objects},
                                {"rowsPerObject", spec.rows_per_object}}
                     .dump()
              << "\n";
  } else {
    std::printf("generated %lld objects x %lld rows under %s\n",
                static_cast<long long>(spec.objects), static_cast<long long>(spec.rows_per_object),
                flags.dataset.c_str());
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dskip: per-object metadata indexing and data skipping for CSV datasets"};
  app.require_subcommand(1);

  CommonFlags flags;

  auto* index = app.add_subcommand("index", "index lifecycle");
  index->require_subcommand(1);
  auto* create = index->add_subcommand("create", "collect metadata and write the store");
  std::vector<std::string> descriptor_texts;
  add_common(create, flags);
  create->add_option("--index", descriptor_texts,
                     "index descriptor type:col[,col2][:key=value,...] (repeatable)")
      ->required();
  auto* refresh_cmd = index->add_subcommand("refresh", "re-collect stale or new objects");
  add_common(refresh_cmd, flags);
  auto* describe = index->add_subcommand("describe", "manifest, record counts, staleness");
  add_common(describe, flags);

  auto* query = app.add_subcommand("query", "run a predicate with data skipping");
  std::string where, select_text;
  bool explain = false, no_skipping = false;
  add_common(query, flags);
  query->add_option("--where", where, "predicate text")->required();
  query->add_option("--select", select_text, "comma-separated projection");
  query->add_flag("--explain", explain, "print the labelled tree and clause, do not scan");
  query->add_flag("--no-skipping", no_skipping, "full scan (baseline)");

  auto* stats = app.add_subcommand("stats", "skipping-effectiveness indicators for a workload");
  std::string workload_path;
  add_common(stats, flags);
  stats->add_option("--workload", workload_path, "file with one predicate per line")->required();

  auto* gen = app.add_subcommand("gen", "generate a synthetic dataset");
  std::uint64_t seed = 1;
  std::int64_t objects = 4, rows = 100;
  std::string layout_text = "random";
  std::vector<std::string> column_texts;
  add_common(gen, flags);
  gen->add_option("--seed", seed, "deterministic seed");
  gen->add_option("--objects", objects, "object count");
  gen->add_option("--rows", rows, "rows per object");
  gen->add_option("--layout", layout_text, "random|range|geo-grid");
  gen->add_option("--column", column_texts, "column spec name:type[:...] (repeatable)")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (create->parsed()) return cmd_index_create(flags, descriptor_texts);
    if (refresh_cmd->parsed()) return cmd_index_refresh(flags);
    if (describe->parsed()) return cmd_index_describe(flags);
    if (query->parsed()) return cmd_query(flags, where, select_text, explain, no_skipping);
    if (stats->parsed()) return cmd_stats(flags, workload_path);
    if (gen->parsed()) return cmd_gen(flags, seed, objects, rows, layout_text, column_texts);
  } catch (const dskip::ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const dskip::StoreCorruptionError& e) {
    std::fprintf(stderr, "error: metadata store corruption: %s\n", e.what());
    return kExitCorruption;
  } catch (const dskip::DatasetError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitDataset;
  } catch (const dskip::UdfError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitDataset;
  }
  return kExitUsage;
}
