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

#include <chrono>
#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dskip/builtin_filters.hpp"
#include "dskip/clause_eval.hpp"
#include "dskip/csv.hpp"
#include "dskip/errors.hpp"
#include "dskip/eval.hpp"
#include "dskip/merge.hpp"
#include "dskip/metastore.hpp"
#include "dskip/parallel.hpp"
#include "dskip/parser.hpp"

namespace dskip {

// Query flow: list objects, generate the clause from the query tree and the
// collected indexes, load only the metadata the clause needs, prune, then
// scan the kept objects with the row-level filter.

struct Dataset {
  std::filesystem::path root;
  Schema schema;
  std::vector<ObjectDescriptor> objects;  // lexicographic name order
};

inline Dataset open_dataset(const std::filesystem::path& root) {
  Dataset d;
  d.root = root;
  d.schema = Schema::load((root / "schema.json").string());
  d.objects = list_objects(root);
  return d;
}

struct QueryStats {
  std::int64_t objects_total = 0;
  std::int64_t objects_kept = 0;
  std::int64_t objects_skipped = 0;
  std::int64_t bytes_scanned = 0;
  std::int64_t bytes_skipped = 0;
  std::int64_t metadata_bytes_read = 0;
  std::map<std::string, double> wall_ms;  // list/plan/metadata/prune/scan
};

struct QueryResult {
  std::vector<std::string> columns;
  std::vector<Row> rows;  // projected; ordered by (object name, row index)
  QueryStats stats;
  ClausePtr clause;  // the generated clause, for --explain and tests
  std::vector<std::string> kept_objects;
};

struct QueryOptions {
  bool no_skipping = false;
  int threads = 0;
  std::vector<std::string> select;  // empty = all columns
};

/// Keeps an object when there is no clause, its metadata is absent or stale,
/// or the clause evaluates to keep. Order is preserved.
inline std::vector<ObjectDescriptor> prune_objects(const std::vector<ObjectDescriptor>& objects,
                                                   const ClausePtr& clause,
                                                   const BundleSet& bundles,
                                                   const Schema& schema) {
  std::vector<ObjectDescriptor> kept;
  for (const auto& obj : objects) {
    if (!clause) {
      kept.push_back(obj);
      continue;
    }
    auto it = bundles.per_object.find(obj.name);
    if (it == bundles.per_object.end()) {
      kept.push_back(obj);  // no metadata at all
      continue;
    }
    if (eval_clause(clause, it->second, schema)) kept.push_back(obj);
  }
  return kept;
}

namespace detail {

class PhaseTimer {
 public:
  explicit PhaseTimer(QueryStats& stats) : stats_(stats) {}
  void mark(const std::string& phase) {
    auto now = std::chrono::steady_clock::now();
    stats_.wall_ms[phase] = std::chrono::duration<double, std::milli>(now - last_).count();
    last_ = now;
  }

 private:
  QueryStats& stats_;
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

inline std::vector<std::size_t> projection_indices(const Schema& schema,
                                                   const std::vector<std::string>& select) {
  std::vector<std::size_t> idx;
  if (select.empty()) {
    for (std::size_t i = 0; i < schema.size(); ++i) idx.push_back(i);
    return idx;
  }
  for (const auto& name : select) {
    auto i = schema.index_of(name);
    if (!i) throw ParseError("unknown select column '" + name + "'", 0);
    idx.push_back(*i);
  }
  return idx;
}

}  // namespace detail

/// Executes a query with metadata pruning. The filter list decides which
/// clauses can be generated; pass make_builtin_filters over the manifest's
/// descriptors for the standard behaviour (the no-filters overload does so).
inline QueryResult run_query(const std::filesystem::path& root, const std::string& where_text,
                             const std::vector<FilterRegistration>& filters,
                             const UdfRegistry& udfs, const QueryOptions& options = {}) {
  QueryResult result;
  detail::PhaseTimer timer(result.stats);

  Dataset dataset = open_dataset(root);
  result.stats.objects_total = static_cast<std::int64_t>(dataset.objects.size());
  timer.mark("list");

  ExprPtr tree = parse_predicate(where_text, dataset.schema, udfs);
  if (!options.no_skipping) {
    result.clause = generate_clause(*tree, filters);
    if (is_true_clause(result.clause)) result.clause = nullptr;
  }
  timer.mark("plan");

  BundleSet bundles;
  if (result.clause) {
    std::set<std::string> needed;
    collect_clause_descriptors(result.clause, needed);
    if (auto manifest = load_manifest(root)) {
      bundles = load_bundles(root, *manifest, needed, dataset.objects, dataset.schema);
      result.stats.metadata_bytes_read = bundles.metadata_bytes_read;
    }
  }
  timer.mark("metadata");

  std::vector<ObjectDescriptor> kept =
      prune_objects(dataset.objects, result.clause, bundles, dataset.schema);
  for (const auto& obj : kept) {
    result.kept_objects.push_back(obj.name);
    result.stats.bytes_scanned += obj.size_bytes;
  }
  result.stats.objects_kept = static_cast<std::int64_t>(kept.size());
  result.stats.objects_skipped = result.stats.objects_total - result.stats.objects_kept;
  result.stats.bytes_skipped = 0;
  for (const auto& obj : dataset.objects) result.stats.bytes_skipped += obj.size_bytes;
  result.stats.bytes_skipped -= result.stats.bytes_scanned;
  timer.mark("prune");

  std::vector<std::size_t> projection = detail::projection_indices(dataset.schema, options.select);
  for (std::size_t i : projection) result.columns.push_back(dataset.schema.at(i).name);

  std::vector<std::vector<Row>> per_object(kept.size());
  parallel_for(kept.size(), resolve_threads(options.threads), [&](std::size_t i) {
    std::vector<Row> rows = read_csv_rows((root / kept[i].name).string(), dataset.schema);
    std::vector<Row> matched;
    for (auto& row : rows) {
      if (!eval_row(*tree, row, udfs)) continue;
      Row projected;
      projected.values.reserve(projection.size());
      for (std::size_t c : projection) projected.values.push_back(row.values.at(c));
      matched.push_back(std::move(projected));
    }
    per_object[i] = std::move(matched);
  });
  for (auto& chunk : per_object) {
    result.rows.insert(result.rows.end(), std::make_move_iterator(chunk.begin()),
                       std::make_move_iterator(chunk.end()));
  }
  timer.mark("scan");
  return result;
}

inline QueryResult run_query(const std::filesystem::path& root, const std::string& where_text,
                             const UdfRegistry& udfs, const QueryOptions& options = {}) {
  std::vector<FilterRegistration> filters;
  if (!options.no_skipping) {
    if (auto manifest = load_manifest(root)) {
      filters = make_builtin_filters(manifest->descriptors);
    }
  }
  return run_query(root, where_text, filters, udfs, options);
}

/// Ground truth by full scan: per-object relevant and total row counts.
struct OracleObjectCount {
  std::string object;
  std::int64_t relevant = 0;
  std::int64_t total = 0;
};

inline std::vector<OracleObjectCount> oracle_query(const std::filesystem::path& root,
                                                   const std::string& where_text,
                                                   const UdfRegistry& udfs, int threads = 0) {
  Dataset dataset = open_dataset(root);
  ExprPtr tree = parse_predicate(where_text, dataset.schema, udfs);
  std::vector<OracleObjectCount> counts(dataset.objects.size());
  parallel_for(dataset.objects.size(), resolve_threads(threads), [&](std::size_t i) {
    std::vector<Row> rows = read_csv_rows((root / dataset.objects[i].name).string(), dataset.schema);
    OracleObjectCount c;
    c.object = dataset.objects[i].name;
    c.total = static_cast<std::int64_t>(rows.size());
    for (const auto& row : rows) {
      if (eval_row(*tree, row, udfs)) ++c.relevant;
    }
    counts[i] = c;
  });
  return counts;
}

/// sigma = |D_r| / |D|            (selectivity)
/// lambda = |D_r| / sum_{o in O_r} |o|   (layout factor)
/// mu = sum_{O_r} |o| / sum_{O_m} |o|    (metadata factor)
/// psi = sum_{O_m} |o| / |D|             (scanning factor)
/// lambda, mu and psi are undefined for zero-selectivity queries.
struct SkippingIndicators {
  double sigma = 0;
  std::optional<double> lambda, mu, psi;
};

inline SkippingIndicators compute_indicators(const std::filesystem::path& root,
                                             const std::string& where_text,
                                             const std::vector<FilterRegistration>& filters,
                                             const UdfRegistry& udfs, int threads = 0) {
  std::vector<OracleObjectCount> oracle = oracle_query(root, where_text, udfs, threads);

  Dataset dataset = open_dataset(root);
  ExprPtr tree = parse_predicate(where_text, dataset.schema, udfs);
  ClausePtr clause = generate_clause(*tree, filters);
  if (is_true_clause(clause)) clause = nullptr;
  BundleSet bundles;
  if (clause) {
    std::set<std::string> needed;
    collect_clause_descriptors(clause, needed);
    if (auto manifest = load_manifest(root)) {
      bundles = load_bundles(root, *manifest, needed, dataset.objects, dataset.schema);
    }
  }
  std::vector<ObjectDescriptor> kept = prune_objects(dataset.objects, clause, bundles, dataset.schema);
  std::set<std::string> kept_names;
  for (const auto& o : kept) kept_names.insert(o.name);

  std::int64_t total_rows = 0, relevant_rows = 0, relevant_object_rows = 0, kept_object_rows = 0;
  for (const auto& c : oracle) {
    total_rows += c.total;
    relevant_rows += c.relevant;
    if (c.relevant > 0) relevant_object_rows += c.total;
    if (kept_names.count(c.object)) kept_object_rows += c.total;
  }

  SkippingIndicators ind;
  ind.sigma = total_rows == 0 ? 0.0
                              : static_cast<double>(relevant_rows) / static_cast<double>(total_rows);
  if (relevant_rows > 0) {
    ind.lambda = static_cast<double>(relevant_rows) / static_cast<double>(relevant_object_rows);
    ind.mu = static_cast<double>(relevant_object_rows) / static_cast<double>(kept_object_rows);
    ind.psi = static_cast<double>(kept_object_rows) / static_cast<double>(total_rows);
  }
  return ind;
}

struct WorkloadEntry {
  std::string query;
  SkippingIndicators indicators;
};

struct WorkloadReport {
  std::vector<WorkloadEntry> queries;           // all queries, in input order
  std::vector<std::string> undefined_queries;   // zero selectivity, excluded from means
  std::optional<double> gm_sigma, gm_lambda, gm_mu, gm_psi;
};

/// Geometric means over the queries with defined indicators.
inline WorkloadReport workload_report(const std::filesystem::path& root,
                                      const std::vector<std::string>& queries,
                                      const std::vector<FilterRegistration>& filters,
                                      const UdfRegistry& udfs, int threads = 0) {
  WorkloadReport report;
  double log_sigma = 0, log_lambda = 0, log_mu = 0, log_psi = 0;
  int defined = 0;
  for (const auto& q : queries) {
    SkippingIndicators ind = compute_indicators(root, q, filters, udfs, threads);
    if (!ind.lambda) {
      report.undefined_queries.push_back(q);
    } else {
      log_sigma += std::log(ind.sigma);
      log_lambda += std::log(*ind.lambda);
      log_mu += std::log(*ind.mu);
      log_psi += std::log(*ind.psi);
      ++defined;
    }
    report.queries.push_back({q, ind});
  }
  if (defined > 0) {
    report.gm_sigma = std::exp(log_sigma / defined);
    report.gm_lambda = std::exp(log_lambda / defined);
    report.gm_mu = std::exp(log_mu / defined);
    report.gm_psi = std::exp(log_psi / defined);
  }
  return report;
}

}  // namespace dskip
