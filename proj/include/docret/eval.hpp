// Copyright 2026-present the docret project
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "docret/corpus.hpp"
#include "docret/fusion.hpp"
#include "docret/kernels.hpp"
#include "docret/ranked_list.hpp"
#include "json.hpp"

namespace docret {

/// One ranked list per query of a bound QuerySet, in query order.
struct RetrievalRun {
  std::string name;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  std::string corpus_checksum;
  std::vector<std::string> query_ids;
  std::vector<RankedList> lists;

  const RankedList& list_for(const std::string& query_id) const;
};

/// Runs `retrieve` for every query (in parallel under Exec::kParallel).
RetrievalRun make_run(std::string name, nlohmann::ordered_json config, const Corpus& corpus, const QuerySet& queries,
                      const std::function<RankedList(std::uint32_t query_ordinal)>& retrieve,
                      Exec exec = Exec::kParallel);

/// Throws QuerySetMismatch unless `run` covers exactly `queries`, in order.
void check_run(const RetrievalRun& run, const QuerySet& queries);

inline const std::vector<std::size_t>& default_ks() {
  static const std::vector<std::size_t> ks{1, 5, 20};
  return ks;
}

/// 1-based rank of the gold page (or of any page of the gold document when
/// `doc_level` is set). Throws GoldNotFound if the gold page is unknown.
std::optional<std::size_t> gold_rank(const RankedList& list, const QueryRecord& query, const Corpus& corpus,
                                     bool doc_level = false);

/// Fraction of queries whose gold page is within the top k.
double recall_at_k(const RetrievalRun& run, const QuerySet& queries, const Corpus& corpus, std::size_t k,
                   bool doc_level = false);

struct RecallReport {
  std::string name;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  std::string corpus_checksum;
  bool doc_level = false;
  std::vector<std::size_t> ks;
  std::vector<double> recall;  // aligned with ks
  std::vector<std::string> query_ids;
  std::vector<std::optional<std::size_t>> gold_ranks;

  double at(std::size_t k) const;
  nlohmann::ordered_json to_json() const;
  static RecallReport from_json(const nlohmann::ordered_json& j);

  bool operator==(const RecallReport&) const = default;
};

RecallReport evaluate(const RetrievalRun& run, const QuerySet& queries, const Corpus& corpus,
                      const std::vector<std::size_t>& ks = default_ks(), bool doc_level = false);

struct ComplementarityReport {
  std::size_t k = 1;
  std::string a;
  std::string b;
  std::vector<std::string> a_only;
  std::vector<std::string> b_only;
  std::vector<std::string> both;
  std::vector<std::string> neither;

  std::size_t total() const { return a_only.size() + b_only.size() + both.size() + neither.size(); }
  nlohmann::ordered_json to_json() const;
};

/// Partitions queries by success at k in each report. Throws
/// QuerySetMismatch when the reports cover different queries.
ComplementarityReport exclusive_successes(const RecallReport& a, const RecallReport& b, std::size_t k);
ComplementarityReport exclusive_successes(const RetrievalRun& a, const RetrievalRun& b, const QuerySet& queries,
                                          const Corpus& corpus, std::size_t k);

struct SweepEntry {
  double alpha = 0.0;
  Strategy strategy = Strategy::kRsf;
  RecallReport report;
};

std::vector<double> default_alpha_grid();

struct SweepOptions {
  std::vector<double> alphas = default_alpha_grid();
  std::vector<Strategy> strategies{Strategy::kRsf, Strategy::kRrf};
  std::size_t pool = 100;
  std::size_t rrf_k = kDefaultRrfK;
  std::vector<std::size_t> ks = default_ks();
};

/// Multimodal fusion of a text run and an image run for every
/// (alpha, strategy), each list cut to the pool depth first. Entries are
/// ordered by strategy, then alpha.
std::vector<SweepEntry> alpha_sweep(const RetrievalRun& text, const RetrievalRun& image, const QuerySet& queries,
                                    const Corpus& corpus, const SweepOptions& options = {});

enum class ReportFormat { kJson, kMarkdown };

/// Deterministic rendering. A single report renders as a K / Recall table;
/// several render as one row per report with the best value per column in
/// bold.
std::string emit_report(const std::vector<RecallReport>& reports, ReportFormat format);
std::vector<RecallReport> parse_reports(const std::string& json_text);

std::string emit_complementarity(const ComplementarityReport& report, ReportFormat format);

}  // namespace docret
