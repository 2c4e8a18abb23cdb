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
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "docret/corpus.hpp"
#include "docret/eval.hpp"
#include "docret/ranked_list.hpp"
#include "json.hpp"

namespace docret {

enum class Modality { kText, kImage };
enum class RagMode { kStandard, kNoRetrieval, kHardNegative, kOracle };

std::string_view to_string(Modality modality);
Modality parse_modality(std::string_view name);
std::string_view to_string(RagMode mode);
RagMode parse_rag_mode(std::string_view name);

struct RagConfig {
  Modality modality = Modality::kText;
  std::size_t k = 5;
  RagMode mode = RagMode::kStandard;
  int judge_votes = 3;
  std::size_t parallelism = 4;
  /// Hard negatives skip every page of the gold document, not just the gold page.
  bool exclude_gold_document = false;
  /// Base directory for relative image references.
  std::filesystem::path image_root;
  double max_failure_rate = 0.10;

  void validate() const;
  nlohmann::ordered_json to_json() const;
};

/// Text transcription or encoded image of one page.
struct ContextItem {
  std::string page_id;
  std::string text;
  std::string image_bytes;
  std::string mime_type;

  bool is_image() const { return !image_bytes.empty(); }
};

struct ReaderResponse {
  std::string answer;
  std::uint64_t input_tokens = 0;
  std::uint64_t output_tokens = 0;
};

/// Implementations must tolerate concurrent calls.
class ReaderClient {
 public:
  virtual ~ReaderClient() = default;
  virtual ReaderResponse answer(const std::string& question, std::span<const ContextItem> context) = 0;
  virtual std::string identity() const = 0;
};

class JudgeClient {
 public:
  virtual ~JudgeClient() = default;
  virtual bool judge(const std::string& question, const std::string& system_answer,
                     const std::string& reference_answer) = 0;
  virtual std::string identity() const = 0;
};

/// Answers with the reference answer whenever any context is supplied and
/// with a fixed fallback otherwise. Token counts are whitespace word counts
/// (plus a flat charge per image), so they are exactly reproducible.
class StubReader : public ReaderClient {
 public:
  static constexpr std::uint64_t kImageTokens = 765;
  static constexpr std::string_view kFallback = "I cannot answer without context.";

  explicit StubReader(const QuerySet& queries);

  ReaderResponse answer(const std::string& question, std::span<const ContextItem> context) override;
  std::string identity() const override { return "stub-reader"; }

 private:
  std::unordered_map<std::string, std::string> references_;
};

/// True iff the answers match after case folding, whitespace collapsing and
/// trimming trailing punctuation.
class StubJudge : public JudgeClient {
 public:
  bool judge(const std::string& question, const std::string& system_answer,
             const std::string& reference_answer) override;
  std::string identity() const override { return "stub-judge"; }
};

std::size_t count_words(std::string_view text);
std::string normalize_answer(std::string_view text);

/// Context for one query. Standard mode takes the top k hits in rank order;
/// oracle takes the gold page; hard_negative takes the best-ranked hit that
/// is not the gold page; no_retrieval is empty.
/// Throws GoldNotFound, PayloadMissing, or InvalidParams when a run is
/// needed but absent.
std::vector<ContextItem> assemble_context(const QueryRecord& query, const RankedList* ranking,
                                          const RagConfig& config, const Corpus& corpus);

struct MajorityVerdict {
  std::optional<bool> verdict;  // nullopt when every vote abstained or votes tie
  std::vector<std::optional<bool>> votes;
  std::size_t abstentions = 0;
};

/// Asks the judge `votes` times (odd); a call that throws is retried once
/// and then counted as an abstention. The verdict is the majority of the
/// remaining votes.
MajorityVerdict judge_majority(const std::string& question, const std::string& system_answer,
                               const std::string& reference, JudgeClient& judge, int votes);

struct QaResult {
  std::string query_id;
  std::vector<std::string> context_page_ids;
  std::string answer;
  std::uint64_t input_tokens = 0;
  std::uint64_t output_tokens = 0;
  std::optional<std::string> error;
  std::vector<std::optional<bool>> verdicts;
  std::optional<bool> final_verdict;

  nlohmann::ordered_json to_json() const;
};

/// Generates answers for every query, up to `parallelism` reader calls at a
/// time, then judges them. Results come back in query order. A reader
/// failure is recorded on its query; when failures exceed
/// max_failure_rate of the queries the run throws RunAborted.
std::vector<QaResult> run_rag(const QuerySet& queries, const Corpus& corpus, const RetrievalRun* run,
                              ReaderClient& reader, JudgeClient& judge, const RagConfig& config);

/// Fraction of judged results whose final verdict is true. Throws
/// NoScoredResults when nothing was judged.
double alignment_score(std::span<const QaResult> results);

struct QaReport {
  nlohmann::ordered_json config;
  double alignment_score = 0.0;
  double avg_input_tokens = 0.0;
  double avg_output_tokens = 0.0;
  std::size_t scored = 0;
  std::size_t abstained = 0;
  std::size_t failed = 0;
  std::vector<QaResult> results;

  nlohmann::ordered_json to_json() const;
};

/// Token averages are over answered queries.
QaReport make_qa_report(std::vector<QaResult> results, const RagConfig& config, const std::string& reader_identity,
                        const std::string& judge_identity, const std::string& retriever);

/// OpenAI-compatible chat completion endpoints.
struct ServiceConfig {
  std::string url;  // full URL of the chat completions endpoint
  std::string model;
  std::string token;
  int timeout_seconds = 120;

  /// Reads <PREFIX>_URL, <PREFIX>_MODEL and <PREFIX>_TOKEN.
  static ServiceConfig from_env(const std::string& prefix);
};

std::unique_ptr<ReaderClient> make_http_reader(const ServiceConfig& config);
std::unique_ptr<JudgeClient> make_http_judge(const ServiceConfig& config);

/// Builds the reader request body; exposed for tests.
nlohmann::json reader_request(const std::string& model, const std::string& question,
                              std::span<const ContextItem> context);
nlohmann::json judge_request(const std::string& model, const std::string& question, const std::string& system_answer,
                             const std::string& reference_answer);
/// Parses a judge completion into a verdict; throws ServiceError when the
/// reply holds no recognisable boolean.
bool parse_judge_reply(std::string_view content);

}  // namespace docret
