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

#include "docret/rag.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <fstream>
#include <iterator>
#include <sstream>
#include <thread>

#include "docret/checksum.hpp"
#include "docret/error.hpp"

namespace docret {

std::string_view to_string(Modality modality) { return modality == Modality::kText ? "text" : "image"; }

Modality parse_modality(std::string_view name) {
  if (name == "text") return Modality::kText;
  if (name == "image") return Modality::kImage;
  throw Error(ErrorCode::kInvalidParams, "unknown modality '" + std::string(name) + "'");
}

std::string_view to_string(RagMode mode) {
  switch (mode) {
    case RagMode::kStandard: return "standard";
    case RagMode::kNoRetrieval: return "no_retrieval";
    case RagMode::kHardNegative: return "hard_negative";
    case RagMode::kOracle: return "oracle";
  }
  return "standard";
}

RagMode parse_rag_mode(std::string_view name) {
  if (name == "standard") return RagMode::kStandard;
  if (name == "no_retrieval") return RagMode::kNoRetrieval;
  if (name == "hard_negative") return RagMode::kHardNegative;
  if (name == "oracle") return RagMode::kOracle;
  throw Error(ErrorCode::kInvalidParams, "unknown rag mode '" + std::string(name) + "'");
}

void RagConfig::validate() const {
  if (k == 0) throw Error(ErrorCode::kInvalidParams, "k must be positive");
  if (judge_votes <= 0 || judge_votes % 2 == 0) {
    throw Error(ErrorCode::kInvalidParams, "judge votes must be a positive odd number");
  }
  if (parallelism == 0) throw Error(ErrorCode::kInvalidParams, "parallelism must be positive");
  if (!(max_failure_rate >= 0.0 && max_failure_rate <= 1.0)) {
    throw Error(ErrorCode::kInvalidParams, "failure rate must be in [0, 1]");
  }
}

nlohmann::ordered_json RagConfig::to_json() const {
  nlohmann::ordered_json j;
  j["modality"] = to_string(modality);
  j["mode"] = to_string(mode);
  if (mode != RagMode::kNoRetrieval) j["k"] = k;
  j["judge_votes"] = judge_votes;
  j["exclude_gold_document"] = exclude_gold_document;
  j["max_failure_rate"] = max_failure_rate;
  return j;
}

std::size_t count_words(std::string_view text) {
  std::size_t n = 0;
  bool in_word = false;
  for (unsigned char c : text) {
    const bool space = std::isspace(c) != 0;
    if (!space && !in_word) ++n;
    in_word = !space;
  }
  return n;
}

std::string normalize_answer(std::string_view text) {
  std::string out;
  bool pending_space = false;
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  while (!out.empty() && std::ispunct(static_cast<unsigned char>(out.back()))) out.pop_back();
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

StubReader::StubReader(const QuerySet& queries) {
  for (const auto& q : queries.records()) references_.try_emplace(q.question, q.reference_answer);
}

ReaderResponse StubReader::answer(const std::string& question, std::span<const ContextItem> context) {
  ReaderResponse r;
  const auto it = references_.find(question);
  r.answer = (context.empty() || it == references_.end()) ? std::string(kFallback) : it->second;
  r.input_tokens = count_words(question);
  for (const auto& item : context) r.input_tokens += item.is_image() ? kImageTokens : count_words(item.text);
  r.output_tokens = count_words(r.answer);
  return r;
}

bool StubJudge::judge(const std::string&, const std::string& system_answer, const std::string& reference_answer) {
  return normalize_answer(system_answer) == normalize_answer(reference_answer);
}

namespace {

std::string mime_for(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  if (ext == ".webp") return "image/webp";
  if (ext == ".gif") return "image/gif";
  return "image/png";
}

ContextItem payload(const PageRecord& page, const RagConfig& config) {
  ContextItem item;
  item.page_id = page.page_id;
  if (config.modality == Modality::kText) {
    if (page.text.empty()) throw Error(ErrorCode::kPayloadMissing, "page '" + page.page_id + "' has no text");
    item.text = page.text;
    return item;
  }
  if (!page.image_ref || page.image_ref->empty()) {
    throw Error(ErrorCode::kPayloadMissing, "page '" + page.page_id + "' has no image");
  }
  const std::string& ref = *page.image_ref;
  if (ref.rfind("data:", 0) == 0) {
    const auto comma = ref.find(',');
    const auto semi = ref.find(';');
    if (comma == std::string::npos || semi == std::string::npos || semi > comma) {
      throw Error(ErrorCode::kPayloadMissing, "page '" + page.page_id + "' has a malformed data URL");
    }
    item.mime_type = ref.substr(5, semi - 5);
    item.image_bytes = base64_decode(std::string_view(ref).substr(comma + 1));
  } else {
    std::filesystem::path path(ref);
    if (path.is_relative() && !config.image_root.empty()) path = config.image_root / path;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::kPayloadMissing, "image of page '" + page.page_id + "' not readable: " + path.string());
    item.image_bytes.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    item.mime_type = mime_for(path);
  }
  if (item.image_bytes.empty()) throw Error(ErrorCode::kPayloadMissing, "image of page '" + page.page_id + "' is empty");
  return item;
}

const PageRecord& gold_page(const QueryRecord& query, const Corpus& corpus) {
  const auto gold = corpus.ordinal_of(query.gold_page_id);
  if (!gold) {
    throw Error(ErrorCode::kGoldNotFound,
                "gold page '" + query.gold_page_id + "' of query '" + query.query_id + "' is not in the corpus");
  }
  return corpus.page(*gold);
}

const RankedList& need_ranking(const RankedList* ranking, const QueryRecord& query) {
  if (ranking == nullptr) {
    throw Error(ErrorCode::kInvalidParams, "query '" + query.query_id + "' needs a retrieval run");
  }
  return *ranking;
}

template <typename Body>
void run_workers(std::size_t n, std::size_t parallelism, const Body& body) {
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) body(i);
  };
  const std::size_t threads = std::min(parallelism, n);
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  if (threads > 0) worker();
  for (auto& t : pool) t.join();
}

}  // namespace

std::vector<ContextItem> assemble_context(const QueryRecord& query, const RankedList* ranking, const RagConfig& config,
                                          const Corpus& corpus) {
  config.validate();
  std::vector<ContextItem> items;
  switch (config.mode) {
    case RagMode::kNoRetrieval:
      break;
    case RagMode::kOracle:
      items.push_back(payload(gold_page(query, corpus), config));
      break;
    case RagMode::kHardNegative: {
      const auto& gold = gold_page(query, corpus);
      for (const auto& hit : need_ranking(ranking, query).hits) {
        if (hit.page_id == gold.page_id) continue;
        const auto o = corpus.ordinal_of(hit.page_id);
        if (!o) throw Error(ErrorCode::kUnknownPage, "ranked page '" + hit.page_id + "' is not in the corpus");
        const auto& page = corpus.page(*o);
        if (config.exclude_gold_document && page.doc_id == gold.doc_id) continue;
        items.push_back(payload(page, config));
        break;
      }
      break;
    }
    case RagMode::kStandard: {
      const auto& list = need_ranking(ranking, query);
      for (std::size_t r = 0; r < list.hits.size() && items.size() < config.k; ++r) {
        const auto o = corpus.ordinal_of(list.hits[r].page_id);
        if (!o) throw Error(ErrorCode::kUnknownPage, "ranked page '" + list.hits[r].page_id + "' is not in the corpus");
        items.push_back(payload(corpus.page(*o), config));
      }
      break;
    }
  }
  return items;
}

MajorityVerdict judge_majority(const std::string& question, const std::string& system_answer,
                               const std::string& reference, JudgeClient& judge, int votes) {
  if (votes <= 0 || votes % 2 == 0) throw Error(ErrorCode::kInvalidParams, "judge votes must be a positive odd number");
  MajorityVerdict m;
  std::size_t yes = 0;
  std::size_t no = 0;
  for (int v = 0; v < votes; ++v) {
    std::optional<bool> vote;
    for (int attempt = 0; attempt < 2 && !vote; ++attempt) {
      try {
        vote = judge.judge(question, system_answer, reference);
      } catch (const std::exception&) {
      }
    }
    if (!vote) ++m.abstentions;
    else if (*vote) ++yes;
    else ++no;
    m.votes.push_back(vote);
  }
  if (yes > no) m.verdict = true;
  else if (no > yes) m.verdict = false;
  return m;
}

nlohmann::ordered_json QaResult::to_json() const {
  nlohmann::ordered_json j;
  j["query_id"] = query_id;
  j["context"] = context_page_ids;
  j["answer"] = answer;
  j["input_tokens"] = input_tokens;
  j["output_tokens"] = output_tokens;
  j["error"] = error ? nlohmann::ordered_json(*error) : nlohmann::ordered_json(nullptr);
  auto v = nlohmann::ordered_json::array();
  for (const auto& x : verdicts) v.push_back(x ? nlohmann::ordered_json(*x) : nlohmann::ordered_json(nullptr));
  j["verdicts"] = std::move(v);
  j["verdict"] = final_verdict ? nlohmann::ordered_json(*final_verdict) : nlohmann::ordered_json(nullptr);
  return j;
}

std::vector<QaResult> run_rag(const QuerySet& queries, const Corpus& corpus, const RetrievalRun* run,
                              ReaderClient& reader, JudgeClient& judge, const RagConfig& config) {
  config.validate();
  queries.bind(corpus);
  if (config.mode != RagMode::kNoRetrieval && config.mode != RagMode::kOracle) {
    if (run == nullptr) throw Error(ErrorCode::kInvalidParams, std::string(to_string(config.mode)) + " needs a run");
    check_run(*run, queries);
  }
  const std::size_t n = queries.size();
  std::vector<std::vector<ContextItem>> contexts(n);
  std::vector<QaResult> results(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& q = queries.records()[i];
    contexts[i] = assemble_context(q, run ? &run->lists[i] : nullptr, config, corpus);
    results[i].query_id = q.query_id;
    for (const auto& item : contexts[i]) results[i].context_page_ids.push_back(item.page_id);
  }

  const double allowed = config.max_failure_rate * static_cast<double>(n);
  std::atomic<std::size_t> failures{0};
  std::atomic<bool> aborted{false};
  run_workers(n, config.parallelism, [&](std::size_t i) {
    if (aborted) return;
    try {
      const auto r = reader.answer(queries.records()[i].question, contexts[i]);
      results[i].answer = r.answer;
      results[i].input_tokens = r.input_tokens;
      results[i].output_tokens = r.output_tokens;
    } catch (const std::exception& e) {
      results[i].error = e.what();
      if (static_cast<double>(++failures) > allowed) aborted = true;
    }
  });
  if (aborted) {
    throw Error(ErrorCode::kRunAborted, std::to_string(failures.load()) + " of " + std::to_string(n) +
                                            " reader calls failed");
  }

  run_workers(n, config.parallelism, [&](std::size_t i) {
    if (results[i].error) return;
    const auto& q = queries.records()[i];
    auto m = judge_majority(q.question, results[i].answer, q.reference_answer, judge, config.judge_votes);
    results[i].verdicts = std::move(m.votes);
    results[i].final_verdict = m.verdict;
  });
  return results;
}

double alignment_score(std::span<const QaResult> results) {
  std::size_t scored = 0;
  std::size_t yes = 0;
  for (const auto& r : results) {
    if (!r.final_verdict) continue;
    ++scored;
    yes += *r.final_verdict ? 1 : 0;
  }
  if (scored == 0) throw Error(ErrorCode::kNoScoredResults, "no query received a verdict");
  return static_cast<double>(yes) / static_cast<double>(scored);
}

nlohmann::ordered_json QaReport::to_json() const {
  nlohmann::ordered_json j;
  j["config"] = config;
  j["alignment_score"] = alignment_score;
  j["avg_input_tokens"] = avg_input_tokens;
  j["avg_output_tokens"] = avg_output_tokens;
  j["scored"] = scored;
  j["abstained"] = abstained;
  j["failed"] = failed;
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : results) arr.push_back(r.to_json());
  j["per_query"] = std::move(arr);
  return j;
}

QaReport make_qa_report(std::vector<QaResult> results, const RagConfig& config, const std::string& reader_identity,
                        const std::string& judge_identity, const std::string& retriever) {
  QaReport report;
  report.config = config.to_json();
  report.config["retriever"] = retriever;
  report.config["reader"] = reader_identity;
  report.config["judge"] = judge_identity;
  std::uint64_t in_total = 0;
  std::uint64_t out_total = 0;
  std::size_t answered = 0;
  for (const auto& r : results) {
    if (r.error) {
      ++report.failed;
      continue;
    }
    ++answered;
    in_total += r.input_tokens;
    out_total += r.output_tokens;
    if (r.final_verdict) ++report.scored;
    else ++report.abstained;
  }
  if (answered > 0) {
    report.avg_input_tokens = static_cast<double>(in_total) / static_cast<double>(answered);
    report.avg_output_tokens = static_cast<double>(out_total) / static_cast<double>(answered);
  }
  report.alignment_score = alignment_score(results);
  report.results = std::move(results);
  return report;
}

}  // namespace docret
