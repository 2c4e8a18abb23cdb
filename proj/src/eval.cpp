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

#include "docret/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <exception>
#include <sstream>

#include "docret/error.hpp"

namespace docret {

namespace {

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string alpha_label(double alpha) {
  std::ostringstream os;
  os << alpha;
  return os.str();
}

// Runs body(i) for i in [0, n), rethrowing the first exception raised.
template <typename Body>
void for_each_index(std::size_t n, Exec exec, const Body& body) {
  std::exception_ptr failure;
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 1) if (exec == Exec::kParallel)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(docret_eval_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

const RankedList& RetrievalRun::list_for(const std::string& query_id) const {
  const auto it = std::find(query_ids.begin(), query_ids.end(), query_id);
  if (it == query_ids.end()) throw Error(ErrorCode::kQuerySetMismatch, "run has no query '" + query_id + "'");
  return lists[static_cast<std::size_t>(it - query_ids.begin())];
}

RetrievalRun make_run(std::string name, nlohmann::ordered_json config, const Corpus& corpus, const QuerySet& queries,
                      const std::function<RankedList(std::uint32_t)>& retrieve, Exec exec) {
  queries.bind(corpus);
  RetrievalRun run;
  run.name = std::move(name);
  run.config = std::move(config);
  run.corpus_checksum = corpus.checksum();
  run.lists.resize(queries.size());
  for (const auto& q : queries.records()) run.query_ids.push_back(q.query_id);
  for_each_index(queries.size(), exec,
                 [&](std::size_t i) { run.lists[i] = retrieve(static_cast<std::uint32_t>(i)); });
  return run;
}

void check_run(const RetrievalRun& run, const QuerySet& queries) {
  bool same = run.query_ids.size() == queries.size() && run.lists.size() == queries.size();
  for (std::size_t i = 0; same && i < queries.size(); ++i) same = run.query_ids[i] == queries.records()[i].query_id;
  if (!same) throw Error(ErrorCode::kQuerySetMismatch, "run '" + run.name + "' does not cover the query set");
}

std::optional<std::size_t> gold_rank(const RankedList& list, const QueryRecord& query, const Corpus& corpus,
                                     bool doc_level) {
  const auto gold = corpus.ordinal_of(query.gold_page_id);
  if (!gold) {
    throw Error(ErrorCode::kGoldNotFound,
                "gold page '" + query.gold_page_id + "' of query '" + query.query_id + "' is not in the corpus");
  }
  if (!doc_level) return list.rank_of(query.gold_page_id);
  const auto& gold_doc = corpus.page(*gold).doc_id;
  for (std::size_t r = 0; r < list.hits.size(); ++r) {
    const auto o = corpus.ordinal_of(list.hits[r].page_id);
    if (o && corpus.page(*o).doc_id == gold_doc) return r + 1;
  }
  return std::nullopt;
}

double recall_at_k(const RetrievalRun& run, const QuerySet& queries, const Corpus& corpus, std::size_t k,
                   bool doc_level) {
  check_run(run, queries);
  if (queries.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const auto r = gold_rank(run.lists[i], queries.records()[i], corpus, doc_level);
    if (r && *r <= k) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(queries.size());
}

double RecallReport::at(std::size_t k) const {
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (ks[i] == k) return recall[i];
  }
  throw Error(ErrorCode::kInvalidParams, "report has no Recall@" + std::to_string(k));
}

nlohmann::ordered_json RecallReport::to_json() const {
  nlohmann::ordered_json j;
  j["name"] = name;
  j["config"] = config;
  j["corpus_checksum"] = corpus_checksum;
  j["doc_level"] = doc_level;
  nlohmann::ordered_json rec = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < ks.size(); ++i) rec[std::to_string(ks[i])] = recall[i];
  j["recall"] = std::move(rec);
  auto per_query = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < query_ids.size(); ++i) {
    nlohmann::ordered_json q;
    q["query_id"] = query_ids[i];
    q["gold_rank"] = gold_ranks[i] ? nlohmann::ordered_json(*gold_ranks[i]) : nlohmann::ordered_json(nullptr);
    per_query.push_back(std::move(q));
  }
  j["per_query"] = std::move(per_query);
  return j;
}

RecallReport RecallReport::from_json(const nlohmann::ordered_json& j) {
  RecallReport r;
  try {
    r.name = j.value("name", "");
    r.config = j.value("config", nlohmann::ordered_json::object());
    r.corpus_checksum = j.value("corpus_checksum", "");
    r.doc_level = j.value("doc_level", false);
    std::vector<std::pair<std::size_t, double>> rec;
    for (const auto& [key, value] : j.at("recall").items()) rec.emplace_back(std::stoul(key), value.get<double>());
    std::sort(rec.begin(), rec.end());
    for (const auto& [k, v] : rec) {
      r.ks.push_back(k);
      r.recall.push_back(v);
    }
    for (const auto& q : j.at("per_query")) {
      r.query_ids.push_back(q.at("query_id").get<std::string>());
      const auto& rank = q.at("gold_rank");
      r.gold_ranks.push_back(rank.is_null() ? std::nullopt : std::optional<std::size_t>(rank.get<std::size_t>()));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("malformed report: ") + e.what());
  } catch (const std::logic_error& e) {
    throw Error(ErrorCode::kParseError, std::string("malformed report: ") + e.what());
  }
  return r;
}

RecallReport evaluate(const RetrievalRun& run, const QuerySet& queries, const Corpus& corpus,
                      const std::vector<std::size_t>& ks, bool doc_level) {
  check_run(run, queries);
  if (ks.empty()) throw Error(ErrorCode::kInvalidParams, "no K values to report");
  RecallReport r;
  r.name = run.name;
  r.config = run.config;
  r.corpus_checksum = run.corpus_checksum;
  r.doc_level = doc_level;
  r.ks = ks;
  std::sort(r.ks.begin(), r.ks.end());
  r.ks.erase(std::unique(r.ks.begin(), r.ks.end()), r.ks.end());
  if (r.ks.front() == 0) throw Error(ErrorCode::kInvalidParams, "K must be positive");
  for (std::size_t i = 0; i < queries.size(); ++i) {
    r.query_ids.push_back(queries.records()[i].query_id);
    r.gold_ranks.push_back(gold_rank(run.lists[i], queries.records()[i], corpus, doc_level));
  }
  for (std::size_t k : r.ks) {
    std::size_t hits = 0;
    for (const auto& g : r.gold_ranks) hits += (g && *g <= k) ? 1 : 0;
    r.recall.push_back(queries.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(queries.size()));
  }
  return r;
}

nlohmann::ordered_json ComplementarityReport::to_json() const {
  nlohmann::ordered_json j;
  j["k"] = k;
  j["a"] = a;
  j["b"] = b;
  j["counts"] = {{"a_only", a_only.size()}, {"b_only", b_only.size()}, {"both", both.size()}, {"neither", neither.size()}};
  j["a_only"] = a_only;
  j["b_only"] = b_only;
  j["both"] = both;
  j["neither"] = neither;
  return j;
}

ComplementarityReport exclusive_successes(const RecallReport& a, const RecallReport& b, std::size_t k) {
  if (a.query_ids != b.query_ids) {
    throw Error(ErrorCode::kQuerySetMismatch, "'" + a.name + "' and '" + b.name + "' cover different queries");
  }
  ComplementarityReport c;
  c.k = k;
  c.a = a.name;
  c.b = b.name;
  for (std::size_t i = 0; i < a.query_ids.size(); ++i) {
    const bool ha = a.gold_ranks[i] && *a.gold_ranks[i] <= k;
    const bool hb = b.gold_ranks[i] && *b.gold_ranks[i] <= k;
    auto& cell = ha ? (hb ? c.both : c.a_only) : (hb ? c.b_only : c.neither);
    cell.push_back(a.query_ids[i]);
  }
  return c;
}

ComplementarityReport exclusive_successes(const RetrievalRun& a, const RetrievalRun& b, const QuerySet& queries,
                                          const Corpus& corpus, std::size_t k) {
  if (a.query_ids != b.query_ids) {
    throw Error(ErrorCode::kQuerySetMismatch, "'" + a.name + "' and '" + b.name + "' cover different queries");
  }
  return exclusive_successes(evaluate(a, queries, corpus, {k}), evaluate(b, queries, corpus, {k}), k);
}

std::vector<double> default_alpha_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 10; ++i) grid.push_back(i / 10.0);
  return grid;
}

std::vector<SweepEntry> alpha_sweep(const RetrievalRun& text, const RetrievalRun& image, const QuerySet& queries,
                                    const Corpus& corpus, const SweepOptions& options) {
  if (options.alphas.empty() || options.strategies.empty()) {
    throw Error(ErrorCode::kInvalidParams, "alpha grid and strategies must be non-empty");
  }
  check_run(text, queries);
  check_run(image, queries);
  const std::size_t n = queries.size();
  std::vector<RankedList> text_pool(n);
  std::vector<RankedList> image_pool(n);
  for (std::size_t i = 0; i < n; ++i) {
    text_pool[i] = truncated(text.lists[i], options.pool);
    image_pool[i] = truncated(image.lists[i], options.pool);
  }
  std::vector<SweepEntry> out;
  for (Strategy strategy : options.strategies) {
    for (double alpha : options.alphas) {
      RetrievalRun run;
      run.name = "multimodal-" + std::string(to_string(strategy)) + " alpha=" + alpha_label(alpha);
      run.config["retriever"] = "multimodal";
      run.config["strategy"] = to_string(strategy);
      run.config["alpha"] = alpha;
      run.config["pool"] = options.pool;
      run.config["rrf_k"] = options.rrf_k;
      run.config["text"] = text.name;
      run.config["image"] = image.name;
      run.corpus_checksum = text.corpus_checksum;
      run.query_ids = text.query_ids;
      run.lists.resize(n);
      for_each_index(n, Exec::kParallel, [&](std::size_t i) {
        run.lists[i] = multimodal(text_pool[i], image_pool[i], alpha, strategy, options.rrf_k).list;
      });
      out.push_back(SweepEntry{alpha, strategy, evaluate(run, queries, corpus, options.ks)});
    }
  }
  return out;
}

std::string emit_report(const std::vector<RecallReport>& reports, ReportFormat format) {
  if (format == ReportFormat::kJson) {
    if (reports.size() == 1) return reports.front().to_json().dump(2) + "\n";
    nlohmann::ordered_json j;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& r : reports) arr.push_back(r.to_json());
    j["reports"] = std::move(arr);
    return j.dump(2) + "\n";
  }

  std::ostringstream md;
  if (reports.size() == 1) {
    const auto& r = reports.front();
    md << "### " << r.name << "\n\n| K | Recall@K |\n|---|---|\n";
    for (std::size_t i = 0; i < r.ks.size(); ++i) md << "| " << r.ks[i] << " | " << fixed4(r.recall[i]) << " |\n";
    md << "\nconfig: `" << r.config.dump() << "`\n";
    md << "corpus: `" << r.corpus_checksum << "`\n";
    return md.str();
  }
  if (reports.empty()) return "";

  const auto& ks = reports.front().ks;
  std::vector<double> best(ks.size(), -1.0);
  for (const auto& r : reports) {
    for (std::size_t i = 0; i < ks.size(); ++i) best[i] = std::max(best[i], r.at(ks[i]));
  }
  md << "| Run |";
  for (std::size_t k : ks) md << " Recall@" << k << " |";
  md << " Config |\n|---|";
  for (std::size_t i = 0; i < ks.size(); ++i) md << "---|";
  md << "---|\n";
  for (const auto& r : reports) {
    md << "| " << r.name << " |";
    for (std::size_t i = 0; i < ks.size(); ++i) {
      const double v = r.at(ks[i]);
      md << (v == best[i] ? " **" + fixed4(v) + "** |" : " " + fixed4(v) + " |");
    }
    md << " `" << r.config.dump() << "` |\n";
  }
  md << "\ncorpus: `" << reports.front().corpus_checksum << "`\n";
  return md.str();
}

std::vector<RecallReport> parse_reports(const std::string& json_text) {
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("report is not JSON: ") + e.what());
  }
  std::vector<RecallReport> out;
  if (j.contains("reports")) {
    for (const auto& r : j.at("reports")) out.push_back(RecallReport::from_json(r));
  } else {
    out.push_back(RecallReport::from_json(j));
  }
  return out;
}

std::string emit_complementarity(const ComplementarityReport& report, ReportFormat format) {
  if (format == ReportFormat::kJson) return report.to_json().dump(2) + "\n";
  std::ostringstream md;
  md << "| @" << report.k << " | " << report.b << " hit | " << report.b << " miss |\n|---|---|---|\n";
  md << "| " << report.a << " hit | " << report.both.size() << " | " << report.a_only.size() << " |\n";
  md << "| " << report.a << " miss | " << report.b_only.size() << " | " << report.neither.size() << " |\n";
  return md.str();
}

}  // namespace docret
