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

#include "docret/bm25.hpp"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "docret/error.hpp"

namespace docret {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  const auto* s = reinterpret_cast<const uint8_t*>(text.data());
  const auto length = static_cast<int32_t>(text.size());
  int32_t i = 0;
  while (i < length) {
    UChar32 c;
    U8_NEXT(s, i, length, c);
    if (c >= 0 && u_isalnum(c)) {
      const UChar32 lower = u_tolower(c);
      uint8_t buf[U8_MAX_LENGTH];
      int32_t n = 0;
      U8_APPEND_UNSAFE(buf, n, lower);
      current.append(reinterpret_cast<const char*>(buf), static_cast<std::size_t>(n));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

void Bm25Params::validate() const {
  if (!(k1 > 0.0)) throw Error(ErrorCode::kInvalidParams, "bm25 k1 must be positive");
  if (!(b >= 0.0 && b <= 1.0)) throw Error(ErrorCode::kInvalidParams, "bm25 b must lie in [0, 1]");
}

InvertedIndex InvertedIndex::build(std::span<const std::string> texts, Exec exec) {
  using TermCounts = std::vector<std::pair<std::string, std::uint32_t>>;
  std::vector<TermCounts> per_doc(texts.size());
  std::vector<std::uint32_t> lengths(texts.size(), 0);

  const auto n = static_cast<std::ptrdiff_t>(texts.size());
#pragma omp parallel for schedule(dynamic, 16) if (exec == Exec::kParallel)
  for (std::ptrdiff_t d = 0; d < n; ++d) {
    auto tokens = tokenize(texts[static_cast<std::size_t>(d)]);
    lengths[static_cast<std::size_t>(d)] = static_cast<std::uint32_t>(tokens.size());
    std::sort(tokens.begin(), tokens.end());
    TermCounts counts;
    for (auto& tok : tokens) {
      if (!counts.empty() && counts.back().first == tok) {
        ++counts.back().second;
      } else {
        counts.emplace_back(std::move(tok), 1);
      }
    }
    per_doc[static_cast<std::size_t>(d)] = std::move(counts);
  }

  InvertedIndex index;
  for (std::size_t d = 0; d < per_doc.size(); ++d) {
    for (auto& [term, tf] : per_doc[d]) {
      index.postings_[term].push_back(Posting{static_cast<std::uint32_t>(d), tf});
    }
  }
  index.doc_lengths_ = std::move(lengths);
  double total = 0.0;
  for (auto len : index.doc_lengths_) total += len;
  index.avg_doc_length_ = index.doc_lengths_.empty() ? 0.0 : total / static_cast<double>(index.doc_lengths_.size());
  return index;
}

const std::vector<Posting>* InvertedIndex::postings(const std::string& term) const {
  auto it = postings_.find(term);
  return it == postings_.end() ? nullptr : &it->second;
}

double InvertedIndex::idf(std::size_t df) const {
  const double n = static_cast<double>(doc_count());
  const double dfd = static_cast<double>(df);
  return std::log(1.0 + (n - dfd + 0.5) / (dfd + 0.5));
}

std::vector<std::pair<std::uint32_t, double>> InvertedIndex::score_all(std::string_view query,
                                                                       const Bm25Params& params) const {
  params.validate();
  std::vector<double> scores(doc_count(), 0.0);
  std::vector<char> touched(doc_count(), 0);
  for (const auto& term : tokenize(query)) {
    const auto* list = postings(term);
    if (list == nullptr) continue;
    const double w = idf(list->size());
    for (const auto& p : *list) {
      const double tf = p.tf;
      const double norm = params.k1 * (1.0 - params.b + params.b * doc_lengths_[p.ordinal] / avg_doc_length_);
      scores[p.ordinal] += w * tf * (params.k1 + 1.0) / (tf + norm);
      touched[p.ordinal] = 1;
    }
  }
  std::vector<std::pair<std::uint32_t, double>> out;
  for (std::size_t d = 0; d < scores.size(); ++d) {
    if (touched[d]) out.emplace_back(static_cast<std::uint32_t>(d), scores[d]);
  }
  return out;
}

std::vector<ScoredDoc> InvertedIndex::search(std::string_view query, const Bm25Params& params,
                                             std::size_t top_n) const {
  std::vector<ScoredDoc> docs;
  for (const auto& [ordinal, score] : score_all(query, params)) docs.push_back(ScoredDoc{ordinal, score});
  select_top_k(docs, top_n);
  return docs;
}

void InvertedIndex::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  auto put = [&](std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); };
  out.write("DRBM0001", 8);
  put(doc_lengths_.size());
  for (auto len : doc_lengths_) put(len);
  std::map<std::string, const std::vector<Posting>*> sorted;
  for (const auto& [term, list] : postings_) sorted.emplace(term, &list);
  put(sorted.size());
  for (const auto& [term, list] : sorted) {
    put(term.size());
    out.write(term.data(), static_cast<std::streamsize>(term.size()));
    put(list->size());
    for (const auto& p : *list) {
      put(p.ordinal);
      put(p.tf);
    }
  }
  if (!out) throw Error(ErrorCode::kIo, "short write to " + path.string());
}

InvertedIndex InvertedIndex::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIncompatibleStore, "missing index " + path.string());
  auto get = [&]() {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) throw Error(ErrorCode::kIncompatibleStore, "truncated index " + path.string());
    return v;
  };
  char magic[8];
  in.read(magic, 8);
  if (!in || std::string_view(magic, 8) != "DRBM0001") {
    throw Error(ErrorCode::kIncompatibleStore, "not a bm25 index: " + path.string());
  }
  InvertedIndex index;
  index.doc_lengths_.resize(get());
  double total = 0.0;
  for (auto& len : index.doc_lengths_) {
    len = static_cast<std::uint32_t>(get());
    total += len;
  }
  index.avg_doc_length_ = index.doc_lengths_.empty() ? 0.0 : total / static_cast<double>(index.doc_lengths_.size());
  const auto terms = get();
  for (std::uint64_t t = 0; t < terms; ++t) {
    std::string term(get(), '\0');
    in.read(term.data(), static_cast<std::streamsize>(term.size()));
    auto& list = index.postings_[term];
    list.resize(get());
    for (auto& p : list) {
      p.ordinal = static_cast<std::uint32_t>(get());
      p.tf = static_cast<std::uint32_t>(get());
    }
  }
  return index;
}

RankedList bm25_search(const InvertedIndex& index, const Corpus& corpus, std::string_view query,
                       const Bm25Params& params, std::size_t top_n) {
  if (index.doc_count() != corpus.page_count()) {
    throw Error(ErrorCode::kInvalidParams, "bm25 index was built for a different corpus");
  }
  RankedList list;
  list.retriever = "bm25";
  for (const auto& d : index.search(query, params, top_n)) {
    list.hits.push_back(Hit{corpus.page(d.ordinal).page_id, d.score});
  }
  return list;
}

}  // namespace docret
