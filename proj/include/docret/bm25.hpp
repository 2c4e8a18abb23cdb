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
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "docret/corpus.hpp"
#include "docret/kernels.hpp"
#include "docret/ranked_list.hpp"

namespace docret {

/// Lowercased runs of Unicode letters/digits; everything else separates.
/// No stemming, no stopwords.
std::vector<std::string> tokenize(std::string_view text);

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;

  void validate() const;
};

struct Posting {
  std::uint32_t ordinal = 0;
  std::uint32_t tf = 0;

  bool operator==(const Posting&) const = default;
};

/// Okapi BM25 with idf = ln(1 + (N - df + 0.5) / (df + 0.5)).
class InvertedIndex {
 public:
  InvertedIndex() = default;

  /// Tokenisation runs in parallel under Exec::kParallel; postings are
  /// merged in ordinal order so both policies build identical indexes.
  static InvertedIndex build(std::span<const std::string> texts, Exec exec = Exec::kParallel);

  std::size_t doc_count() const { return doc_lengths_.size(); }
  double avg_doc_length() const { return avg_doc_length_; }
  const std::vector<std::uint32_t>& doc_lengths() const { return doc_lengths_; }
  const std::vector<Posting>* postings(const std::string& term) const;
  std::size_t vocabulary_size() const { return postings_.size(); }

  double idf(std::size_t df) const;

  /// Every query token counts, so repeated terms add their contribution
  /// again. Only documents matching at least one term are returned.
  std::vector<ScoredDoc> search(std::string_view query, const Bm25Params& params, std::size_t top_n) const;
  /// Full-precision scores of all matching documents, unsorted.
  std::vector<std::pair<std::uint32_t, double>> score_all(std::string_view query, const Bm25Params& params) const;

  void save(const std::filesystem::path& path) const;
  static InvertedIndex load(const std::filesystem::path& path);

  bool operator==(const InvertedIndex&) const = default;

 private:
  std::unordered_map<std::string, std::vector<Posting>> postings_;
  std::vector<std::uint32_t> doc_lengths_;
  double avg_doc_length_ = 0.0;
};

RankedList bm25_search(const InvertedIndex& index, const Corpus& corpus, std::string_view query,
                       const Bm25Params& params, std::size_t top_n);

}  // namespace docret
