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
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace docret {

struct Hit {
  std::string page_id;
  double score = 0.0;

  bool operator==(const Hit&) const = default;
};

/// Descending score, ascending page_id on ties.
bool ranks_before(const Hit& a, const Hit& b);

/// Per-query ordered hits; the currency shared by retrievers, fusion and
/// metrics. `hits` is kept in ranks_before order with unique page ids.
struct RankedList {
  std::string retriever;
  std::vector<Hit> hits;

  std::size_t size() const { return hits.size(); }
  bool empty() const { return hits.empty(); }

  /// 1-based rank of `page_id`, if present.
  std::optional<std::size_t> rank_of(const std::string& page_id) const;

  std::vector<std::string> page_ids() const;
};

void sort_hits(std::vector<Hit>& hits);

/// True when hits are strictly ordered by ranks_before and ids are unique.
bool is_well_formed(const RankedList& list);

RankedList truncated(RankedList list, std::size_t depth);

/// Internal scored result keyed by page ordinal. Page ordinals follow
/// ascending page_id order, so ordinal tiebreaks match page_id tiebreaks.
struct ScoredDoc {
  std::uint32_t ordinal = 0;
  double score = 0.0;

  bool operator==(const ScoredDoc&) const = default;
};

inline bool scored_before(const ScoredDoc& a, const ScoredDoc& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.ordinal < b.ordinal;
}

/// Keeps the best `k` entries in scored_before order.
void select_top_k(std::vector<ScoredDoc>& docs, std::size_t k);

}  // namespace docret
