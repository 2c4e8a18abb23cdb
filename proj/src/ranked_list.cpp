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

#include "docret/ranked_list.hpp"

#include <algorithm>
#include <unordered_set>

namespace docret {

bool ranks_before(const Hit& a, const Hit& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.page_id < b.page_id;
}

std::optional<std::size_t> RankedList::rank_of(const std::string& page_id) const {
  for (std::size_t i = 0; i < hits.size(); ++i) {
    if (hits[i].page_id == page_id) return i + 1;
  }
  return std::nullopt;
}

std::vector<std::string> RankedList::page_ids() const {
  std::vector<std::string> ids;
  ids.reserve(hits.size());
  for (const auto& h : hits) ids.push_back(h.page_id);
  return ids;
}

void sort_hits(std::vector<Hit>& hits) {
  std::sort(hits.begin(), hits.end(), ranks_before);
}

bool is_well_formed(const RankedList& list) {
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < list.hits.size(); ++i) {
    if (!seen.insert(list.hits[i].page_id).second) return false;
    if (i > 0 && !ranks_before(list.hits[i - 1], list.hits[i])) return false;
  }
  return true;
}

RankedList truncated(RankedList list, std::size_t depth) {
  if (list.hits.size() > depth) list.hits.resize(depth);
  return list;
}

void select_top_k(std::vector<ScoredDoc>& docs, std::size_t k) {
  if (k < docs.size()) {
    std::partial_sort(docs.begin(), docs.begin() + static_cast<std::ptrdiff_t>(k),
                      docs.end(), scored_before);
    docs.resize(k);
  } else {
    std::sort(docs.begin(), docs.end(), scored_before);
  }
}

}  // namespace docret
