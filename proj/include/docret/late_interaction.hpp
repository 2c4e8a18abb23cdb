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
#include <span>
#include <vector>

#include "docret/corpus.hpp"
#include "docret/kernels.hpp"
#include "docret/ranked_list.hpp"
#include "json.hpp"

namespace docret {

/// Sum over query tokens of the best raw dot product against any document
/// token. No renormalisation happens inside the kernel.
/// Throws EmptySet for an empty side and DimMismatch for unequal dims.
float maxsim(const VectorSetView& query, const VectorSetView& doc);

struct MaxSimHeatmap {
  std::size_t rows = 0;  // query tokens
  std::size_t cols = 0;  // document tokens
  std::vector<float> values;  // rows x cols dot products, row-major
  std::vector<std::size_t> argmax;  // per row, first column attaining the max
  std::vector<float> row_max;
  float total = 0.0f;  // sum of row maxima, equals maxsim()

  float at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  nlohmann::ordered_json to_json() const;
};

MaxSimHeatmap maxsim_heatmap(const VectorSetView& query, const VectorSetView& doc);

/// MaxSim of `query` against every page of a multi-vector channel, in page
/// ordinal order (pages without vectors are skipped). Pages are scored in
/// parallel under Exec::kParallel; the result does not depend on the policy.
std::vector<ScoredDoc> maxsim_scan(const EmbeddingChannel& channel, const VectorSetView& query,
                                   Exec exec = Exec::kParallel);

/// Exact MaxSim for a candidate subset, returned in candidate order.
std::vector<ScoredDoc> maxsim_rescore(const EmbeddingChannel& channel, const VectorSetView& query,
                                      std::span<const std::uint32_t> candidates, Exec exec = Exec::kParallel);

RankedList exact_maxsim_search(const Corpus& corpus, ChannelId channel, const VectorSetView& query,
                               std::size_t k, Exec exec = Exec::kParallel);

}  // namespace docret
