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

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "docret/ranked_list.hpp"

namespace docret {

enum class Strategy { kRsf, kRrf };

std::string_view to_string(Strategy strategy);
Strategy parse_strategy(std::string_view name);

inline constexpr std::size_t kDefaultRrfK = 60;

/// Candidate depth each retriever contributes before fusion.
std::size_t default_pool(std::size_t k_eval);

/// Min-max maps scores onto [0, 1], keeping the order. A list whose scores
/// are all equal maps to 0.5. Throws EmptyList.
RankedList minmax_normalize(const RankedList& list);

struct FusionInput {
  const RankedList* list = nullptr;
  double weight = 0.0;
};

/// Fused hits plus, for every hit, the weighted contribution of each input
/// (in input order). Contributions of a hit sum to its fused score.
struct FusionResult {
  RankedList list;
  std::vector<std::string> inputs;
  std::vector<std::vector<double>> contributions;
};

/// Weighted fusion of one or more lists. Weights must be >= 0 with a
/// positive sum and are applied as given. Inputs with weight 0 are left out
/// entirely, so their documents do not enter the fused list.
/// RSF: sum of w * minmax score (absent -> 0). RRF: sum of
/// w / (rrf_k + rank), rank 1-based (absent -> 0).
FusionResult fuse(std::span<const FusionInput> inputs, Strategy strategy, std::size_t rrf_k = kDefaultRrfK);

/// Relative score fusion of at least two lists.
RankedList rsf(std::span<const RankedList> lists, std::span<const double> weights);

/// Reciprocal rank fusion of at least two lists, each with weight 1.
RankedList rrf(std::span<const RankedList> lists, std::size_t rrf_k = kDefaultRrfK);
/// Weighted variant: sum of w_i / (rrf_k + rank_i).
RankedList rrf(std::span<const RankedList> lists, std::span<const double> weights, std::size_t rrf_k);

/// BM25 and dense text fused with equal weights.
FusionResult hybrid_text(const RankedList& bm25, const RankedList& dense, Strategy strategy,
                         std::size_t rrf_k = kDefaultRrfK);

/// Hybrid text fused with an image list: weights (1 - alpha, alpha).
/// alpha = 0 reproduces the text ranking, alpha = 1 the image ranking.
FusionResult multimodal(const RankedList& hybrid_text_list, const RankedList& image_list, double alpha,
                        Strategy strategy, std::size_t rrf_k = kDefaultRrfK);

/// Share of each raw retriever (BM25, dense text, image) in a multimodal
/// fusion at `alpha`.
std::array<double, 3> effective_weights(double alpha);

}  // namespace docret
