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

#include "docret/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "docret/error.hpp"

namespace docret {

std::string_view to_string(Strategy strategy) { return strategy == Strategy::kRsf ? "rsf" : "rrf"; }

Strategy parse_strategy(std::string_view name) {
  if (name == "rsf") return Strategy::kRsf;
  if (name == "rrf") return Strategy::kRrf;
  throw Error(ErrorCode::kInvalidParams, "unknown fusion strategy '" + std::string(name) + "'");
}

std::size_t default_pool(std::size_t k_eval) { return std::max<std::size_t>(100, 5 * k_eval); }

RankedList minmax_normalize(const RankedList& list) {
  if (list.empty()) throw Error(ErrorCode::kEmptyList, "cannot normalise an empty list");
  double lo = list.hits.front().score;
  double hi = lo;
  for (const auto& h : list.hits) {
    lo = std::min(lo, h.score);
    hi = std::max(hi, h.score);
  }
  RankedList out;
  out.retriever = list.retriever;
  out.hits.reserve(list.size());
  const double span = hi - lo;
  for (const auto& h : list.hits) out.hits.push_back(Hit{h.page_id, span > 0.0 ? (h.score - lo) / span : 0.5});
  return out;
}

FusionResult fuse(std::span<const FusionInput> inputs, Strategy strategy, std::size_t rrf_k) {
  if (inputs.empty()) throw Error(ErrorCode::kInvalidParams, "fusion needs at least one list");
  double total = 0.0;
  for (const auto& in : inputs) {
    if (in.list == nullptr) throw Error(ErrorCode::kInvalidParams, "null fusion input");
    if (!std::isfinite(in.weight) || in.weight < 0.0) {
      throw Error(ErrorCode::kInvalidParams, "fusion weights must be finite and non-negative");
    }
    if (!is_well_formed(*in.list)) {
      throw Error(ErrorCode::kInvalidParams, "fusion input '" + in.list->retriever + "' is not a ranked list");
    }
    total += in.weight;
  }
  if (!(total > 0.0)) throw Error(ErrorCode::kInvalidParams, "fusion weights sum to zero");
  if (strategy == Strategy::kRrf && rrf_k == 0) throw Error(ErrorCode::kInvalidParams, "rrf_k must be positive");

  const std::size_t n_inputs = inputs.size();
  std::vector<std::string> ids;
  std::vector<std::vector<double>> parts;
  std::unordered_map<std::string, std::size_t> slot;
  for (std::size_t i = 0; i < n_inputs; ++i) {
    const auto& in = inputs[i];
    if (in.weight == 0.0 || in.list->empty()) continue;
    const double w = in.weight;
    const RankedList scored = strategy == Strategy::kRsf ? minmax_normalize(*in.list) : *in.list;
    for (std::size_t r = 0; r < scored.size(); ++r) {
      const auto& hit = scored.hits[r];
      const double value =
          strategy == Strategy::kRsf ? w * hit.score : w / static_cast<double>(rrf_k + r + 1);
      auto [it, fresh] = slot.try_emplace(hit.page_id, ids.size());
      if (fresh) {
        ids.push_back(hit.page_id);
        parts.emplace_back(n_inputs, 0.0);
      }
      parts[it->second][i] = value;
    }
  }

  std::vector<Hit> hits(ids.size());
  for (std::size_t d = 0; d < ids.size(); ++d) {
    double score = 0.0;
    for (double p : parts[d]) score += p;
    hits[d] = Hit{ids[d], score};
  }
  std::vector<std::size_t> order(ids.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ranks_before(hits[a], hits[b]); });

  FusionResult result;
  result.list.retriever = std::string(to_string(strategy));
  result.list.hits.reserve(order.size());
  result.contributions.reserve(order.size());
  for (std::size_t d : order) {
    result.list.hits.push_back(std::move(hits[d]));
    result.contributions.push_back(std::move(parts[d]));
  }
  for (const auto& in : inputs) result.inputs.push_back(in.list->retriever);
  return result;
}

namespace {

std::vector<FusionInput> pair_up(std::span<const RankedList> lists, std::span<const double> weights) {
  if (lists.size() < 2) throw Error(ErrorCode::kInvalidParams, "fusion needs at least two lists");
  if (weights.size() != lists.size()) {
    throw Error(ErrorCode::kInvalidParams, std::to_string(weights.size()) + " weights for " +
                                               std::to_string(lists.size()) + " lists");
  }
  std::vector<FusionInput> inputs;
  for (std::size_t i = 0; i < lists.size(); ++i) inputs.push_back(FusionInput{&lists[i], weights[i]});
  return inputs;
}

}  // namespace

RankedList rsf(std::span<const RankedList> lists, std::span<const double> weights) {
  return fuse(pair_up(lists, weights), Strategy::kRsf).list;
}

RankedList rrf(std::span<const RankedList> lists, std::size_t rrf_k) {
  const std::vector<double> ones(lists.size(), 1.0);
  return fuse(pair_up(lists, ones), Strategy::kRrf, rrf_k).list;
}

RankedList rrf(std::span<const RankedList> lists, std::span<const double> weights, std::size_t rrf_k) {
  return fuse(pair_up(lists, weights), Strategy::kRrf, rrf_k).list;
}

FusionResult hybrid_text(const RankedList& bm25, const RankedList& dense, Strategy strategy, std::size_t rrf_k) {
  const std::array<FusionInput, 2> inputs{FusionInput{&bm25, 0.5}, FusionInput{&dense, 0.5}};
  auto result = fuse(inputs, strategy, rrf_k);
  result.list.retriever = "hybrid-" + result.list.retriever;
  return result;
}

FusionResult multimodal(const RankedList& hybrid_text_list, const RankedList& image_list, double alpha,
                        Strategy strategy, std::size_t rrf_k) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error(ErrorCode::kInvalidParams, "alpha must be in [0, 1]");
  const std::array<FusionInput, 2> inputs{FusionInput{&hybrid_text_list, 1.0 - alpha},
                                          FusionInput{&image_list, alpha}};
  auto result = fuse(inputs, strategy, rrf_k);
  result.list.retriever = "multimodal-" + result.list.retriever;
  return result;
}

std::array<double, 3> effective_weights(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error(ErrorCode::kInvalidParams, "alpha must be in [0, 1]");
  return {(1.0 - alpha) * 0.5, (1.0 - alpha) * 0.5, alpha};
}

}  // namespace docret
