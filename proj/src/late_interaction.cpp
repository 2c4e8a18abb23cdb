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

#include "docret/late_interaction.hpp"

#include <limits>

#include "docret/error.hpp"

namespace docret {

namespace {

void check_pair(const VectorSetView& query, const VectorSetView& doc) {
  if (query.count == 0 || doc.count == 0) throw Error(ErrorCode::kEmptySet, "maxsim needs non-empty vector sets");
  if (query.dim != doc.dim) {
    throw Error(ErrorCode::kDimMismatch,
                "query dim " + std::to_string(query.dim) + " vs document dim " + std::to_string(doc.dim));
  }
}

void check_channel(const EmbeddingChannel& channel, const VectorSetView& query) {
  if (channel.kind() != ChannelKind::kMulti) {
    throw Error(ErrorCode::kInvalidParams, std::string(to_string(channel.id())) + " is not a multi-vector channel");
  }
  if (query.count == 0) throw Error(ErrorCode::kEmptySet, "empty query vector set");
  if (query.dim != channel.dim()) {
    throw Error(ErrorCode::kDimMismatch,
                "query dim " + std::to_string(query.dim) + " vs channel dim " + std::to_string(channel.dim()));
  }
}

}  // namespace

float maxsim(const VectorSetView& query, const VectorSetView& doc) {
  check_pair(query, doc);
  return kernels::maxsim(query.data.data(), query.count, doc.data.data(), doc.count, query.dim);
}

MaxSimHeatmap maxsim_heatmap(const VectorSetView& query, const VectorSetView& doc) {
  check_pair(query, doc);
  MaxSimHeatmap h;
  h.rows = query.count;
  h.cols = doc.count;
  h.values.resize(h.rows * h.cols);
  h.argmax.resize(h.rows);
  h.row_max.resize(h.rows);
  for (std::size_t i = 0; i < h.rows; ++i) {
    float best = -std::numeric_limits<float>::infinity();
    for (std::size_t j = 0; j < h.cols; ++j) {
      const float s = kernels::dot(query.row(i).data(), doc.row(j).data(), query.dim);
      h.values[i * h.cols + j] = s;
      if (s > best) {
        best = s;
        h.argmax[i] = j;
      }
    }
    h.row_max[i] = best;
    h.total += best;
  }
  return h;
}

nlohmann::ordered_json MaxSimHeatmap::to_json() const {
  nlohmann::ordered_json j;
  j["rows"] = rows;
  j["cols"] = cols;
  auto matrix = nlohmann::ordered_json::array();
  for (std::size_t r = 0; r < rows; ++r) {
    matrix.push_back(std::vector<float>(values.begin() + static_cast<std::ptrdiff_t>(r * cols),
                                        values.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols)));
  }
  j["values"] = std::move(matrix);
  j["argmax"] = argmax;
  j["row_max"] = row_max;
  j["maxsim"] = total;
  return j;
}

std::vector<ScoredDoc> maxsim_rescore(const EmbeddingChannel& channel, const VectorSetView& query,
                                      std::span<const std::uint32_t> candidates, Exec exec) {
  check_channel(channel, query);
  std::vector<ScoredDoc> out(candidates.size());
  const auto n = static_cast<std::ptrdiff_t>(candidates.size());
#pragma omp parallel for schedule(dynamic, 4) if (exec == Exec::kParallel)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto ordinal = candidates[static_cast<std::size_t>(i)];
    const auto doc = channel.vectors(ordinal);
    out[static_cast<std::size_t>(i)] =
        ScoredDoc{ordinal, kernels::maxsim(query.data.data(), query.count, doc.data.data(), doc.count, query.dim)};
  }
  return out;
}

std::vector<ScoredDoc> maxsim_scan(const EmbeddingChannel& channel, const VectorSetView& query, Exec exec) {
  std::vector<std::uint32_t> present;
  present.reserve(channel.slots());
  for (std::uint32_t o = 0; o < channel.slots(); ++o) {
    if (channel.has(o)) present.push_back(o);
  }
  return maxsim_rescore(channel, query, present, exec);
}

RankedList exact_maxsim_search(const Corpus& corpus, ChannelId channel, const VectorSetView& query, std::size_t k,
                               Exec exec) {
  auto docs = maxsim_scan(corpus.channel(channel), query, exec);
  select_top_k(docs, k);
  RankedList list;
  list.retriever = "maxsim";
  for (const auto& d : docs) list.hits.push_back(Hit{corpus.page(d.ordinal).page_id, d.score});
  return list;
}

}  // namespace docret
