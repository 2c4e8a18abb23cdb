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
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <tuple>

#include "docret/bm25.hpp"
#include "docret/corpus.hpp"
#include "docret/dense_index.hpp"
#include "docret/eval.hpp"
#include "docret/fusion.hpp"
#include "docret/muvera.hpp"
#include "json.hpp"

namespace docret {

enum class RetrieverKind { kBm25, kDense, kMaxSim, kMuvera, kHybrid, kMultimodal };

std::string_view to_string(RetrieverKind kind);
RetrieverKind parse_retriever(std::string_view name);

/// Everything needed to reproduce one retrieval configuration.
struct RetrieverSpec {
  RetrieverKind kind = RetrieverKind::kBm25;
  Bm25Params bm25;
  ChannelId text_channel = ChannelId::kDenseText;
  ChannelId image_channel = ChannelId::kMultivectorImage;
  Metric metric = Metric::kCosine;
  /// Dense retrieval through the graph index instead of an exact scan.
  bool graph = false;
  GraphIndexParams graph_params;
  std::size_t ef = 160;
  FdeParams fde;
  Stage1 stage1 = Stage1::kExact;
  Strategy strategy = Strategy::kRsf;
  double alpha = 0.5;
  std::size_t rrf_k = kDefaultRrfK;
  /// Per-retriever candidate depth before fusion.
  std::size_t pool = 100;
  /// Image side of multimodal fusion: kMaxSim or kMuvera.
  RetrieverKind image_retriever = RetrieverKind::kMaxSim;

  void validate() const;
  nlohmann::ordered_json to_json() const;
  /// Missing fields keep their defaults.
  static RetrieverSpec from_json(const nlohmann::json& j);
};

/// What a query brings: its text, and its ordinal in the query set when
/// query-side embeddings are available.
struct QueryInput {
  std::string text;
  std::optional<std::uint32_t> ordinal;
};

struct SearchOutcome {
  RankedList list;
  /// Filled for fused retrievers: per hit, the weighted contribution of each
  /// input list (names in `inputs`).
  std::vector<std::string> inputs;
  std::vector<std::vector<double>> contributions;
};

/// Retrieval over one corpus with indexes built on first use. Indexes found
/// under `index_dir` are loaded when their parameters match; build_indexes()
/// writes them there.
class Engine {
 public:
  Engine(Corpus corpus, QuerySet queries, std::optional<std::filesystem::path> index_dir = std::nullopt);

  const Corpus& corpus() const { return corpus_; }
  const QuerySet& queries() const { return queries_; }

  /// Builds (or loads) every index `spec` needs.
  void prepare(const RetrieverSpec& spec);
  /// Builds the indexes `spec` needs and persists them under index_dir.
  void build_indexes(const RetrieverSpec& spec);

  SearchOutcome search(const RetrieverSpec& spec, const QueryInput& query, std::size_t depth);
  RetrievalRun run(const std::string& name, const RetrieverSpec& spec, std::size_t depth,
                   Exec exec = Exec::kParallel);

  QueryInput query(std::uint32_t ordinal) const;

 private:
  const InvertedIndex& bm25();
  std::shared_ptr<const DenseIndex> dense(ChannelId channel, Metric metric);
  const GraphIndex& graph(ChannelId channel, Metric metric, const GraphIndexParams& params);
  const FdeIndex& fde(ChannelId channel, const FdeParams& params);
  const GraphIndex& fde_graph(ChannelId channel, const FdeParams& params, const GraphIndexParams& graph_params);
  VectorSetView query_vectors(const QueryInput& query, ChannelId channel) const;
  void check_index_dir();
  void save_index_meta();

  RankedList single(const RetrieverSpec& spec, RetrieverKind kind, const QueryInput& query, std::size_t depth);

  Corpus corpus_;
  QuerySet queries_;
  std::optional<std::filesystem::path> index_dir_;
  std::recursive_mutex mutex_;
  std::unique_ptr<InvertedIndex> bm25_;
  std::map<std::pair<ChannelId, Metric>, std::shared_ptr<const DenseIndex>> dense_;
  std::map<std::tuple<ChannelId, Metric, std::size_t, std::size_t, std::uint64_t>, std::unique_ptr<GraphIndex>> graphs_;
  std::map<std::tuple<ChannelId, std::uint32_t, std::uint32_t, std::uint32_t, std::uint64_t, bool>,
           std::unique_ptr<FdeIndex>>
      fdes_;
  std::map<std::tuple<ChannelId, std::uint32_t, std::uint32_t, std::uint32_t, std::uint64_t, bool>,
           std::unique_ptr<GraphIndex>>
      fde_graphs_;
};

}  // namespace docret
