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
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "docret/corpus.hpp"
#include "docret/kernels.hpp"
#include "docret/ranked_list.hpp"

namespace docret {

/// kCosine is a dot product over unit-normalised rows and queries; kDot is
/// plain maximum inner product search.
enum class Metric { kDot, kCosine };

std::string_view to_string(Metric metric);
Metric parse_metric(std::string_view name);

struct SearchParams {
  std::size_t ef = 160;
  std::size_t k = 20;

  /// ef >= k >= 1, otherwise InvalidParams.
  void validate() const;
};

/// Flat matrix of single vectors, one row per page that has a payload.
class DenseIndex {
 public:
  DenseIndex() = default;
  DenseIndex(std::vector<float> rows, std::size_t dim, std::vector<std::uint32_t> ordinals, Metric metric);

  static DenseIndex build(const EmbeddingChannel& channel, Metric metric);

  std::size_t size() const { return ordinals_.size(); }
  std::size_t dim() const { return dim_; }
  Metric metric() const { return metric_; }
  std::uint64_t memory_bytes() const { return rows_.size() * sizeof(float); }
  std::span<const float> row(std::size_t i) const { return std::span<const float>(rows_).subspan(i * dim_, dim_); }
  std::span<const float> rows() const { return rows_; }
  const std::vector<std::uint32_t>& ordinals() const { return ordinals_; }

  /// Query in the index's metric space (unit-normalised for cosine).
  std::vector<float> prepare_query(std::span<const float> query) const;

  /// Exact top-k by similarity; ties by ascending page ordinal.
  std::vector<ScoredDoc> search(std::span<const float> query, std::size_t k, Exec exec = Exec::kParallel) const;

  void save(const std::filesystem::path& path) const;
  static DenseIndex load(const std::filesystem::path& path);

 private:
  std::vector<float> rows_;
  std::size_t dim_ = 0;
  std::vector<std::uint32_t> ordinals_;
  Metric metric_ = Metric::kDot;
};

DenseIndex build_exact(const Corpus& corpus, ChannelId channel, Metric metric = Metric::kCosine);

RankedList to_ranked_list(std::span<const ScoredDoc> docs, const Corpus& corpus, std::string retriever);

RankedList exact_search(const DenseIndex& index, const Corpus& corpus, std::span<const float> query,
                        std::size_t k);

struct GraphIndexParams {
  std::size_t M = 16;
  std::size_t ef_construction = 128;
  std::uint64_t seed = 42;

  void validate() const;
  /// Link cap of a node on `level`: 2M on the base layer, M above it.
  std::size_t max_links(int level) const { return level == 0 ? 2 * M : M; }
};

/// Layered navigable small-world graph over the rows of a DenseIndex.
/// Nodes keep at most max_links(level) neighbours per layer. Build is
/// single-threaded and deterministic for a fixed seed.
class GraphIndex {
 public:
  static GraphIndex build(std::shared_ptr<const DenseIndex> vectors, const GraphIndexParams& params);

  /// Beam search with a candidate pool of `ef`; returns the best k of the pool.
  std::vector<ScoredDoc> search(std::span<const float> query, const SearchParams& params) const;

  const DenseIndex& vectors() const { return *vectors_; }
  const GraphIndexParams& params() const { return params_; }
  std::size_t size() const { return levels_.size(); }
  int max_level() const { return max_level_; }
  int level_of(std::size_t node) const { return levels_[node]; }
  std::span<const std::uint32_t> neighbors(std::size_t node, int level) const;

  void save(const std::filesystem::path& path) const;
  static GraphIndex load(const std::filesystem::path& path, std::shared_ptr<const DenseIndex> vectors);

 private:
  struct Candidate {
    float sim;
    std::uint32_t node;
  };

  float similarity(std::span<const float> query, std::uint32_t node) const;
  std::vector<Candidate> search_layer(std::span<const float> query, std::vector<Candidate> entry, std::size_t ef,
                                      int level) const;
  std::vector<std::uint32_t> select_neighbors(const std::vector<Candidate>& candidates, std::size_t limit) const;
  void insert(std::uint32_t node);

  std::shared_ptr<const DenseIndex> vectors_;
  GraphIndexParams params_;
  std::vector<int> levels_;
  // links_[node][level] -> neighbour ids
  std::vector<std::vector<std::vector<std::uint32_t>>> links_;
  std::uint32_t entry_ = 0;
  int max_level_ = -1;
};

GraphIndex build_graph(const Corpus& corpus, ChannelId channel, Metric metric, const GraphIndexParams& params);

RankedList graph_search(const GraphIndex& index, const Corpus& corpus, std::span<const float> query,
                        const SearchParams& params);

}  // namespace docret
