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

#include <cmath>
#include <fstream>

#include "docret/dense_index.hpp"
#include "docret/error.hpp"

namespace docret {

std::string_view to_string(Metric metric) { return metric == Metric::kDot ? "dot" : "cosine"; }

Metric parse_metric(std::string_view name) {
  if (name == "dot") return Metric::kDot;
  if (name == "cosine") return Metric::kCosine;
  throw Error(ErrorCode::kInvalidParams, "unknown metric '" + std::string(name) + "'");
}

void SearchParams::validate() const {
  if (k == 0) throw Error(ErrorCode::kInvalidParams, "k must be positive");
  if (ef < k) {
    throw Error(ErrorCode::kInvalidParams,
                "ef (" + std::to_string(ef) + ") must be at least k (" + std::to_string(k) + ")");
  }
}

namespace {

void normalize(std::span<float> v) {
  double norm = 0.0;
  for (float x : v) norm += static_cast<double>(x) * x;
  norm = std::sqrt(norm);
  if (norm == 0.0) return;
  for (float& x : v) x = static_cast<float>(x / norm);
}

}  // namespace

DenseIndex::DenseIndex(std::vector<float> rows, std::size_t dim, std::vector<std::uint32_t> ordinals, Metric metric)
    : rows_(std::move(rows)), dim_(dim), ordinals_(std::move(ordinals)), metric_(metric) {
  if (dim_ == 0 || rows_.size() != ordinals_.size() * dim_) {
    throw Error(ErrorCode::kDimMismatch, "dense index rows do not match dim");
  }
}

DenseIndex DenseIndex::build(const EmbeddingChannel& channel, Metric metric) {
  if (channel.kind() != ChannelKind::kDense) {
    throw Error(ErrorCode::kInvalidParams, std::string(to_string(channel.id())) + " is not a dense channel");
  }
  std::vector<float> rows;
  std::vector<std::uint32_t> ordinals;
  for (std::uint32_t o = 0; o < channel.slots(); ++o) {
    if (!channel.has(o)) continue;
    const auto v = channel.vector(o);
    const auto start = rows.size();
    rows.insert(rows.end(), v.begin(), v.end());
    if (metric == Metric::kCosine && !channel.normalized()) normalize(std::span<float>(rows).subspan(start));
    ordinals.push_back(o);
  }
  return DenseIndex(std::move(rows), channel.dim(), std::move(ordinals), metric);
}

std::vector<float> DenseIndex::prepare_query(std::span<const float> query) const {
  if (query.size() != dim_) {
    throw Error(ErrorCode::kDimMismatch,
                "query dim " + std::to_string(query.size()) + " vs index dim " + std::to_string(dim_));
  }
  std::vector<float> q(query.begin(), query.end());
  if (metric_ == Metric::kCosine) normalize(q);
  return q;
}

std::vector<ScoredDoc> DenseIndex::search(std::span<const float> query, std::size_t k, Exec exec) const {
  const auto q = prepare_query(query);
  std::vector<float> scores(size());
  kernels::dot_rows(rows_.data(), size(), dim_, q.data(), scores.data(), exec);
  std::vector<ScoredDoc> docs(size());
  for (std::size_t i = 0; i < size(); ++i) docs[i] = ScoredDoc{ordinals_[i], scores[i]};
  select_top_k(docs, k);
  return docs;
}

void DenseIndex::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  auto put = [&](std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); };
  out.write("DRDX0001", 8);
  put(dim_);
  put(metric_ == Metric::kDot ? 0 : 1);
  put(ordinals_.size());
  out.write(reinterpret_cast<const char*>(ordinals_.data()), static_cast<std::streamsize>(ordinals_.size() * 4));
  out.write(reinterpret_cast<const char*>(rows_.data()), static_cast<std::streamsize>(rows_.size() * 4));
  if (!out) throw Error(ErrorCode::kIo, "short write to " + path.string());
}

DenseIndex DenseIndex::load(const std::filesystem::path& path) {
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
  if (!in || std::string_view(magic, 8) != "DRDX0001") {
    throw Error(ErrorCode::kIncompatibleStore, "not a dense index: " + path.string());
  }
  const auto dim = get();
  const auto metric = get() == 0 ? Metric::kDot : Metric::kCosine;
  const auto n = get();
  std::vector<std::uint32_t> ordinals(n);
  std::vector<float> rows(n * dim);
  in.read(reinterpret_cast<char*>(ordinals.data()), static_cast<std::streamsize>(n * 4));
  in.read(reinterpret_cast<char*>(rows.data()), static_cast<std::streamsize>(rows.size() * 4));
  if (!in) throw Error(ErrorCode::kIncompatibleStore, "truncated index " + path.string());
  return DenseIndex(std::move(rows), dim, std::move(ordinals), metric);
}

DenseIndex build_exact(const Corpus& corpus, ChannelId channel, Metric metric) {
  return DenseIndex::build(corpus.channel(channel), metric);
}

RankedList to_ranked_list(std::span<const ScoredDoc> docs, const Corpus& corpus, std::string retriever) {
  RankedList list;
  list.retriever = std::move(retriever);
  list.hits.reserve(docs.size());
  for (const auto& d : docs) list.hits.push_back(Hit{corpus.page(d.ordinal).page_id, d.score});
  return list;
}

RankedList exact_search(const DenseIndex& index, const Corpus& corpus, std::span<const float> query,
                        std::size_t k) {
  const auto docs = index.search(query, k);
  return to_ranked_list(docs, corpus, "dense");
}

}  // namespace docret
