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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>

#include "docret/dense_index.hpp"
#include "docret/error.hpp"
#include "docret/rng.hpp"

namespace docret {

void GraphIndexParams::validate() const {
  if (M < 2) throw Error(ErrorCode::kInvalidParams, "graph M must be at least 2");
  if (ef_construction == 0) throw Error(ErrorCode::kInvalidParams, "ef_construction must be positive");
}

namespace {

struct Better {
  template <typename C>
  bool operator()(const C& a, const C& b) const {
    if (a.sim != b.sim) return a.sim > b.sim;
    return a.node < b.node;
  }
};

// Heap orders: the top of a std::priority_queue is the "largest" element.
struct WorstOnTop {
  template <typename C>
  bool operator()(const C& a, const C& b) const { return Better{}(a, b); }
};
struct BestOnTop {
  template <typename C>
  bool operator()(const C& a, const C& b) const { return Better{}(b, a); }
};

}  // namespace

float GraphIndex::similarity(std::span<const float> query, std::uint32_t node) const {
  return kernels::dot(query.data(), vectors_->row(node).data(), query.size());
}

std::span<const std::uint32_t> GraphIndex::neighbors(std::size_t node, int level) const {
  if (level < 0 || level > levels_[node]) return {};
  return links_[node][static_cast<std::size_t>(level)];
}

std::vector<GraphIndex::Candidate> GraphIndex::search_layer(std::span<const float> query,
                                                            std::vector<Candidate> entry, std::size_t ef,
                                                            int level) const {
  std::vector<char> visited(levels_.size(), 0);
  std::priority_queue<Candidate, std::vector<Candidate>, BestOnTop> frontier;
  std::priority_queue<Candidate, std::vector<Candidate>, WorstOnTop> pool;
  for (const auto& e : entry) {
    if (visited[e.node]) continue;
    visited[e.node] = 1;
    frontier.push(e);
    pool.push(e);
    if (pool.size() > ef) pool.pop();
  }
  while (!frontier.empty()) {
    const Candidate current = frontier.top();
    if (pool.size() >= ef && Better{}(pool.top(), current)) break;
    frontier.pop();
    for (std::uint32_t nb : links_[current.node][static_cast<std::size_t>(level)]) {
      if (visited[nb]) continue;
      visited[nb] = 1;
      const Candidate c{similarity(query, nb), nb};
      if (pool.size() < ef || Better{}(c, pool.top())) {
        frontier.push(c);
        pool.push(c);
        if (pool.size() > ef) pool.pop();
      }
    }
  }
  std::vector<Candidate> out;
  out.reserve(pool.size());
  while (!pool.empty()) {
    out.push_back(pool.top());
    pool.pop();
  }
  std::reverse(out.begin(), out.end());
  return out;
}

std::vector<std::uint32_t> GraphIndex::select_neighbors(const std::vector<Candidate>& candidates,
                                                        std::size_t limit) const {
  // Keep a candidate only if it is closer to the base than to every
  // neighbour already kept; this spreads links across directions.
  std::vector<std::uint32_t> kept;
  for (const auto& c : candidates) {
    if (kept.size() >= limit) break;
    bool diverse = true;
    for (std::uint32_t k : kept) {
      if (similarity(vectors_->row(c.node), k) > c.sim) {
        diverse = false;
        break;
      }
    }
    if (diverse) kept.push_back(c.node);
  }
  return kept;
}

void GraphIndex::insert(std::uint32_t node) {
  const int level = levels_[node];
  links_[node].resize(static_cast<std::size_t>(level) + 1);
  if (max_level_ < 0) {
    entry_ = node;
    max_level_ = level;
    return;
  }
  const auto query = vectors_->row(node);
  std::vector<Candidate> ep{{similarity(query, entry_), entry_}};
  for (int lev = max_level_; lev > level; --lev) ep = search_layer(query, ep, 1, lev);

  for (int lev = std::min(level, max_level_); lev >= 0; --lev) {
    auto found = search_layer(query, ep, params_.ef_construction, lev);
    const std::size_t cap = params_.max_links(lev);
    auto chosen = select_neighbors(found, params_.M);
    links_[node][static_cast<std::size_t>(lev)] = chosen;
    for (std::uint32_t nb : chosen) {
      auto& back = links_[nb][static_cast<std::size_t>(lev)];
      back.push_back(node);
      if (back.size() > cap) {
        std::vector<Candidate> pool;
        pool.reserve(back.size());
        for (std::uint32_t x : back) pool.push_back({similarity(vectors_->row(nb), x), x});
        std::sort(pool.begin(), pool.end(), Better{});
        back = select_neighbors(pool, cap);
      }
    }
    ep = std::move(found);
  }
  if (level > max_level_) {
    entry_ = node;
    max_level_ = level;
  }
}

GraphIndex GraphIndex::build(std::shared_ptr<const DenseIndex> vectors, const GraphIndexParams& params) {
  params.validate();
  GraphIndex g;
  g.vectors_ = std::move(vectors);
  g.params_ = params;
  const std::size_t n = g.vectors_->size();
  g.levels_.resize(n);
  g.links_.resize(n);
  GaussianSource rng(mix_seed(params.seed, 0x6c61796572));
  const double ml = 1.0 / std::log(static_cast<double>(params.M));
  for (auto& lev : g.levels_) {
    const double u = 1.0 - rng.uniform();  // (0, 1]
    lev = static_cast<int>(std::floor(-std::log(u) * ml));
  }
  for (std::uint32_t node = 0; node < n; ++node) g.insert(node);
  return g;
}

std::vector<ScoredDoc> GraphIndex::search(std::span<const float> query, const SearchParams& params) const {
  params.validate();
  if (levels_.empty()) return {};
  const auto q = vectors_->prepare_query(query);
  std::vector<Candidate> ep{{similarity(q, entry_), entry_}};
  for (int lev = max_level_; lev > 0; --lev) ep = search_layer(q, ep, 1, lev);
  const auto pool = search_layer(q, ep, params.ef, 0);
  std::vector<ScoredDoc> docs;
  docs.reserve(pool.size());
  for (const auto& c : pool) docs.push_back(ScoredDoc{vectors_->ordinals()[c.node], c.sim});
  select_top_k(docs, params.k);
  return docs;
}

void GraphIndex::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  auto put = [&](std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); };
  out.write("DRGR0001", 8);
  put(params_.M);
  put(params_.ef_construction);
  put(params_.seed);
  put(levels_.size());
  put(entry_);
  put(static_cast<std::uint64_t>(static_cast<std::int64_t>(max_level_)));
  for (std::size_t n = 0; n < levels_.size(); ++n) {
    put(static_cast<std::uint64_t>(levels_[n]));
    for (const auto& list : links_[n]) {
      put(list.size());
      out.write(reinterpret_cast<const char*>(list.data()), static_cast<std::streamsize>(list.size() * 4));
    }
  }
  if (!out) throw Error(ErrorCode::kIo, "short write to " + path.string());
}

GraphIndex GraphIndex::load(const std::filesystem::path& path, std::shared_ptr<const DenseIndex> vectors) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIncompatibleStore, "missing graph " + path.string());
  auto get = [&]() {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) throw Error(ErrorCode::kIncompatibleStore, "truncated graph " + path.string());
    return v;
  };
  char magic[8];
  in.read(magic, 8);
  if (!in || std::string_view(magic, 8) != "DRGR0001") {
    throw Error(ErrorCode::kIncompatibleStore, "not a graph index: " + path.string());
  }
  GraphIndex g;
  g.vectors_ = std::move(vectors);
  g.params_.M = get();
  g.params_.ef_construction = get();
  g.params_.seed = get();
  const auto n = get();
  if (n != g.vectors_->size()) throw Error(ErrorCode::kIncompatibleStore, "graph does not match its vectors");
  g.entry_ = static_cast<std::uint32_t>(get());
  g.max_level_ = static_cast<int>(static_cast<std::int64_t>(get()));
  g.levels_.resize(n);
  g.links_.resize(n);
  for (std::size_t node = 0; node < n; ++node) {
    g.levels_[node] = static_cast<int>(get());
    g.links_[node].resize(static_cast<std::size_t>(g.levels_[node]) + 1);
    for (auto& list : g.links_[node]) {
      list.resize(get());
      in.read(reinterpret_cast<char*>(list.data()), static_cast<std::streamsize>(list.size() * 4));
    }
  }
  if (!in) throw Error(ErrorCode::kIncompatibleStore, "truncated graph " + path.string());
  return g;
}

GraphIndex build_graph(const Corpus& corpus, ChannelId channel, Metric metric, const GraphIndexParams& params) {
  return GraphIndex::build(std::make_shared<DenseIndex>(build_exact(corpus, channel, metric)), params);
}

RankedList graph_search(const GraphIndex& index, const Corpus& corpus, std::span<const float> query,
                        const SearchParams& params) {
  const auto docs = index.search(query, params);
  return to_ranked_list(docs, corpus, "dense-graph");
}

}  // namespace docret
